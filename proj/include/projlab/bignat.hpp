#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace projlab {

using boost::multiprecision::cpp_int;

// Exact natural number stored as a sparse sum of shifted chunks.
// Numbers like M*2^E with E in the millions cost a few words.
class BigNat {
public:
    struct Chunk {
        std::uint64_t shift = 0;
        cpp_int value;  // odd, positive
    };

    BigNat() = default;
    BigNat(std::uint64_t v);  // NOLINT(google-explicit-constructor)
    explicit BigNat(const cpp_int& v);

    static BigNat shifted(const cpp_int& mantissa, std::uint64_t exponent);
    // Accepts decimal digits or a '+'-joined list of "M*2^E" terms.
    static BigNat parse(std::string_view text);

    bool is_zero() const { return chunks_.empty(); }
    std::uint64_t bit_length() const;
    bool bit(std::uint64_t i) const;
    bool fits_u64() const { return bit_length() <= 64; }
    std::uint64_t to_u64() const;
    // Throws when the full expansion would exceed max_bits.
    cpp_int to_cpp_int(std::uint64_t max_bits = 1u << 20) const;
    // Leading bits as a double mantissa and binary exponent: value ~ m * 2^e.
    void leading(double& m, std::int64_t& e) const;

    // Decimal when below 10^4096, otherwise the compact term list.
    std::string to_string() const;
    std::string to_compact_string() const;

    const std::vector<Chunk>& chunks() const { return chunks_; }

    friend BigNat operator+(const BigNat& a, const BigNat& b);
    friend BigNat operator*(const BigNat& a, const BigNat& b);
    BigNat& operator+=(const BigNat& b) { return *this = *this + b; }
    BigNat& operator*=(const BigNat& b) { return *this = *this * b; }

    friend int compare(const BigNat& a, const BigNat& b);
    friend bool operator==(const BigNat& a, const BigNat& b) { return compare(a, b) == 0; }
    friend bool operator<(const BigNat& a, const BigNat& b) { return compare(a, b) < 0; }
    friend bool operator<=(const BigNat& a, const BigNat& b) { return compare(a, b) <= 0; }
    friend bool operator>(const BigNat& a, const BigNat& b) { return compare(a, b) > 0; }
    friend bool operator>=(const BigNat& a, const BigNat& b) { return compare(a, b) >= 0; }

private:
    std::vector<Chunk> chunks_;  // ascending shift, disjoint bit ranges

    static BigNat from_chunks(std::vector<Chunk> parts);
    cpp_int bits_in(std::uint64_t lo, std::uint64_t hi) const;
};

}  // namespace projlab
