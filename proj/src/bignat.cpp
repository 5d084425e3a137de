#include "projlab/bignat.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace projlab {

namespace {

constexpr std::uint64_t kMergeGap = 64;
constexpr std::uint64_t kDecimalLimitBits = 13606;  // 2^13606 < 10^4096

std::uint64_t width(const cpp_int& v) { return v == 0 ? 0 : boost::multiprecision::msb(v) + 1; }

cpp_int low_mask(std::uint64_t n) { return (cpp_int(1) << n) - 1; }

cpp_int parse_digits(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("bad digit in number");
    return cpp_int(std::string(s));
}

}  // namespace

BigNat::BigNat(std::uint64_t v) {
    if (v != 0) *this = from_chunks({Chunk{0, cpp_int(v)}});
}

BigNat::BigNat(const cpp_int& v) {
    if (v < 0) throw std::invalid_argument("negative BigNat");
    if (v != 0) *this = from_chunks({Chunk{0, v}});
}

BigNat BigNat::shifted(const cpp_int& mantissa, std::uint64_t exponent) {
    if (mantissa < 0) throw std::invalid_argument("negative BigNat");
    if (mantissa == 0) return {};
    return from_chunks({Chunk{exponent, mantissa}});
}

BigNat BigNat::from_chunks(std::vector<Chunk> parts) {
    std::erase_if(parts, [](const Chunk& c) { return c.value == 0; });
    std::sort(parts.begin(), parts.end(), [](const Chunk& a, const Chunk& b) { return a.shift < b.shift; });
    BigNat out;
    auto flush = [&out](Chunk c) {
        if (c.value == 0) return;
        auto low = boost::multiprecision::lsb(c.value);
        c.value >>= low;
        c.shift += low;
        out.chunks_.push_back(std::move(c));
    };
    if (parts.empty()) return out;
    Chunk cur = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        Chunk& c = parts[i];
        if (c.shift <= cur.shift + width(cur.value) + kMergeGap) {
            cur.value += c.value << static_cast<unsigned>(c.shift - cur.shift);
        } else {
            flush(std::move(cur));
            cur = std::move(c);
        }
    }
    flush(std::move(cur));
    return out;
}

std::uint64_t BigNat::bit_length() const {
    if (chunks_.empty()) return 0;
    return chunks_.back().shift + width(chunks_.back().value);
}

bool BigNat::bit(std::uint64_t i) const {
    auto it = std::upper_bound(chunks_.begin(), chunks_.end(), i,
                               [](std::uint64_t x, const Chunk& c) { return x < c.shift; });
    if (it == chunks_.begin()) return false;
    --it;
    std::uint64_t off = i - it->shift;
    if (off >= width(it->value)) return false;
    return boost::multiprecision::bit_test(it->value, static_cast<unsigned>(off));
}

std::uint64_t BigNat::to_u64() const {
    if (!fits_u64()) throw std::overflow_error("BigNat does not fit in 64 bits");
    std::uint64_t v = 0;
    for (const auto& c : chunks_) v += static_cast<std::uint64_t>(c.value) << c.shift;
    return v;
}

cpp_int BigNat::to_cpp_int(std::uint64_t max_bits) const {
    if (bit_length() > max_bits) throw std::overflow_error("BigNat too large to expand");
    cpp_int v = 0;
    for (const auto& c : chunks_) v += c.value << static_cast<unsigned>(c.shift);
    return v;
}

cpp_int BigNat::bits_in(std::uint64_t lo, std::uint64_t hi) const {
    cpp_int out = 0;
    for (const auto& c : chunks_) {
        std::uint64_t s = c.shift, e = c.shift + width(c.value);
        std::uint64_t a = std::max(lo, s), b = std::min(hi, e);
        if (a >= b) continue;
        cpp_int piece = (c.value >> static_cast<unsigned>(a - s)) & low_mask(b - a);
        out += piece << static_cast<unsigned>(a - lo);
    }
    return out;
}

void BigNat::leading(double& m, std::int64_t& e) const {
    std::uint64_t n = bit_length();
    if (n == 0) {
        m = 0.0;
        e = 0;
        return;
    }
    std::uint64_t lo = n > 64 ? n - 64 : 0;
    m = static_cast<double>(bits_in(lo, n));
    e = static_cast<std::int64_t>(lo);
}

namespace {

// Highest set bit strictly below hi, or -1.
std::int64_t top_below(const std::vector<BigNat::Chunk>& cs, std::uint64_t hi) {
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
        if (it->shift >= hi) continue;
        std::uint64_t w = width(it->value);
        if (it->shift + w <= hi) return static_cast<std::int64_t>(it->shift + w - 1);
        cpp_int masked = it->value & low_mask(hi - it->shift);
        if (masked != 0) return static_cast<std::int64_t>(it->shift + boost::multiprecision::msb(masked));
    }
    return -1;
}

}  // namespace

int compare(const BigNat& a, const BigNat& b) {
    std::uint64_t la = a.bit_length(), lb = b.bit_length();
    if (la != lb) return la < lb ? -1 : 1;
    std::uint64_t hi = la;
    while (hi > 0) {
        std::int64_t ta = top_below(a.chunks_, hi), tb = top_below(b.chunks_, hi);
        if (ta != tb) return ta < tb ? -1 : 1;
        if (ta < 0) return 0;
        std::uint64_t top = static_cast<std::uint64_t>(ta) + 1;
        std::uint64_t lo = top > 4096 ? top - 4096 : 0;
        cpp_int wa = a.bits_in(lo, top), wb = b.bits_in(lo, top);
        if (wa != wb) return wa < wb ? -1 : 1;
        hi = lo;
    }
    return 0;
}

BigNat operator+(const BigNat& a, const BigNat& b) {
    std::vector<BigNat::Chunk> parts = a.chunks_;
    parts.insert(parts.end(), b.chunks_.begin(), b.chunks_.end());
    return BigNat::from_chunks(std::move(parts));
}

BigNat operator*(const BigNat& a, const BigNat& b) {
    std::vector<BigNat::Chunk> parts;
    parts.reserve(a.chunks_.size() * b.chunks_.size());
    for (const auto& x : a.chunks_)
        for (const auto& y : b.chunks_) parts.push_back({x.shift + y.shift, x.value * y.value});
    return BigNat::from_chunks(std::move(parts));
}

std::string BigNat::to_compact_string() const {
    if (chunks_.empty()) return "0";
    std::string out;
    for (auto it = chunks_.rbegin(); it != chunks_.rend(); ++it) {
        if (!out.empty()) out += '+';
        out += it->value.str();
        if (it->shift != 0) out += "*2^" + std::to_string(it->shift);
    }
    return out;
}

std::string BigNat::to_string() const {
    if (bit_length() <= kDecimalLimitBits) return to_cpp_int(kDecimalLimitBits).str();
    return to_compact_string();
}

BigNat BigNat::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    std::vector<Chunk> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('+', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view term = text.substr(pos, end - pos);
        std::size_t star = term.find("*2^");
        if (star == std::string_view::npos) {
            parts.push_back({0, parse_digits(term)});
        } else {
            cpp_int e = parse_digits(term.substr(star + 3));
            if (e > cpp_int(std::numeric_limits<std::uint64_t>::max() / 2))
                throw std::invalid_argument("binary exponent too large");
            parts.push_back({static_cast<std::uint64_t>(e), parse_digits(term.substr(0, star))});
        }
        if (end == text.size()) break;
        pos = end + 1;
        if (pos == text.size()) throw std::invalid_argument("dangling '+' in number");
    }
    return from_chunks(std::move(parts));
}

}  // namespace projlab
