#pragma once

#include "projlab/bignat.hpp"
#include "projlab/real.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace projlab {

// Word over letters a1..a<alphabet_size>, stored run-length encoded with
// nested atoms. The rightmost factor acts first when evaluated.
class PowerWord {
public:
    using Atom = std::variant<int, std::shared_ptr<const PowerWord>>;
    struct Factor {
        Atom atom;
        BigNat exponent;
    };

    explicit PowerWord(int alphabet_size = 1);
    PowerWord(int alphabet_size, std::vector<Factor> factors);

    static PowerWord letter(int alphabet_size, int index);
    // word := factor+ ; factor := letter | '(' word ')' '^' exponent ; letter := 'a' index
    static PowerWord parse(std::string_view text, int alphabet_size);

    std::string to_string() const;
    int alphabet_size() const { return alphabet_size_; }
    const std::vector<Factor>& factors() const { return factors_; }
    bool empty() const { return factors_.empty(); }
    const BigNat& length() const { return length_; }
    const BigNat& occurrences(int letter) const;
    // Largest letter index that actually appears (0 for the empty word).
    int max_letter() const;

    friend bool structurally_equal(const PowerWord& a, const PowerWord& b);

private:
    int alphabet_size_;
    std::vector<Factor> factors_;
    BigNat length_;
    std::vector<BigNat> counts_;  // index 0 unused

    void canonicalize();
};

PowerWord concat(const PowerWord& w1, const PowerWord& w2);
PowerWord power(const PowerWord& w, const BigNat& e);
// Replaces every occurrence of `letter` by `replacement`; the result lives
// over result_alphabet letters (0 keeps the larger of the two alphabets).
PowerWord substitute(const PowerWord& w, int letter, const PowerWord& replacement, int result_alphabet = 0);
// Exchanges two letters everywhere.
PowerWord transpose_letters(const PowerWord& w, int a, int b);
BigNat occurrences(const PowerWord& w, int letter);

// Equality of the flattened letter sequences. Structurally different forms
// are compared by streaming letter runs; throws std::domain_error when that
// needs more than run_budget runs.
bool semantically_equal(const PowerWord& a, const PowerWord& b, std::size_t run_budget = 2'000'000);
inline bool operator==(const PowerWord& a, const PowerWord& b) { return semantically_equal(a, b); }

// Diagonal form of a nested atom's operator: sum_t lambda_t f_t f_t^T,
// with log(lambda_t) kept in extended precision.
struct SpectralHint {
    Eigen::MatrixXd basis;
    std::vector<Real> log_eigenvalues;
};

struct OperatorAssignment {
    std::map<int, Eigen::MatrixXd> ops;
    std::map<int, bool> contraction;          // letters declared contractions
    std::map<std::string, SpectralHint> spectral;  // keyed by the atom's text
    double tol = 1e-9;

    int dimension() const;
};

Eigen::MatrixXd evaluate(const PowerWord& w, const OperatorAssignment& a);

struct ContinuityCheck {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

struct PreconditionError : std::runtime_error {
    double measured;
    PreconditionError(const std::string& what, double m) : std::runtime_error(what), measured(m) {}
};

// ||psi(A)E - psi(B)E|| against sum_i |psi_i| ||A_iE - B_iE||.
ContinuityCheck check_word_continuity(const PowerWord& psi, const OperatorAssignment& a,
                                      const OperatorAssignment& b, const Eigen::MatrixXd& e);

}  // namespace projlab
