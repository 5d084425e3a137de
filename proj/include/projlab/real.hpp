#pragma once

#include "projlab/bignat.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace projlab {

// 64 significant digits with an exponent range far beyond double; used for
// every quantity that is tiny, huge, or formed by a huge power.
using Real = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<64, boost::multiprecision::allocate_stack>,
    boost::multiprecision::et_off>;

Real to_real(const BigNat& n);
Real real_pi();
// Zero when the value underflows double.
double to_double(const Real& x);
// Scientific notation with 17 significant digits.
std::string format_real(const Real& x);
// Decimal or scientific text, or a ratio "p/q" of two such numbers.
Real parse_real(std::string_view text);
// 17-digit text whose value does not exceed x (x > 0).
std::string round_down_text(const Real& x);
// log10 of a positive value as a double, for reports.
double log10_of(const Real& x);

// Largest integer >= x with at most 60 significant bits (exact when x < 2^60).
BigNat ceil_compact(const Real& x);

struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Real> a;

    RealMatrix() = default;
    RealMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, Real(0)) {}
    static RealMatrix identity(int n);

    Real& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    const Real& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

RealMatrix operator*(const RealMatrix& x, const RealMatrix& y);
RealMatrix transpose(const RealMatrix& x);

struct SymEigen {
    std::vector<Real> values;  // ascending
    RealMatrix vectors;        // columns
};

// Cyclic Jacobi. Stops on |a_ij| <= tol*sqrt(|a_ii a_jj|), which keeps small
// eigenvalues of graded positive semidefinite matrices relatively accurate.
// Entries below abs_floor are also treated as converged.
SymEigen jacobi_eigen(RealMatrix a, const Real& abs_floor = Real(0));

}  // namespace projlab
