#pragma once

#include "projlab/bignat.hpp"
#include "projlab/linalg.hpp"
#include "projlab/real.hpp"
#include "projlab/word.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace projlab {

// Smallest k >= 1 with cos(pi/2k)^k > 1 - eps. Exact ties (within 1e-40)
// do not count as strictly greater.
int k_of_eps(const Real& eps);
int k_of_eps(double eps);

// Points h_j = u cos(j xi) + v sin(j xi), xi = pi/2k, plus helper directions
// z_0..z_{k-1} orthogonal to u, v and each other.
struct QuarterCircle {
    int k = 0;
    Real xi;
    Eigen::VectorXd u, v;
    std::vector<Eigen::VectorXd> h;  // h_0..h_k
    std::vector<Eigen::VectorXd> z;  // z_0..z_{k-1}

    // Canonical coordinates (u, v, z_0, .., z_{k-1}, then zeros).
    static QuarterCircle canonical(int k, int ambient_dim);
    int ambient_dim() const { return static_cast<int>(u.size()); }
    void validate(double tol = 1e-10) const;
};

// Nested flag X_1 c ... c X_k with X_j = span{h_i + alpha_i z_i : i <= j},
// alpha_k = 0. All scalars are exact functions of (k, eps, alpha_0) and the
// halving counts, so the flag can be rebuilt from its parameters.
struct NestedFlag {
    int k = 0;
    Real eps;
    Real xi;
    Real alpha0;
    std::vector<int> halvings;   // alpha_j = alpha_{j-1} * 2^-halvings[j], j >= 1
    std::vector<Real> alpha;     // alpha_0..alpha_{k-1}
    std::vector<Real> gap;       // j = 1..k at j-1: 1 - cos^2 of the second angle between W and X'_j
    std::vector<BigNat> r;       // r(1)..r(k)
    std::vector<Real> display;   // ||(X_j W X_j)^r(j) - (v h_j)||
    Real error;                  // ||phi(W, X_1..X_k) u - v||
    PowerWord phi;               // over a1 = W, a_{j+1} = X_j
    // Orthonormal basis adapted to the flag, columns in coordinates
    // (u, v, z_0..z_{k-1}): columns 0..j span X_j for j >= 1 and column k+1
    // completes span{u, v, z}. basis_uv keeps the (u, v) components in Real.
    Eigen::MatrixXd basis;
    std::vector<std::array<Real, 2>> basis_uv;
    // Full extended-precision columns, kept only when k+2 <= kRealBasisLimit.
    std::vector<std::vector<Real>> basis_real;

    Frame x_frame(int j, const QuarterCircle& qc) const;
    Frame x_prime_frame(int j, const QuarterCircle& qc) const;
};

constexpr int kRealBasisLimit = 128;

struct FlagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every strict bound is enforced with the 0.9 safety factor.
NestedFlag build_nested_flag(const QuarterCircle& qc, const Real& eps, const Real& alpha0);
// Rebuilds a flag from stored halving counts (no search).
NestedFlag rebuild_nested_flag(int k, const Real& eps, const Real& alpha0, const std::vector<int>& halvings);

}  // namespace projlab
