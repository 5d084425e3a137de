#pragma once

#include "projlab/bignat.hpp"
#include "projlab/flag.hpp"
#include "projlab/json_io.hpp"
#include "projlab/linalg.hpp"
#include "projlab/real.hpp"
#include "projlab/word.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace projlab {

// Y = span{(e_t + gamma_t w_t)/sqrt(1+gamma_t^2)} over the flag-adapted basis
// e_t of X, so that (XYX)^m e_t = e_t/(1+gamma_t^2)^m.
struct TwoSpaceReduction {
    int k = 0;
    Real eps_prime;
    Real eta;
    BigNat a{1u};
    std::vector<Real> beta;         // beta_1..beta_{k+1}
    std::vector<long> beta_halvings;  // beta_j = beta_{j+1} 2^-t, j = 1..k
    std::vector<BigNat> s;          // s(1)..s(k)
    std::vector<Real> gamma;        // per adapted basis index 0..k+1
    std::vector<Real> flag_error;   // ||(XYX)^s(j) - X_j||, j = 1..k
    Real distance;                  // ||X - Y||
    Real min_gamma;                 // positive means X and Y meet only in 0

    // log of the eigenvalue of XYX along basis index t
    Real log_mu(int t) const { return -log1p(gamma[t] * gamma[t]); }
};

struct ReductionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Smallest admissible s > above with (1+beta^2)^-s < 0.9 eps' (rounded up to
// 60 significant bits when larger than 2^60).
BigNat reduction_exponent(const Real& beta, const Real& eps_prime, const BigNat& above);

// x_rank is the rank of X (k+2 here); e_dim must leave room for the w system.
TwoSpaceReduction build_two_space_reduction(const NestedFlag& flag, int x_rank, int e_dim, const Real& eps_prime,
                                            const Real& eta, const BigNat& a);
TwoSpaceReduction rebuild_two_space_reduction(int k, const Real& eps_prime, const Real& eta, const BigNat& a,
                                              const std::vector<long>& beta_halvings);

// One block: psi = prod_j ((a2 a3 a2)^s(j) a1 (a2 a3 a2)^s(j))^r(j) over
// a1 = W, a2 = X, a3 = Y, in coordinates (u, v, z_0..z_{k-1}, w_0..w_{k+1}).
struct BlockCertificate {
    std::string eps_text;
    std::string eta_text;
    std::string alpha0_text = "1/2";
    Real eps, eta, alpha0;
    int k = 0;
    int e_dim = 0;
    NestedFlag flag;
    TwoSpaceReduction reduction;
    BigNat phi_length;
    Real eps_prime;
    BigNat N;
    Real delta;
    PowerWord psi{3};
    Real achieved_error;
    std::vector<Real> run_errors;  // distance to h_j after run j
    bool spectral_only = false;    // some s(j) above 10^4096
    bool frames_embedded = false;
    Frame x_frame, y_frame;        // block coordinates
    Eigen::MatrixXd embedding;     // ambient basis for block coordinates (empty: identity)

    Real x_coefficient(int t, int port) const { return flag.basis_uv[t][port]; }
    bool holds() const;  // every bound with the 0.9 safety factor
};

constexpr int kMaxEmbeddedDim = 1024;

BlockCertificate build_block(const std::string& eps_text, const std::string& eta_text,
                             const std::string& alpha0_text = "1/2", const BigNat& a = BigNat(1u));
// Same, from an already built flag (which fixes k, r and hence N).
BlockCertificate build_block(NestedFlag flag, const std::string& eps_text, const std::string& eta_text,
                             const std::string& alpha0_text = "1/2", const BigNat& a = BigNat(1u));
// Number of a1 letters in psi; depends on the flag only.
BigNat flag_wall_count(const NestedFlag& flag);
// u, v orthonormal in span(E); E supplies the remaining block coordinates.
BlockCertificate build_block(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const std::string& eps_text,
                             const std::string& eta_text, const Frame& e);

// ||psi(W, X, Y) u - v|| evaluated spectrally in extended precision.
Real block_error(const BlockCertificate& c, std::vector<Real>* run_errors = nullptr);
// Dense frames of X and Y in block coordinates (double).
Frame block_x_frame(const BlockCertificate& c);
Frame block_y_frame(const BlockCertificate& c);

struct RobustnessResult {
    double error = 0;              // ||psi(Z, X v X', Y v Y') u - v||
    Real distance;                 // measured ||W - Z P_E||
    double distance_over_delta = 0;
    bool holds = false;            // error < 0.9 * 4 eps
};

// Z, X', Y' live in the ambient space of E, whose columns are the block
// coordinates. Inputs are taken as exact and processed in extended precision.
// Throws PreconditionError when X' or Y' is not orthogonal to E or when
// ||W - Z P_E|| >= delta, and std::domain_error when the block's run
// exponents are too large for the working precision.
RobustnessResult verify_block_robustness(const BlockCertificate& c, const Frame& z, const Frame& xp, const Frame& yp,
                                         const Frame& e);
// ||W - Z P_E|| in extended precision.
Real window_distance(const Frame& z, const Frame& e);

// Random trials: X', Y' random planes in extra coordinates orthogonal to E,
// Z a random perturbation of W (plus one direction outside E) scaled so that
// ||W - Z P_E|| lies in [0.9, 0.999] delta.
std::vector<RobustnessResult> robustness_trials(const BlockCertificate& c, int trials, std::uint64_t seed,
                                                int extra_dims = 6);

json to_json(const BlockCertificate& c);
BlockCertificate certificate_from_json(const json& j);

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> failures;
    json details;
};
// Rebuilds the block from its stored parameters and compares every stored
// quantity (errors within 1e-8, scalars within 1e-12 relative).
VerifyReport verify_certificate(const json& j);

}  // namespace projlab
