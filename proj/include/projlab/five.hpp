#pragma once

#include "projlab/chain.hpp"

#include <stdexcept>

namespace projlab {

// Y = span{(e_l + f_l)/sqrt 2} for the columns e_l of X and an orthonormal
// basis f_l of the complement of X in R^ambient.
struct Pairing {
    Frame x, complement, y;
};
Pairing build_pairing(const Frame& x, int ambient);
// min over the given unit vectors of ||Xz|| + ||XYz||.
double pairing_min(const Pairing& p, const std::vector<Eigen::VectorXd>& zs);

// d pairwise orthogonal copies of one glued chain. Copy l occupies
// coordinates [l*D, (l+1)*D); its e_1 is the base vector w^l and the rest
// of the copy is F_l.
struct FanOut {
    int d = 0;
    GluedTriple chain;
    ChainProgram program;  // runs on one copy
    int copy_dim = 0;

    int dim() const { return d * copy_dim; }
    int w(int l) const { return l * copy_dim; }  // coordinate of w^l, l = 0..d-1
    Frame base() const;                          // X = span{w^l}
    Frame window(int l) const;                   // E_l = w^l v F_l
    // Dense X_1 = Z, X_2 = X, X_3 = Y of the chain, joined over the copies.
    Frame joined(Role role) const;
};

FanOut build_fanout(int d, const std::vector<std::string>& eps, EtaRule rule = EtaRule::from_neighbors,
                    const std::vector<std::string>& eta = {});

struct FanOutRun {
    OrbitTrace trace;            // checkpoints of the whole direct sum
    std::vector<double> t;       // z0 = sum t_l w^l (+ rest)
    int alpha = 0;               // argmax |t_l|, lowest index on ties
    std::vector<std::vector<double>> copy_norms;  // per checkpoint, per copy
};

// Applies the chain schedule to every copy of z0; probes are taken in copy alpha.
FanOutRun run_fanout(const FanOut& f, const Eigen::VectorXd& z0, CheckpointPolicy policy);

// Non-Cauchy signature scaled by c = |t_alpha|: block-end norms at least
// c (1 - 4 sum eps) and block-end gaps at least c (sqrt 2 - bound_n - bound_{n+1}).
struct Signature {
    bool ok = false;
    double scale = 0;   // c
    double floor = 0;   // c / 2, the certified norm floor
    double min_norm = 0;
    double min_gap = 0;
    std::vector<std::string> failures;
};
Signature divergence_signature(const FanOutRun& run, const FanOut& f);

// Five subspaces X, Y, X_1, X_2, X_3. The pairing lives on the 2d-dimensional
// space spanned by the w^l and one vector f_l of each F_l.
struct FiveTuple {
    FanOut fan;
    std::vector<int> f;  // coordinate of f_l

    int paired_dim() const { return 2 * fan.d; }
    // Coordinates (t_1..t_d, s_1..s_d) on w^l, f_l to the ambient.
    Eigen::VectorXd embed(const Eigen::VectorXd& z) const;
    Frame x() const;
    Frame y() const;
};

FiveTuple build_five(int d, const std::vector<std::string>& eps, EtaRule rule = EtaRule::from_neighbors,
                     const std::vector<std::string>& eta = {});

struct DispatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DispatchResult {
    Eigen::VectorXd u0, v0;  // Xz and XYz
    bool u_run = false, v_run = false;
    FanOutRun u, v;
    Signature u_sig, v_sig;
    bool verdict = false;
};

// z in paired coordinates (length 2d), nonzero.
DispatchResult dispatch_and_run(const FiveTuple& five, const Eigen::VectorXd& z,
                                CheckpointPolicy policy = CheckpointPolicy::per_block);
json dispatch_json(const DispatchResult& r);

}  // namespace projlab
