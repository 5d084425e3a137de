#pragma once

#include "projlab/block.hpp"
#include "projlab/run_kernel.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace projlab {

// Global coordinates: 0..m are the ports e_1..e_{m+1}; each block then
// owns the e_dim - 2 remaining coordinates of its window E_i.
struct ChainGeometry {
    int m = 0;
    int dim = 0;
    std::vector<int> offset;  // offset[i-1]: first private coordinate of block i
    std::vector<int> window_dim;

    // Global coordinate of local block coordinate `local` of block i (1-based).
    int global(int i, int local) const { return local < 2 ? i - 1 + local : offset[i - 1] + local - 2; }
    std::vector<int> window(int i) const;
    Frame window_frame(int i) const;
};

struct ChainError : std::runtime_error {
    int block;
    ChainError(const std::string& what, int b) : std::runtime_error(what), block(b) {}
};

enum class EtaRule { from_neighbors, explicit_values };

struct GluedTriple {
    ChainGeometry geometry;
    std::vector<std::string> eps_texts, eta_texts;
    std::vector<BlockCertificate> blocks;  // blocks[i-1] is block i
    // Psi_i over (a1, a2, a3) = (Z, X, Y): psi_i for even i, a1 <-> a3 for odd i.
    std::vector<PowerWord> schedule;
    bool terminal_in_y = false;  // e_{m+1} joins Y when m + 1 is even, else Z

    std::vector<Real> window_distance;  // ||W_i - R P_{E_i}||, R = Z (even i) or Y (odd i)
    std::vector<Real> window_bound;     // ||X_{i-1} - Y_{i-1}|| + ||X_{i+1} - Y_{i+1}||
    std::vector<double> block_errors;   // ||Psi_i(Z, X, Y) e_i - e_{i+1}||
    bool preconditions_hold = false;

    int m() const { return geometry.m; }
    Eigen::VectorXd port(int a, int dim = 0) const;  // e_a, 1-based
};

// eps must be decreasing in (0, 1). With EtaRule::from_neighbors,
// eta_i = min(delta_{i-1}, delta_{i+1}) / 2 with delta_0 = 1 and delta_{m+1}
// ignored, rounded down to 17 digits. Throws ChainError naming the block
// whose certificate fails, or (neighbor rule only) whose window
// precondition fails.
GluedTriple build_chain(const std::vector<std::string>& eps, EtaRule rule = EtaRule::from_neighbors,
                        const std::vector<std::string>& eta = {});
std::vector<std::string> geometric_eps_schedule(int m, int base);

// Dense frames of X, Y, Z; refused above max_dim.
enum class Role { X, Y, Z };
Frame chain_frame(const GluedTriple& t, Role role, int max_dim = 4096);

// Levels and port defect of the runs of blocks with the given parity.
RunGeometry parity_geometry(const GluedTriple& t, int parity, int dim);

enum class CheckpointPolicy { per_run, per_block };

// The orbit's run operators in order, for an ambient of the given dimension.
struct ChainProgram {
    int dim = 0;
    std::vector<RunOperator> runs;
    std::vector<int> block, run;    // block i and run j of each entry
    std::vector<BigNat> position;   // letters applied after each entry
};
ChainProgram compile_chain(const GluedTriple& t, int dim = 0);
OrbitTrace run_program(const ChainProgram& prog, const GluedTriple& t, const Eigen::VectorXd& z0,
                       CheckpointPolicy policy);

// z0 may carry extra coordinates beyond the chain dimension; they lie
// outside every window.
OrbitTrace run_orbit(const GluedTriple& t, const Eigen::VectorXd& z0, CheckpointPolicy policy);

// Checks on a trace started at e_1: block-end errors, norm floor, non-Cauchy
// gaps between block ends, weak probes, norm monotonicity and positions.
VerifyReport verify_divergence(const OrbitTrace& trace, const GluedTriple& t);

json chain_json(const GluedTriple& t);

}  // namespace projlab
