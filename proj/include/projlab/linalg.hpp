#pragma once

#include "projlab/bignat.hpp"
#include "projlab/json_io.hpp"
#include "projlab/trace.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace projlab {

// Orthonormal spanning set of a subspace of R^ambient_dim.
struct Frame {
    int ambient_dim = 0;
    Eigen::MatrixXd columns;  // ambient_dim x rank

    Frame() = default;
    Frame(int d, Eigen::MatrixXd cols);
    static Frame empty(int d) { return Frame(d, Eigen::MatrixXd(d, 0)); }
    int rank() const { return static_cast<int>(columns.cols()); }
    // Throws when columns are not orthonormal within tol.
    void validate(double tol = 1e-10) const;
};

struct Projector {
    Eigen::MatrixXd matrix;
    std::optional<Frame> source_frame;

    int dim() const { return static_cast<int>(matrix.rows()); }
    void validate(double tol = 1e-9) const;
};

struct PrincipalAngleData {
    std::vector<double> cosines;  // nonincreasing
};

// Modified Gram-Schmidt with one re-orthogonalization pass; inputs are
// normalized first and dropped when the residual falls below tol.
Frame orthonormalize(const std::vector<Eigen::VectorXd>& vectors, double tol = 1e-10, int ambient_dim = -1);
Frame orthonormalize(const Eigen::MatrixXd& columns, double tol = 1e-10);
Frame join(const std::vector<Frame>& frames, double tol = 1e-10);

Projector projector(const Frame& f);
double operator_norm(const Eigen::MatrixXd& m);
PrincipalAngleData principal_angles(const Frame& a, const Frame& b);
double projector_distance(const Projector& p, const Projector& q);

// Repeated squaring; matrix_power rejects non-contractions.
Eigen::MatrixXd power_by_squaring(const Eigen::MatrixXd& m, const BigNat& e);
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, const BigNat& e, double tol = 1e-9);

struct AlternatingResult {
    Eigen::MatrixXd limit;
    int iterations = 0;  // squarings of PQP
    bool capped = false;
};
AlternatingResult alternating_limit(const Projector& p, const Projector& q, double tol, int cap = 200);

// Projector onto the common range, from the null space of sum (I - P_i).
Eigen::MatrixXd intersection_projector(const std::vector<Projector>& ps, double tol = 1e-10);

struct PeriodicRun {
    OrbitTrace trace;  // one checkpoint per period
    Eigen::VectorXd limit;
    double distance_to_intersection = 0;
    long periods = 0;
    bool capped = false;
};
// Applies the period's projections (first index acts first) until two
// consecutive period ends differ by less than tol.
PeriodicRun periodic_product_run(const std::vector<Projector>& subspaces, const std::vector<int>& period,
                                 const Eigen::VectorXd& z0, double tol, long cap = 100000);

json to_json(const Frame& f);
Frame frame_from_json(const json& j);
json to_json(const Projector& p);
Projector projector_from_json(const json& j);

}  // namespace projlab
