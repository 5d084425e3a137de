#pragma once

#include "projlab/bignat.hpp"
#include "projlab/real.hpp"

#include <Eigen/Dense>

#include <vector>

namespace projlab {

// Sparse D-vector: explicit support and values.
struct SparseVec {
    std::vector<int> index;
    std::vector<double> value;

    static SparseVec dense(const Eigen::VectorXd& v);
    Eigen::VectorXd to_dense(int dim) const;
    double dot(const Eigen::VectorXd& x) const;
    void axpy(double a, Eigen::VectorXd& y) const;  // y += a*this
};

// One eigen-direction f of a positive operator B with B f = mu f. Powers of B
// are taken as exp(s*log_mu); log_mu = 0 marks a fixed direction.
struct RunLevel {
    SparseVec f;
    std::vector<Real> port;  // components of f along each port, relatively accurate
    Real log_mu;
};

// Everything about (b c b)^r that does not depend on the exponents: the
// levels of b (an orthonormal basis of range(b)), the ports (an orthonormal
// basis of range(P_C c P_C) inside C = range(b)) and the port defect
// Dc = I - Pi^T c Pi, kept in Real because its entries are tiny.
struct RunGeometry {
    int dim = 0;
    int ports = 0;
    std::vector<RunLevel> levels;
    RealMatrix defect;
};

// The run (b c b)^r with b = B^s, stored as x -> A K A^T x (A is D x p).
struct RunOperator {
    Eigen::MatrixXd A;
    Eigen::MatrixXd K;
    // Eigenvalues of Ms, ascending; each port mode contracts by 1 - lambda per step.
    std::vector<Real> lambdas;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

RunOperator build_run(const RunGeometry& g, const BigNat& s, const BigNat& r);

// Symmetric square root of I - D for a symmetric positive semidefinite D with ||D|| < 1.
RealMatrix sqrt_one_minus(const RealMatrix& d);

}  // namespace projlab
