#include "projlab/run_kernel.hpp"

#include <stdexcept>

namespace projlab {

SparseVec SparseVec::dense(const Eigen::VectorXd& v) {
    SparseVec out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) != 0) {
            out.index.push_back(static_cast<int>(i));
            out.value.push_back(v(i));
        }
    return out;
}

Eigen::VectorXd SparseVec::to_dense(int dim) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < index.size(); ++i) v(index[i]) = value[i];
    return v;
}

double SparseVec::dot(const Eigen::VectorXd& x) const {
    double acc = 0;
    for (std::size_t i = 0; i < index.size(); ++i) acc += value[i] * x(index[i]);
    return acc;
}

void SparseVec::axpy(double a, Eigen::VectorXd& y) const {
    for (std::size_t i = 0; i < index.size(); ++i) y(index[i]) += a * value[i];
}

Eigen::VectorXd RunOperator::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd t = A.transpose() * x;
    return A * (K * t);
}

RealMatrix sqrt_one_minus(const RealMatrix& d) {
    SymEigen e = jacobi_eigen(d);
    const int p = d.rows;
    RealMatrix out(p, p);
    for (int k = 0; k < p; ++k) {
        Real w = sqrt(1 - e.values[k]);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) out(i, j) += e.vectors(i, k) * w * e.vectors(j, k);
    }
    return out;
}

// With G = Pi^T b^2 Pi = I - R and K = I - Dc, the run is
// b Pi L (I - Ms)^(r-1) L Pi^T b where L = K^(1/2) and Ms = Dc + L R L.
RunOperator build_run(const RunGeometry& g, const BigNat& s, const BigNat& r) {
    if (r.is_zero()) throw std::invalid_argument("run exponent must be positive");
    const int p = g.ports;
    const Real sr = to_real(s);
    RealMatrix R(p, p);
    std::vector<Eigen::VectorXd> bpi(p, Eigen::VectorXd::Zero(g.dim));
    for (const RunLevel& lv : g.levels) {
        if (static_cast<int>(lv.port.size()) != p) throw std::invalid_argument("level port count mismatch");
        Real x = sr * lv.log_mu;
        Real rho = exp(x);
        Real om = -expm1(2 * x);
        for (int a = 0; a < p; ++a) {
            if (lv.port[a] == 0) continue;
            for (int b = 0; b < p; ++b) R(a, b) += om * lv.port[a] * lv.port[b];
        }
        double rd = to_double(rho);
        if (rd == 0) continue;
        for (int a = 0; a < p; ++a) {
            double c = to_double(rho * lv.port[a]);
            if (c != 0) lv.f.axpy(c, bpi[a]);
        }
    }
    RealMatrix L = sqrt_one_minus(g.defect);
    RealMatrix Ms = L * R * L;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) Ms(i, j) += g.defect(i, j);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) Ms(i, j) = Ms(j, i) = (Ms(i, j) + Ms(j, i)) / 2;
    SymEigen e = jacobi_eigen(Ms);
    const Real rm1 = to_real(r) - 1;
    RunOperator out;
    out.lambdas = e.values;
    out.K = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < p; ++k) {
        Real lam = e.values[k];
        if (lam < 0) lam = 0;
        Real w = rm1 == 0 ? Real(1) : (lam >= 1 ? Real(0) : exp(rm1 * log1p(-lam)));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) out.K(i, j) += to_double(e.vectors(i, k) * w * e.vectors(j, k));
    }
    Eigen::MatrixXd Ld(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) Ld(i, j) = to_double(L(i, j));
    Eigen::MatrixXd B(g.dim, p);
    for (int a = 0; a < p; ++a) B.col(a) = bpi[a];
    out.A = B * Ld;
    return out;
}

}  // namespace projlab
