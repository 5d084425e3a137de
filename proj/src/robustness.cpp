#include "projlab/block.hpp"
#include "projlab/run_kernel.hpp"

#include <random>
#include <stdexcept>

namespace projlab {

namespace {

using RVec = std::vector<Real>;

Real rdot(const RVec& a, const RVec& b) {
    Real acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

RVec to_rvec(const Eigen::VectorXd& v) {
    RVec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
    return out;
}

Eigen::VectorXd to_dvec(const RVec& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = to_double(v[i]);
    return out;
}

std::vector<RVec> columns_of(const Frame& f) {
    std::vector<RVec> out;
    for (int i = 0; i < f.rank(); ++i) out.push_back(to_rvec(f.columns.col(i)));
    return out;
}

// Modified Gram-Schmidt, twice; drops residuals below drop (relative to the input norm).
std::vector<RVec> gram_schmidt(const std::vector<RVec>& in, const Real& drop) {
    std::vector<RVec> out;
    for (RVec v : in) {
        Real n0 = sqrt(rdot(v, v));
        if (n0 == 0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const RVec& q : out) {
                Real c = rdot(q, v);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
            }
        Real n = sqrt(rdot(v, v));
        if (n <= drop * n0) continue;
        for (Real& x : v) x /= n;
        out.push_back(std::move(v));
    }
    return out;
}

RealMatrix gram(const std::vector<RVec>& a, const std::vector<RVec>& b) {
    RealMatrix g(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = rdot(a[i], b[j]);
    return g;
}

RealMatrix spd_function(const RealMatrix& m, Real (*fn)(const Real&)) {
    SymEigen e = jacobi_eigen(m);
    const int n = m.rows;
    RealMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        Real w = fn(e.values[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j) += e.vectors(i, k) * w * e.vectors(j, k);
    }
    return out;
}

Real inv_fn(const Real& x) { return 1 / x; }
Real sqrt_fn(const Real& x) { return x > 0 ? sqrt(x) : Real(0); }

// ||B B^T - F G^-1 F^T P_E|| with B = [u v], written as L C R^T and reduced
// to the q x q problem eig(S^1/2 (R^T R) S^1/2), S = C L^T L C.
Real distance_real(const std::vector<RVec>& wcols, const std::vector<RVec>& zcols, const std::vector<RVec>& ecols) {
    const std::size_t dim = wcols[0].size();
    std::vector<RVec> L = wcols, R = wcols;
    for (const RVec& f : zcols) {
        L.push_back(f);
        RVec pf(dim, Real(0));
        for (const RVec& e : ecols) {
            Real c = rdot(e, f);
            for (std::size_t i = 0; i < dim; ++i) pf[i] += c * e[i];
        }
        R.push_back(pf);
    }
    const int q = static_cast<int>(L.size()), nw = static_cast<int>(wcols.size());
    RealMatrix ginv = spd_function(gram(zcols, zcols), inv_fn);
    RealMatrix C(q, q);
    for (int i = 0; i < nw; ++i) C(i, i) = 1;
    for (int i = nw; i < q; ++i)
        for (int j = nw; j < q; ++j) C(i, j) = -ginv(i - nw, j - nw);
    RealMatrix S = C * gram(L, L) * C;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) S(i, j) = S(j, i) = (S(i, j) + S(j, i)) / 2;
    RealMatrix sh = spd_function(S, sqrt_fn);
    RealMatrix M = sh * gram(R, R) * sh;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) M(i, j) = M(j, i) = (M(i, j) + M(j, i)) / 2;
    SymEigen e = jacobi_eigen(M);
    Real top = e.values.back();
    return top > 0 ? sqrt(top) : Real(0);
}

}  // namespace

Real window_distance(const Frame& z, const Frame& e) {
    std::vector<RVec> ecols = gram_schmidt(columns_of(e), Real(0));
    std::vector<RVec> w{ecols[0], ecols[1]};
    return distance_real(w, columns_of(z), ecols);
}

RobustnessResult verify_block_robustness(const BlockCertificate& c, const Frame& z, const Frame& xp, const Frame& yp,
                                         const Frame& e) {
    if (e.rank() != c.e_dim) throw std::invalid_argument("E must have the block's dimension");
    if (c.flag.basis_real.empty()) throw std::domain_error("block too large for the extended-precision robustness path");
    for (const BigNat& r : c.flag.r)
        if (r.bit_length() > 150) throw std::domain_error("run exponents exceed the working precision");
    const int dim = e.ambient_dim;
    for (const Frame* f : {&xp, &yp}) {
        double worst = f->rank() ? (e.columns.transpose() * f->columns).cwiseAbs().maxCoeff() : 0.0;
        if (worst > 1e-9) throw PreconditionError("perturbation subspace not orthogonal to E", worst);
    }
    std::vector<RVec> ecols = gram_schmidt(columns_of(e), Real(0));
    std::vector<RVec> zcols = columns_of(z);
    std::vector<RVec> wcols{ecols[0], ecols[1]};
    RobustnessResult res;
    res.distance = distance_real(wcols, zcols, ecols);
    res.distance_over_delta = to_double(res.distance / c.delta);
    if (!(res.distance < c.delta))
        throw PreconditionError("||W - Z P_E|| is not below delta", to_double(res.distance));

    // levels of b: flag-adapted basis of X, then eigen-directions of X'Y'X'
    struct Lv {
        RVec f;
        Real log_mu;
    };
    std::vector<Lv> levels;
    const int n = c.k + 2;
    for (int t = 0; t < n; ++t) {
        RVec f(dim, Real(0));
        for (int i = 0; i < n; ++i) {
            const Real& coef = c.flag.basis_real[t][i];
            if (coef == 0) continue;
            for (int d = 0; d < dim; ++d) f[d] += coef * ecols[i][d];
        }
        levels.push_back({std::move(f), c.reduction.log_mu(t)});
    }
    if (xp.rank() > 0 && yp.rank() > 0) {
        std::vector<RVec> xq = gram_schmidt(columns_of(xp), Real("1e-30"));
        std::vector<RVec> yq = gram_schmidt(columns_of(yp), Real("1e-30"));
        RealMatrix xy = gram(xq, yq);
        RealMatrix m = xy * transpose(xy);
        SymEigen ev = jacobi_eigen(m);
        for (int i = 0; i < m.rows; ++i) {
            Real mu = ev.values[i];
            if (mu < Real("1e-30")) continue;  // orthogonal to Y': outside range(b)
            RVec f(dim, Real(0));
            for (int a = 0; a < m.rows; ++a)
                for (int d = 0; d < dim; ++d) f[d] += ev.vectors(a, i) * xq[a][d];
            levels.push_back({std::move(f), mu >= 1 - Real("1e-12") ? Real(0) : log(mu)});
        }
    }
    // ports: orthonormal basis of P_C Z
    std::vector<RVec> pcz;
    for (const RVec& zc : zcols) {
        RVec p(dim, Real(0));
        for (const Lv& lv : levels) {
            Real cf = rdot(lv.f, zc);
            for (int d = 0; d < dim; ++d) p[d] += cf * lv.f[d];
        }
        pcz.push_back(std::move(p));
    }
    std::vector<RVec> ports = gram_schmidt(pcz, Real("1e-30"));
    const int p = static_cast<int>(ports.size());
    RealMatrix ginv = spd_function(gram(zcols, zcols), inv_fn);
    RealMatrix pz = gram(ports, zcols);
    RealMatrix pcp = pz * ginv * transpose(pz);
    RunGeometry g;
    g.dim = dim;
    g.ports = p;
    g.defect = RealMatrix(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) g.defect(a, b) = (a == b ? Real(1) : Real(0)) - (pcp(a, b) + pcp(b, a)) / 2;
    for (const Lv& lv : levels) {
        RunLevel rl;
        rl.f = SparseVec::dense(to_dvec(lv.f));
        for (const RVec& q : ports) rl.port.push_back(rdot(q, lv.f));
        rl.log_mu = lv.log_mu;
        g.levels.push_back(std::move(rl));
    }
    Eigen::VectorXd x = to_dvec(ecols[0]);
    for (int j = 1; j <= c.k; ++j) x = build_run(g, c.reduction.s[j - 1], c.flag.r[j - 1]).apply(x);
    res.error = (x - to_dvec(ecols[1])).norm();
    res.holds = res.error < 0.9 * 4 * to_double(c.eps);
    return res;
}

std::vector<RobustnessResult> robustness_trials(const BlockCertificate& c, int trials, std::uint64_t seed,
                                                int extra_dims) {
    const int n = c.e_dim, dim = n + extra_dims;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.9, 0.999);
    Frame e(dim, Eigen::MatrixXd::Identity(dim, n));
    auto extra_vec = [&] {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        for (int i = n; i < dim; ++i) v(i) = gauss(rng);
        return Eigen::VectorXd(v.normalized());
    };
    auto full_vec = [&] {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
        return Eigen::VectorXd(v.normalized());
    };
    const Eigen::VectorXd u = Eigen::VectorXd::Unit(dim, 0), v = Eigen::VectorXd::Unit(dim, 1);
    const double delta = to_double(c.delta);
    std::vector<RobustnessResult> out;
    for (int t = 0; t < trials; ++t) {
        Frame xp = orthonormalize(std::vector<Eigen::VectorXd>{extra_vec(), extra_vec()}, 1e-10, dim);
        Frame yp = orthonormalize(std::vector<Eigen::VectorXd>{extra_vec(), extra_vec()}, 1e-10, dim);
        Eigen::VectorXd p1 = full_vec(), p2 = full_vec(), z3 = extra_vec();
        auto make_z = [&](double theta) {
            Eigen::MatrixXd cols(dim, 3);
            cols.col(0) = u + theta * p1;
            cols.col(1) = v + theta * p2;
            cols.col(2) = z3;
            return Frame(dim, cols);
        };
        double target = unif(rng) * delta;
        double probe = delta;
        double m = to_double(window_distance(make_z(probe), e));
        double theta = m > 0 ? probe * target / m : probe;
        Frame z = make_z(theta);
        while (!(window_distance(z, e) < c.delta)) {
            theta *= 0.99;
            z = make_z(theta);
        }
        out.push_back(verify_block_robustness(c, z, xp, yp, e));
    }
    return out;
}

}  // namespace projlab
