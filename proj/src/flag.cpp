#include "projlab/flag.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace projlab {

int k_of_eps(const Real& eps) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    const Real target = 1 - eps;
    const Real tie("1e-40");
    const Real pi = real_pi();
    for (int k = 1; k < 100'000'000; ++k) {
        Real v = pow(cos(pi / (2 * k)), k);
        if (v - target > tie) return k;
    }
    throw std::invalid_argument("eps too small for k_of_eps");
}

int k_of_eps(double eps) { return k_of_eps(Real(eps)); }

QuarterCircle QuarterCircle::canonical(int k, int ambient_dim) {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (ambient_dim < k + 2) throw std::invalid_argument("ambient dimension below k+2");
    QuarterCircle qc;
    qc.k = k;
    qc.xi = real_pi() / (2 * k);
    qc.u = Eigen::VectorXd::Unit(ambient_dim, 0);
    qc.v = Eigen::VectorXd::Unit(ambient_dim, 1);
    for (int j = 0; j <= k; ++j) {
        Real t = qc.xi * j;
        qc.h.push_back(to_double(cos(t)) * qc.u + to_double(sin(t)) * qc.v);
    }
    for (int i = 0; i < k; ++i) qc.z.push_back(Eigen::VectorXd::Unit(ambient_dim, 2 + i));
    return qc;
}

void QuarterCircle::validate(double tol) const {
    if (static_cast<int>(h.size()) != k + 1 || static_cast<int>(z.size()) != k)
        throw std::invalid_argument("quarter circle has wrong point count");
    if (std::abs(u.norm() - 1) > tol || std::abs(v.norm() - 1) > tol || std::abs(u.dot(v)) > tol)
        throw std::invalid_argument("u, v not orthonormal");
    for (const auto& x : h)
        if (std::abs(x.norm() - 1) > tol) throw std::invalid_argument("h_j not unit");
    for (int i = 0; i < k; ++i) {
        if (std::abs(z[i].dot(u)) > tol || std::abs(z[i].dot(v)) > tol)
            throw std::invalid_argument("z_j not orthogonal to u, v");
        for (int l = 0; l < k; ++l)
            if (std::abs(z[i].dot(z[l]) - (i == l ? 1.0 : 0.0)) > tol)
                throw std::invalid_argument("z system not orthonormal");
    }
}

namespace {

constexpr int kMaxHalvings = 200;

using Vec2 = std::array<Real, 2>;

// M = I - sum_m delta_m q_m q_m^T with orthonormal q_m.
struct Modes {
    Real delta[2];
    Vec2 q[2];

    Vec2 apply_pow(const Real& e, const Vec2& y) const {
        Vec2 out{Real(0), Real(0)};
        for (int m = 0; m < 2; ++m) {
            Real f = delta[m] == 0 ? Real(1) : exp(e * log1p(-delta[m]));
            Real d = q[m][0] * y[0] + q[m][1] * y[1];
            out[0] += f * d * q[m][0];
            out[1] += f * d * q[m][1];
        }
        return out;
    }
    Real quad(const Vec2& y) const {  // y^T M y
        Real acc = y[0] * y[0] + y[1] * y[1];
        for (int m = 0; m < 2; ++m) {
            Real d = q[m][0] * y[0] + q[m][1] * y[1];
            acc -= delta[m] * d * d;
        }
        return acc;
    }
};

// (I+S)^-1 = adj/det with adj = [[xx, xy], [xy, yy]] positive definite.
Modes modes_from_adj(const Real& xx, const Real& xy, const Real& yy, const Real& det) {
    Real disc = sqrt((xx - yy) * (xx - yy) + 4 * xy * xy);
    Real lmax = (xx + yy + disc) / 2;
    Vec2 q;
    if (xy == 0) {
        q = xx >= yy ? Vec2{Real(1), Real(0)} : Vec2{Real(0), Real(1)};
    } else if (xx >= yy) {
        q = {lmax - yy, xy};
    } else {
        q = {xy, lmax - xx};
    }
    Real n = sqrt(q[0] * q[0] + q[1] * q[1]);
    q[0] /= n;
    q[1] /= n;
    Modes m;
    m.delta[0] = lmax / det;
    m.q[0] = q;
    m.delta[1] = 1 / lmax;  // lmin/det with lmax*lmin = det
    m.q[1] = {-q[1], q[0]};
    return m;
}

Modes modes_line(const Vec2& n, const Real& delta) {
    Modes m;
    m.delta[0] = delta;
    m.q[0] = n;
    m.delta[1] = 0;
    m.q[1] = {-n[1], n[0]};
    return m;
}

RealMatrix sym_sqrt(const RealMatrix& g, const Real& floor) {
    SymEigen e = jacobi_eigen(g, floor);
    const int n = g.rows;
    RealMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        if (e.values[k] <= 0) continue;
        Real w = sqrt(e.values[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j) += e.vectors(i, k) * w * e.vectors(j, k);
    }
    return out;
}

// ||T^T M^(r-1) T - h h^T|| with T = W X_j restricted to X_j and h = c in W,
// written as V^T diag(M^(r-1), -1) V with Gram matrix G = [[M, Mc], [c^T M, 1]].
Real display_norm(const Modes& m, const Vec2& c, const Real& rm1) {
    RealMatrix M = RealMatrix::identity(2), P(2, 2);
    for (int t = 0; t < 2; ++t) {
        Real f = m.delta[t] == 0 ? Real(1) : exp(rm1 * log1p(-m.delta[t]));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                M(i, j) -= m.delta[t] * m.q[t][i] * m.q[t][j];
                P(i, j) += f * m.q[t][i] * m.q[t][j];
            }
    }
    Vec2 mc{M(0, 0) * c[0] + M(0, 1) * c[1], M(1, 0) * c[0] + M(1, 1) * c[1]};
    RealMatrix G(3, 3);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) G(i, j) = M(i, j);
        G(i, 2) = G(2, i) = mc[i];
    }
    G(2, 2) = 1;
    const Real floor("1e-70");
    RealMatrix s = sym_sqrt(G, floor);
    RealMatrix C(3, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) C(i, j) = P(i, j);
    C(2, 2) = -1;
    RealMatrix H = s * C * s;
    SymEigen e = jacobi_eigen(H, floor);
    Real best = 0;
    for (const Real& x : e.values)
        if (abs(x) > best) best = abs(x);
    return best;
}

BigNat run_count(const Real& gap, const Real& bound) {
    Real x = log(bound) / log1p(-gap);
    return ceil_compact(floor(x) + 1);
}

NestedFlag construct(int k, const Real& eps, const Real& alpha0, const std::vector<int>* fixed) {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    if (!(alpha0 > 0 && alpha0 < 1)) throw std::invalid_argument("alpha_0 must lie in (0,1)");
    if (fixed && static_cast<int>(fixed->size()) != k) throw std::invalid_argument("halving list must have k entries");
    NestedFlag f;
    f.k = k;
    f.eps = eps;
    f.alpha0 = alpha0;
    f.xi = real_pi() / (2 * k);
    const Real bound = Real("0.9") * eps / k;
    std::vector<Vec2> c(k + 1), n(k + 1);
    for (int j = 0; j <= k; ++j) {
        Real t = f.xi * j;
        c[j] = {cos(t), sin(t)};
        n[j] = {-c[j][1], c[j][0]};
    }
    c[k] = {Real(0), Real(1)};
    n[k] = {Real(-1), Real(0)};

    // Running sums over i < j: adj(I+S) = I + sum n_i n_i^T / a_i^2, S itself,
    // tr S and det S = sum_{i<l} sin^2((l-i) xi) / (a_i a_l)^2.
    Real axx = 1, axy = 0, ayy = 1, sxx = 0, sxy = 0, syy = 0, trS = 0, detS = 0;
    auto add_term = [&](int i, const Real& a, const Real& cross) {
        Real w = 1 / (a * a);
        axx += w * n[i][0] * n[i][0];
        axy += w * n[i][0] * n[i][1];
        ayy += w * n[i][1] * n[i][1];
        sxx += w * c[i][0] * c[i][0];
        sxy += w * c[i][0] * c[i][1];
        syy += w * c[i][1] * c[i][1];
        trS += w;
        detS += w * cross;
    };

    f.alpha.push_back(alpha0);
    f.halvings.push_back(0);
    add_term(0, alpha0, Real(0));

    std::vector<Modes> modes(k + 1);
    f.basis = Eigen::MatrixXd::Zero(k + 2, k + 2);
    f.basis_uv.resize(k + 2);
    const bool keep_real = k + 2 <= kRealBasisLimit;
    if (keep_real) f.basis_real.assign(k + 2, std::vector<Real>(k + 2, Real(0)));
    auto put = [&](int row, int col, const Real& x) {
        f.basis(row, col) = to_double(x);
        if (keep_real) f.basis_real[col][row] = x;
    };
    {
        Real nrm = sqrt(1 + alpha0 * alpha0);
        f.basis_uv[0] = {1 / nrm, Real(0)};
        put(0, 0, 1 / nrm);
        put(2, 0, alpha0 / nrm);
    }

    for (int j = 1; j <= k; ++j) {
        // flag-adapted direction: residual of h_j + a_j z_j against X_{j-1}
        Real det_prev = 1 + trS + detS;
        Vec2 p{(axx * c[j][0] + axy * c[j][1]) / det_prev, (axy * c[j][0] + ayy * c[j][1]) / det_prev};
        Real cross = n[j][0] * n[j][0] * sxx + 2 * n[j][0] * n[j][1] * sxy + n[j][1] * n[j][1] * syy;
        Real gap = 1 / (1 + cross);
        f.gap.push_back(gap);
        BigNat r = run_count(gap, bound);
        f.r.push_back(r);
        const Real rm1 = to_real(r) - 1;

        Real a = 0;
        if (j < k) {
            bool found = false;
            int t_lo = fixed ? (*fixed)[j] : 1;
            int t_hi = fixed ? (*fixed)[j] : kMaxHalvings;
            for (int t = t_lo; t <= t_hi; ++t) {
                a = ldexp(f.alpha[j - 1], -t);
                Real w = 1 / (a * a);
                Real det = 1 + trS + w + detS + w * cross;
                Modes m = modes_from_adj(axx + w * n[j][0] * n[j][0], axy + w * n[j][0] * n[j][1],
                                         ayy + w * n[j][1] * n[j][1], det);
                Real dn = display_norm(m, c[j], rm1);
                if (dn < bound || fixed) {
                    found = true;
                    f.halvings.push_back(t);
                    f.alpha.push_back(a);
                    f.display.push_back(dn);
                    modes[j] = m;
                    break;
                }
            }
            if (!found)
                throw FlagError("alpha halving search exceeded " + std::to_string(kMaxHalvings) +
                                " steps at j = " + std::to_string(j));
        } else {
            modes[j] = modes_line(n[k], gap);
            f.display.push_back(display_norm(modes[j], c[k], rm1));
        }

        Real nrm2 = c[j][0] * p[0] + c[j][1] * p[1] + a * a;
        Real nrm = sqrt(nrm2);
        f.basis_uv[j] = {p[0] / nrm, p[1] / nrm};
        put(0, j, p[0] / nrm);
        put(1, j, p[1] / nrm);
        for (int i = 0; i < j; ++i) {
            Real ci = c[i][0] * p[0] + c[i][1] * p[1];
            put(2 + i, j, -ci / (f.alpha[i] * nrm));
        }
        if (j < k) {
            put(2 + j, j, a / nrm);
            add_term(j, a, cross);
        }
    }
    {
        Real nrm2 = 1;
        for (int i = 0; i < k; ++i) nrm2 += c[i][0] * c[i][0] / (f.alpha[i] * f.alpha[i]);
        Real nrm = sqrt(nrm2);
        f.basis_uv[k + 1] = {1 / nrm, Real(0)};
        put(0, k + 1, 1 / nrm);
        for (int i = 0; i < k; ++i) put(2 + i, k + 1, -c[i][0] / (f.alpha[i] * nrm));
    }

    // phi(W, X_1..X_k) u: the input to run j seen from W is b_j, with
    // b_1 = M_1 u and b_{j+1} = M_j^r(j) b_j; the output is T_k^T M_k^(r(k)-1) b_k.
    Vec2 b{Real(1), Real(0)};
    b = modes[1].apply_pow(Real(1), b);
    for (int j = 1; j < k; ++j) b = modes[j].apply_pow(to_real(f.r[j - 1]), b);
    Vec2 y = modes[k].apply_pow(to_real(f.r[k - 1]) - 1, b);
    Real e2 = modes[k].quad(y) - 2 * y[1] + 1;
    f.error = e2 > 0 ? sqrt(e2) : Real(0);

    std::vector<PowerWord::Factor> factors;
    const int alphabet = k + 1;
    for (int j = k; j >= 1; --j) {
        PowerWord inner = concat(concat(PowerWord::letter(alphabet, j + 1), PowerWord::letter(alphabet, 1)),
                                 PowerWord::letter(alphabet, j + 1));
        factors.push_back({std::make_shared<const PowerWord>(inner), f.r[j - 1]});
    }
    f.phi = PowerWord(alphabet, std::move(factors));
    return f;
}

Eigen::VectorXd embed(const Eigen::VectorXd& coords, const QuarterCircle& qc) {
    Eigen::VectorXd x = coords(0) * qc.u + coords(1) * qc.v;
    for (int i = 0; i < qc.k; ++i) x += coords(2 + i) * qc.z[i];
    return x;
}

}  // namespace

Frame NestedFlag::x_frame(int j, const QuarterCircle& qc) const {
    if (j < 0 || j > k + 1) throw std::out_of_range("flag index");
    Eigen::MatrixXd cols(qc.ambient_dim(), j + 1);
    for (int t = 0; t <= j; ++t) cols.col(t) = embed(basis.col(t), qc);
    return Frame(qc.ambient_dim(), cols);
}

Frame NestedFlag::x_prime_frame(int j, const QuarterCircle& qc) const {
    std::vector<Eigen::VectorXd> g;
    for (int i = 0; i < j; ++i) g.push_back(qc.h[i] + to_double(alpha[i]) * qc.z[i]);
    g.push_back(qc.h[j]);
    return orthonormalize(g, 1e-10, qc.ambient_dim());
}

NestedFlag build_nested_flag(const QuarterCircle& qc, const Real& eps, const Real& alpha0) {
    qc.validate();
    return construct(qc.k, eps, alpha0, nullptr);
}

NestedFlag rebuild_nested_flag(int k, const Real& eps, const Real& alpha0, const std::vector<int>& halvings) {
    return construct(k, eps, alpha0, &halvings);
}

}  // namespace projlab
