#include "projlab/block.hpp"

#include <cmath>
#include <stdexcept>

namespace projlab {

namespace {

const Real kSafety("0.9");

PowerWord block_word(const NestedFlag& flag, const TwoSpaceReduction& red) {
    const PowerWord a1 = PowerWord::letter(3, 1), a2 = PowerWord::letter(3, 2), a3 = PowerWord::letter(3, 3);
    const PowerWord xyx = concat(concat(a2, a3), a2);
    std::vector<PowerWord::Factor> fs;
    for (int j = flag.k; j >= 1; --j) {
        PowerWord b = power(xyx, red.s[j - 1]);
        PowerWord run = concat(concat(b, a1), b);
        fs.push_back({std::make_shared<const PowerWord>(run), flag.r[j - 1]});
    }
    return PowerWord(3, std::move(fs));
}

// Fills everything that follows from (eps, eta, alpha0, a) and the two
// halving lists.
void finish(BlockCertificate& c) {
    c.k = c.flag.k;
    c.e_dim = 2 * c.k + 4;
    c.psi = block_word(c.flag, c.reduction);
    c.N = c.psi.occurrences(1);
    c.delta = c.eps / to_real(c.N);
    static const BigNat limit = BigNat::parse("1" + std::string(4096, '0'));
    c.spectral_only = false;
    for (const BigNat& s : c.reduction.s)
        if (s > limit) c.spectral_only = true;
    c.achieved_error = block_error(c, &c.run_errors);
    c.frames_embedded = c.e_dim <= kMaxEmbeddedDim;
    if (c.frames_embedded) {
        c.x_frame = block_x_frame(c);
        c.y_frame = block_y_frame(c);
    } else {
        c.x_frame = Frame();
        c.y_frame = Frame();
    }
}

BigNat phi_length_of(const NestedFlag& f) {
    BigNat n(0u);
    for (const BigNat& r : f.r) n += r * BigNat(3u);
    return n;
}

}  // namespace

bool BlockCertificate::holds() const {
    if (!(flag.error < kSafety * 2 * eps)) return false;
    for (const Real& d : flag.display)
        if (!(d < kSafety * eps / k)) return false;
    for (const Real& e : reduction.flag_error)
        if (!(e < kSafety * eps_prime)) return false;
    if (!(reduction.distance < kSafety * eta)) return false;
    if (!(reduction.min_gamma > 0)) return false;
    if (!(achieved_error < kSafety * 3 * eps)) return false;
    if (!(delta * to_real(N) <= eps * (1 + Real("1e-50")))) return false;
    return true;
}

Real block_error(const BlockCertificate& c, std::vector<Real>* run_errors) {
    const int k = c.k, n = k + 2;
    const NestedFlag& f = c.flag;
    const TwoSpaceReduction& red = c.reduction;
    std::vector<Real> lg(n);
    for (int t = 0; t < n; ++t) lg[t] = log1p(red.gamma[t] * red.gamma[t]);
    std::vector<Real> x(n), rho(n);
    for (int t = 0; t < n; ++t) x[t] = f.basis_uv[t][0];
    if (run_errors) run_errors->clear();
    for (int j = 1; j <= k; ++j) {
        const Real s = to_real(red.s[j - 1]);
        RealMatrix R(2, 2);
        for (int t = 0; t < n; ++t) {
            Real e = s * lg[t];
            rho[t] = exp(-e);
            Real om = -expm1(-2 * e);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) R(a, b) += om * f.basis_uv[t][a] * f.basis_uv[t][b];
        }
        R(0, 1) = R(1, 0) = (R(0, 1) + R(1, 0)) / 2;
        SymEigen e = jacobi_eigen(R);
        const Real rm1 = to_real(f.r[j - 1]) - 1;
        Real K[2][2] = {{0, 0}, {0, 0}};
        for (int m = 0; m < 2; ++m) {
            Real lam = e.values[m] < 0 ? Real(0) : e.values[m];
            Real w = rm1 == 0 ? Real(1) : exp(rm1 * log1p(-lam));
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) K[a][b] += e.vectors(a, m) * w * e.vectors(b, m);
        }
        Real y[2] = {0, 0};
        for (int t = 0; t < n; ++t)
            for (int a = 0; a < 2; ++a) y[a] += rho[t] * f.basis_uv[t][a] * x[t];
        Real z[2] = {K[0][0] * y[0] + K[0][1] * y[1], K[1][0] * y[0] + K[1][1] * y[1]};
        for (int t = 0; t < n; ++t) x[t] = rho[t] * (f.basis_uv[t][0] * z[0] + f.basis_uv[t][1] * z[1]);
        if (run_errors) {
            Real cj = j == k ? Real(0) : cos(f.xi * j), sj = j == k ? Real(1) : sin(f.xi * j);
            Real acc = 0;
            for (int t = 0; t < n; ++t) {
                Real d = x[t] - (cj * f.basis_uv[t][0] + sj * f.basis_uv[t][1]);
                acc += d * d;
            }
            run_errors->push_back(sqrt(acc));
        }
    }
    Real acc = 0;
    for (int t = 0; t < n; ++t) {
        Real d = x[t] - f.basis_uv[t][1];
        acc += d * d;
    }
    return sqrt(acc);
}

Frame block_x_frame(const BlockCertificate& c) {
    const int n = c.k + 2;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(c.e_dim, n);
    cols.topRows(n) = c.flag.basis;
    if (c.embedding.size()) return Frame(static_cast<int>(c.embedding.rows()), c.embedding * cols);
    return Frame(c.e_dim, cols);
}

Frame block_y_frame(const BlockCertificate& c) {
    const int n = c.k + 2;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(c.e_dim, n);
    for (int t = 0; t < n; ++t) {
        const Real& g = c.reduction.gamma[t];
        Real nrm = sqrt(1 + g * g);
        cols.col(t).head(n) = c.flag.basis.col(t) * to_double(1 / nrm);
        cols(n + t, t) = to_double(g / nrm);
    }
    if (c.embedding.size()) return Frame(static_cast<int>(c.embedding.rows()), c.embedding * cols);
    return Frame(c.e_dim, cols);
}

BlockCertificate build_block(const std::string& eps_text, const std::string& eta_text,
                             const std::string& alpha0_text, const BigNat& a) {
    const Real eps = parse_real(eps_text);
    const int k = k_of_eps(eps);
    return build_block(build_nested_flag(QuarterCircle::canonical(k, k + 2), eps, parse_real(alpha0_text)), eps_text,
                       eta_text, alpha0_text, a);
}

BlockCertificate build_block(NestedFlag flag, const std::string& eps_text, const std::string& eta_text,
                             const std::string& alpha0_text, const BigNat& a) {
    BlockCertificate c;
    c.eps_text = eps_text;
    c.eta_text = eta_text;
    c.alpha0_text = alpha0_text;
    c.eps = parse_real(eps_text);
    c.eta = parse_real(eta_text);
    c.alpha0 = parse_real(alpha0_text);
    const int k = flag.k;
    c.flag = std::move(flag);
    c.phi_length = phi_length_of(c.flag);
    c.eps_prime = c.eps / to_real(c.phi_length);
    c.reduction = build_two_space_reduction(c.flag, k + 2, 2 * k + 4, c.eps_prime, c.eta, a);
    finish(c);
    return c;
}

BigNat flag_wall_count(const NestedFlag& flag) {
    BigNat n(0u);
    for (const BigNat& r : flag.r) n += r;
    return n;
}

BlockCertificate build_block(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const std::string& eps_text,
                             const std::string& eta_text, const Frame& e) {
    if (u.size() != e.ambient_dim || v.size() != e.ambient_dim) throw std::invalid_argument("u, v dimension mismatch");
    if (std::abs(u.norm() - 1) > 1e-8 || std::abs(v.norm() - 1) > 1e-8) throw std::invalid_argument("u, v must be unit");
    if (std::abs(u.dot(v)) > 1e-8) throw std::invalid_argument("u and v are not orthogonal (|<u,v>| > 1e-8)");
    Eigen::MatrixXd pe = e.columns * e.columns.transpose();
    if ((pe * u - u).norm() > 1e-9 || (pe * v - v).norm() > 1e-9) throw std::invalid_argument("u, v not in span(E)");
    const int k = k_of_eps(parse_real(eps_text));
    if (e.rank() < 2 * k + 4)
        throw std::invalid_argument("rank(E) = " + std::to_string(e.rank()) + " below 2(k+2) = " +
                                    std::to_string(2 * k + 4));
    std::vector<Eigen::VectorXd> vecs{u, v};
    for (int i = 0; i < e.rank(); ++i) vecs.push_back(e.columns.col(i));
    Frame basis = orthonormalize(vecs, 1e-10, e.ambient_dim);
    BlockCertificate c = build_block(eps_text, eta_text);
    c.embedding = basis.columns.leftCols(c.e_dim);  // columns 0, 1 are u and v
    if (c.frames_embedded) {
        c.x_frame = block_x_frame(c);
        c.y_frame = block_y_frame(c);
    }
    return c;
}

namespace {

json real_list(const std::vector<Real>& xs) {
    json out = json::array();
    for (const Real& x : xs) out.push_back(format_real(x));
    return out;
}

json nat_list(const std::vector<BigNat>& xs) {
    json out = json::array();
    for (const BigNat& x : xs) out.push_back(x.to_string());
    return out;
}

}  // namespace

json to_json(const BlockCertificate& c) {
    json j;
    j["type"] = "block_certificate";
    j["eps"] = c.eps_text;
    j["eta"] = c.eta_text;
    j["alpha0"] = c.alpha0_text;
    j["a"] = c.reduction.a.to_string();
    j["k"] = c.k;
    j["e_dim"] = c.e_dim;
    j["xi"] = format_real(c.flag.xi);
    j["alpha_halvings"] = c.flag.halvings;
    j["log2_alpha"] = [&] {
        json out = json::array();
        for (const Real& a : c.flag.alpha) out.push_back(format_double(log2(a).convert_to<double>()));
        return out;
    }();
    j["r"] = nat_list(c.flag.r);
    j["flag_gap"] = real_list(c.flag.gap);
    j["flag_display"] = real_list(c.flag.display);
    j["flag_error"] = format_real(c.flag.error);
    j["phi_length"] = c.phi_length.to_string();
    j["eps_prime"] = format_real(c.eps_prime);
    j["beta_halvings"] = c.reduction.beta_halvings;
    j["beta"] = real_list(c.reduction.beta);
    j["s"] = nat_list(c.reduction.s);
    j["reduction_error"] = real_list(c.reduction.flag_error);
    j["x_minus_y"] = format_real(c.reduction.distance);
    j["min_gamma"] = format_real(c.reduction.min_gamma);
    j["N"] = c.N.to_string();
    j["delta"] = format_real(c.delta);
    j["psi"] = c.psi.to_string();
    j["achieved_error"] = format_real(c.achieved_error);
    j["run_errors"] = real_list(c.run_errors);
    j["spectral_only"] = c.spectral_only;
    j["holds"] = c.holds();
    j["frames_embedded"] = c.frames_embedded;
    if (c.frames_embedded) {
        j["x_frame"] = to_json(c.x_frame);
        j["y_frame"] = to_json(c.y_frame);
    }
    if (c.embedding.size()) j["embedding"] = to_json(Frame(static_cast<int>(c.embedding.rows()), c.embedding));
    return j;
}

BlockCertificate certificate_from_json(const json& j) {
    if (j.value("type", "") != "block_certificate") throw std::invalid_argument("not a block certificate");
    BlockCertificate c;
    c.eps_text = j.at("eps").get<std::string>();
    c.eta_text = j.at("eta").get<std::string>();
    c.alpha0_text = j.at("alpha0").get<std::string>();
    c.eps = parse_real(c.eps_text);
    c.eta = parse_real(c.eta_text);
    c.alpha0 = parse_real(c.alpha0_text);
    const int k = j.at("k").get<int>();
    if (k != k_of_eps(c.eps)) throw std::invalid_argument("stored k disagrees with k(eps)");
    c.flag = rebuild_nested_flag(k, c.eps, c.alpha0, j.at("alpha_halvings").get<std::vector<int>>());
    c.phi_length = phi_length_of(c.flag);
    c.eps_prime = c.eps / to_real(c.phi_length);
    c.reduction = rebuild_two_space_reduction(k, c.eps_prime, c.eta, BigNat::parse(j.at("a").get<std::string>()),
                                              j.at("beta_halvings").get<std::vector<long>>());
    finish(c);
    if (j.contains("embedding")) c.embedding = frame_from_json(j.at("embedding")).columns;
    if (c.frames_embedded && c.embedding.size()) {
        c.x_frame = block_x_frame(c);
        c.y_frame = block_y_frame(c);
    }
    return c;
}

namespace {

void compare_real(VerifyReport& rep, const std::string& name, const json& stored, const Real& fresh, const Real& tol,
                  bool relative) {
    Real s = parse_real(stored.get<std::string>());
    Real diff = abs(s - fresh);
    Real scale = !relative ? Real(1) : (abs(s) > abs(fresh) ? abs(s) : abs(fresh));
    bool ok = diff <= tol * scale;
    rep.details[name] = {{"stored", stored}, {"recomputed", format_real(fresh)}, {"ok", ok}};
    if (!ok) {
        rep.ok = false;
        rep.failures.push_back(name + ": stored " + stored.get<std::string>() + ", recomputed " + format_real(fresh));
    }
}

}  // namespace

VerifyReport verify_certificate(const json& j) {
    VerifyReport rep;
    rep.details = json::object();
    BlockCertificate c;
    try {
        c = certificate_from_json(j);
    } catch (const std::exception& e) {
        rep.ok = false;
        rep.failures.push_back(std::string("rebuild failed: ") + e.what());
        return rep;
    }
    const Real err_tol("1e-8"), rel_tol("1e-12");
    compare_real(rep, "achieved_error", j.at("achieved_error"), c.achieved_error, err_tol, false);
    compare_real(rep, "flag_error", j.at("flag_error"), c.flag.error, err_tol, false);
    compare_real(rep, "x_minus_y", j.at("x_minus_y"), c.reduction.distance, rel_tol, true);
    compare_real(rep, "delta", j.at("delta"), c.delta, rel_tol, true);
    compare_real(rep, "eps_prime", j.at("eps_prime"), c.eps_prime, rel_tol, true);
    auto cmp_list = [&](const std::string& name, const std::vector<Real>& fresh, const Real& tol, bool relative) {
        const json& arr = j.at(name);
        if (arr.size() != fresh.size()) {
            rep.ok = false;
            rep.failures.push_back(name + ": length mismatch");
            return;
        }
        for (std::size_t i = 0; i < fresh.size(); ++i)
            compare_real(rep, name + "[" + std::to_string(i) + "]", arr[i], fresh[i], tol, relative);
    };
    cmp_list("run_errors", c.run_errors, err_tol, false);
    cmp_list("flag_display", c.flag.display, err_tol, false);
    cmp_list("reduction_error", c.reduction.flag_error, rel_tol, true);
    cmp_list("beta", c.reduction.beta, rel_tol, true);
    auto cmp_exact = [&](const std::string& name, const json& fresh) {
        bool ok = j.at(name) == fresh;
        if (!ok) {
            rep.ok = false;
            rep.failures.push_back(name + ": stored value differs from rebuild");
        }
    };
    cmp_exact("r", nat_list(c.flag.r));
    cmp_exact("s", nat_list(c.reduction.s));
    cmp_exact("N", c.N.to_string());
    cmp_exact("phi_length", c.phi_length.to_string());
    try {
        PowerWord stored = PowerWord::parse(j.at("psi").get<std::string>(), 3);
        if (!structurally_equal(stored, c.psi)) {
            rep.ok = false;
            rep.failures.push_back("psi: stored word differs from rebuild");
        }
    } catch (const std::exception& e) {
        rep.ok = false;
        rep.failures.push_back(std::string("psi: ") + e.what());
    }
    if (!c.holds()) {
        rep.ok = false;
        rep.failures.push_back("block bounds do not hold after rebuild");
    }
    if (j.at("holds").get<bool>() != c.holds()) {
        rep.ok = false;
        rep.failures.push_back("holds flag differs from rebuild");
    }
    json again = to_json(c);
    bool identical = dump_json(again) == dump_json(j);
    rep.details["byte_identical"] = identical;
    if (!identical) {
        rep.ok = false;
        rep.failures.push_back("re-serialization is not byte-identical");
    }
    return rep;
}

}  // namespace projlab
