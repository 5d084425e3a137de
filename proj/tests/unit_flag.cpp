#include <doctest.h>

#include "projlab/flag.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

using namespace projlab;

namespace {

// Independent scan in decimal floating point; values within 1e-60 of the
// threshold count as ties (not strictly greater).
int scan_k(const char* eps_text) {
    using D = boost::multiprecision::cpp_dec_float_100;
    D eps(eps_text);
    if (std::string(eps_text).find('/') != std::string::npos) throw std::logic_error("decimal only");
    D pi = boost::math::constants::pi<D>();
    for (int k = 1;; ++k) {
        D v = boost::multiprecision::pow(boost::multiprecision::cos(pi / (2 * k)), k);
        if (v - (1 - eps) > D("1e-60")) return k;
    }
}

Eigen::MatrixXd w_projector(const QuarterCircle& qc) {
    return qc.u * qc.u.transpose() + qc.v * qc.v.transpose();
}

}  // namespace

TEST_CASE("k_of_eps against a decimal scan") {
    CHECK(k_of_eps(Real("0.6")) == 2);
    CHECK(k_of_eps(Real("0.5")) == 3);
    CHECK(k_of_eps(Real("0.1")) == 12);
    for (const char* e : {"0.6", "0.5", "0.25", "0.1", "0.01", "0.3", "0.05"})
        CHECK(k_of_eps(parse_real(e)) == scan_k(e));
    int k25 = k_of_eps(Real("0.25"));
    CHECK(k25 >= 5);
    CHECK(k25 <= 7);
    CHECK_THROWS(k_of_eps(Real(0)));
    CHECK_THROWS(k_of_eps(Real(1)));
    CHECK(k_of_eps(parse_real("1/9")) == 11);
    CHECK(k_of_eps(parse_real("1/81")) == 100);
}

TEST_CASE("quarter circle") {
    QuarterCircle qc = QuarterCircle::canonical(4, 7);
    CHECK_NOTHROW(qc.validate());
    CHECK((qc.h[0] - qc.u).norm() < 1e-15);
    CHECK((qc.h[4] - qc.v).norm() < 1e-15);
    CHECK_THROWS(QuarterCircle::canonical(4, 5));
}

TEST_CASE("flag-adapted basis spans the defining vectors") {
    for (const char* e : {"0.6", "0.5", "0.3"}) {
        Real eps = parse_real(e);
        int k = k_of_eps(eps);
        QuarterCircle qc = QuarterCircle::canonical(k, k + 2);
        NestedFlag f = build_nested_flag(qc, eps, Real("0.5"));
        Eigen::MatrixXd B = f.basis;
        CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(k + 2, k + 2)).norm() < 1e-12);
        for (int j = 1; j <= k; ++j) {
            // X_j from its definition, orthonormalized directly
            std::vector<Eigen::VectorXd> g;
            for (int i = 0; i <= j; ++i) {
                Eigen::VectorXd x = qc.h[i];
                if (i < k) x += to_double(f.alpha[i]) * qc.z[i];
                g.push_back(x);
            }
            Frame direct = orthonormalize(g, 1e-14, k + 2);
            CHECK(direct.rank() == j + 1);
            Frame adapted = f.x_frame(j, qc);
            CHECK(projector_distance(projector(direct), projector(adapted)) < 1e-9);
            if (j < k) {
                Eigen::MatrixXd next = projector(f.x_frame(j + 1, qc)).matrix;
                CHECK((next * adapted.columns - adapted.columns).norm() < 1e-9);
            }
        }
        for (int j = 1; j < k; ++j) CHECK(f.alpha[j] < f.alpha[j - 1]);
    }
}

TEST_CASE("flag error and display norms match dense powering") {
    for (const char* e : {"0.6", "0.5"}) {
        Real eps = parse_real(e);
        int k = k_of_eps(eps);
        QuarterCircle qc = QuarterCircle::canonical(k, k + 2);
        NestedFlag f = build_nested_flag(qc, eps, Real("0.5"));
        Eigen::MatrixXd W = w_projector(qc);
        Eigen::VectorXd x = qc.u;
        for (int j = 1; j <= k; ++j) {
            REQUIRE(f.r[j - 1].fits_u64());
            Eigen::MatrixXd X = projector(f.x_frame(j, qc)).matrix;
            Eigen::MatrixXd run = matrix_power(X * W * X, f.r[j - 1]);
            Eigen::MatrixXd hj = qc.h[j] * qc.h[j].transpose();
            CHECK(std::abs(operator_norm(run - hj) - to_double(f.display[j - 1])) < 1e-9);
            CHECK(to_double(f.display[j - 1]) < 0.9 * to_double(eps) / k);
            x = run * x;
        }
        CHECK(std::abs((x - qc.v).norm() - to_double(f.error)) < 1e-9);
        CHECK(f.error < 2 * eps * Real("0.9"));
        CHECK(f.phi.occurrences(1) == [&] {
            BigNat n(0u);
            for (auto& r : f.r) n += r;
            return n;
        }());
    }
}

TEST_CASE("single step flag reaches v inside X_1") {
    QuarterCircle qc = QuarterCircle::canonical(1, 3);
    Real eps("0.99");
    NestedFlag f = build_nested_flag(qc, eps, Real("0.5"));
    Frame x1 = f.x_frame(1, qc);
    CHECK((projector(x1).matrix * qc.v - qc.v).norm() < 1e-12);
    CHECK(f.error < 2 * eps);
    CHECK(f.phi.to_string().find("a2a1a2") != std::string::npos);
}

TEST_CASE("unperturbed flag powers approach the line strictly") {
    QuarterCircle qc = QuarterCircle::canonical(2, 4);
    NestedFlag f = build_nested_flag(qc, Real("0.5"), Real("0.5"));
    Eigen::MatrixXd W = w_projector(qc);
    for (int j = 1; j <= 2; ++j) {
        Eigen::MatrixXd Xp = projector(f.x_prime_frame(j, qc)).matrix;
        Eigen::MatrixXd hj = qc.h[j] * qc.h[j].transpose();
        Eigen::MatrixXd step = Xp * W * Xp, acc = step;
        double prev = operator_norm(acc - hj);
        for (int r = 2; r <= 40; ++r) {
            acc = acc * step;
            double cur = operator_norm(acc - hj);
            CHECK(cur < prev);
            prev = cur;
        }
        // the rate is the stored squared cosine
        double c = 1 - to_double(f.gap[j - 1]);
        CHECK(std::abs(prev - std::pow(c, 40)) < 1e-12);
    }
}

TEST_CASE("mirrored quarter circle gives the same error") {
    QuarterCircle qc = QuarterCircle::canonical(3, 5);
    QuarterCircle m = qc;
    std::swap(m.u, m.v);
    m.h.clear();
    for (int j = 0; j <= 3; ++j) {
        Real t = m.xi * j;
        m.h.push_back(to_double(cos(t)) * m.u + to_double(sin(t)) * m.v);
    }
    NestedFlag a = build_nested_flag(qc, Real("0.5"), Real("0.5"));
    NestedFlag b = build_nested_flag(m, Real("0.5"), Real("0.5"));
    CHECK(a.error == b.error);
    Eigen::MatrixXd W = w_projector(m);
    Eigen::VectorXd x = m.u;
    for (int j = 1; j <= 3; ++j) {
        Eigen::MatrixXd X = projector(b.x_frame(j, m)).matrix;
        x = matrix_power(X * W * X, b.r[j - 1]) * x;
    }
    CHECK(std::abs((x - m.v).norm() - to_double(b.error)) < 1e-9);
}

TEST_CASE("rebuild from halvings reproduces the flag") {
    Real eps = parse_real("1/9");
    NestedFlag f = build_nested_flag(QuarterCircle::canonical(11, 13), eps, Real("0.5"));
    NestedFlag g = rebuild_nested_flag(11, eps, Real("0.5"), f.halvings);
    CHECK(g.error == f.error);
    for (int j = 0; j < 11; ++j) CHECK(g.r[j] == f.r[j]);
    CHECK(structurally_equal(g.phi, f.phi));
    CHECK(f.error < Real("0.2"));
}
