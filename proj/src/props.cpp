#include "projlab/props.hpp"

#include "projlab/linalg.hpp"

#include <random>

namespace projlab {

namespace {

Eigen::MatrixXd random_subspace_projection(std::mt19937_64& rng, const Eigen::MatrixXd& basis) {
    std::normal_distribution<double> g;
    const int n = static_cast<int>(basis.cols());
    const int r = static_cast<int>(rng() % (n + 1));
    if (r == 0) return Eigen::MatrixXd::Zero(basis.rows(), basis.rows());
    Eigen::MatrixXd m(n, r);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    Frame f = orthonormalize(Eigen::MatrixXd(basis * m));
    return f.columns * f.columns.transpose();
}

PowerWord random_flat_word(std::mt19937_64& rng) {
    const int len = 1 + static_cast<int>(rng() % 50);
    std::string text;
    for (int i = 0; i < len; ++i) text += "a" + std::to_string(1 + rng() % 3);
    return PowerWord::parse(text, 3);
}

}  // namespace

PropSuiteResult prop_suite(std::uint64_t seed, int trials, double tol) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    PropSuiteResult out;
    out.min_slack = 1e300;
    for (int t = 0; t < trials; ++t) {
        const int d = 2 + static_cast<int>(rng() % 7);
        Eigen::MatrixXd q(d, d);
        for (int i = 0; i < q.size(); ++i) q.data()[i] = g(rng);
        Eigen::MatrixXd basis = orthonormalize(q).columns;
        const int split = 1 + static_cast<int>(rng() % d);
        Eigen::MatrixXd in = basis.leftCols(split), outside = basis.rightCols(d - split);
        Eigen::MatrixXd e;
        OperatorAssignment a, b;
        a.tol = b.tol = tol;
        const int kind = t % 3;
        for (int l = 1; l <= 3; ++l)
            for (OperatorAssignment* s : {&a, &b}) {
                if (kind == 0) {
                    s->ops[l] = random_subspace_projection(rng, basis);
                } else if (kind == 1) {
                    Eigen::MatrixXd p = random_subspace_projection(rng, in);
                    if (d > split) p += random_subspace_projection(rng, outside);
                    s->ops[l] = p;
                } else {
                    s->ops[l] = random_subspace_projection(rng, in);
                }
            }
        e = kind == 0 ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d)) : Eigen::MatrixXd(in * in.transpose());
        PowerWord w = random_flat_word(rng);
        ContinuityCheck c = check_word_continuity(w, a, b, e);
        ++out.trials;
        if (!c.holds) {
            ++out.failures;
            out.failed.push_back(w.to_string());
        }
        if (c.rhs > 1e-6) out.max_ratio = std::max(out.max_ratio, c.lhs / c.rhs);
        out.min_slack = std::min(out.min_slack, c.rhs + tol - c.lhs);
    }
    return out;
}

}  // namespace projlab
