#include <doctest.h>

#include "projlab/chain.hpp"

#include <cmath>

using namespace projlab;

namespace {

// Small chain whose block exponents stay below 10^5, so dense double
// evaluation of the words is accurate. The preconditions do not hold here;
// the glued errors are large and visible.
const GluedTriple& small_chain() {
    static const GluedTriple t =
        build_chain({"0.95", "0.9", "0.85"}, EtaRule::explicit_values, {"0.9", "0.9", "0.9"});
    return t;
}

Eigen::MatrixXd proj(const Frame& f) { return f.columns * f.columns.transpose(); }

OperatorAssignment zxy(const GluedTriple& t) {
    OperatorAssignment a;
    a.ops[1] = proj(chain_frame(t, Role::Z));
    a.ops[2] = proj(chain_frame(t, Role::X));
    a.ops[3] = proj(chain_frame(t, Role::Y));
    return a;
}

}  // namespace

TEST_CASE("chain geometry: window overlaps and locality") {
    const GluedTriple& t = small_chain();
    const ChainGeometry& g = t.geometry;
    int total = 0;
    for (int d : g.window_dim) total += d;
    CHECK(g.dim == total - (g.m - 1));
    for (int i = 1; i <= g.m; ++i)
        for (int j = i + 1; j <= g.m; ++j) {
            Eigen::MatrixXd pij = proj(g.window_frame(i)) * proj(g.window_frame(j));
            if (j == i + 1) {
                Eigen::VectorXd e = t.port(i + 1);
                CHECK((pij - e * e.transpose()).norm() < 1e-9);
            } else {
                CHECK(pij.norm() < 1e-10);
            }
        }
    for (int i = 1; i <= g.m; ++i) {
        Frame e = g.window_frame(i);
        CHECK((proj(e) * t.port(i) - t.port(i)).norm() == 0);
        CHECK((proj(e) * t.port(i + 1) - t.port(i + 1)).norm() == 0);
    }
}

TEST_CASE("glued frames: Y, Z orthonormal and X, Y, Z as described") {
    const GluedTriple& t = small_chain();
    for (Role r : {Role::X, Role::Y, Role::Z}) CHECK_NOTHROW(chain_frame(t, r).validate(1e-10));
    int xr = 0;
    for (const auto& c : t.blocks) xr += c.k + 2;
    CHECK(chain_frame(t, Role::X).rank() == xr - (t.m() - 1));
    // Y holds e_1; with m = 3 the terminal e_4 joins Y
    Eigen::MatrixXd py = proj(chain_frame(t, Role::Y));
    CHECK((py * t.port(1) - t.port(1)).norm() < 1e-12);
    CHECK(t.terminal_in_y);
    CHECK((py * t.port(4) - t.port(4)).norm() < 1e-12);
}

TEST_CASE("cross-block interference and window distance on dense frames") {
    const GluedTriple& t = small_chain();
    const ChainGeometry& g = t.geometry;
    Eigen::MatrixXd pw[3];
    for (int i = 1; i <= g.m; ++i) {
        const BlockCertificate& c = t.blocks[i - 1];
        // dense block frames placed in the window
        Eigen::MatrixXd bx = Eigen::MatrixXd::Zero(g.dim, c.k + 2), by = bx;
        Frame lx = block_x_frame(c), ly = block_y_frame(c);
        for (int l = 0; l < c.e_dim; ++l) {
            bx.row(g.global(i, l)) = lx.columns.row(l);
            by.row(g.global(i, l)) = ly.columns.row(l);
        }
        pw[i - 1] = proj(Frame(g.dim, bx)) - proj(Frame(g.dim, by));
    }
    for (int i = 2; i <= g.m; ++i) {
        double interference = operator_norm(pw[i - 2] * proj(g.window_frame(i)));
        CHECK(interference <= to_double(t.blocks[i - 2].eta) + 1e-12);
        CHECK(interference <= to_double(t.blocks[i - 2].reduction.distance) + 1e-12);
    }
    Eigen::MatrixXd py = proj(chain_frame(t, Role::Y)), pz = proj(chain_frame(t, Role::Z));
    for (int i = 1; i <= g.m; ++i) {
        Eigen::VectorXd a = t.port(i), b = t.port(i + 1);
        Eigen::MatrixXd w = a * a.transpose() + b * b.transpose();
        Eigen::MatrixXd role = i % 2 == 0 ? pz : py;
        double dense = operator_norm(w - role * proj(g.window_frame(i)));
        CHECK(std::abs(dense - to_double(t.window_distance[i - 1])) < 1e-10);
        CHECK(dense <= to_double(t.window_bound[i - 1]) + 1e-12);
    }
}

TEST_CASE("role swap: Psi_i(Z, X, Y) equals psi_i(Y, X, Z) for odd i") {
    const GluedTriple& t = small_chain();
    OperatorAssignment a = zxy(t);
    OperatorAssignment swapped = a;
    std::swap(swapped.ops[1], swapped.ops[3]);
    for (int i = 1; i <= t.m(); ++i) {
        Eigen::MatrixXd lhs = evaluate(t.schedule[i - 1], a);
        Eigen::MatrixXd rhs = evaluate(t.blocks[i - 1].psi, i % 2 == 0 ? a : swapped);
        CHECK((lhs - rhs).norm() < 1e-10);
        if (i % 2 == 0) CHECK(structurally_equal(t.schedule[i - 1], t.blocks[i - 1].psi));
    }
}

TEST_CASE("orbit matches dense word evaluation") {
    const GluedTriple& t = small_chain();
    OperatorAssignment a = zxy(t);
    OrbitTrace tr = run_orbit(t, t.port(1), CheckpointPolicy::per_block);
    REQUIRE(tr.checkpoints.size() == 4);
    Eigen::VectorXd z = t.port(1);
    BigNat pos(0u);
    for (int i = 1; i <= t.m(); ++i) {
        Eigen::VectorXd zi = evaluate(t.schedule[i - 1], a) * t.port(i);
        CHECK(std::abs((zi - t.port(i + 1)).norm() - t.block_errors[i - 1]) < 1e-8);
        z = evaluate(t.schedule[i - 1], a) * z;
        pos += t.schedule[i - 1].length();
        CHECK((tr.checkpoints[i].vector - z).norm() < 1e-8);
        CHECK(tr.checkpoints[i].position == pos);
    }
    // per-run trace ends at the same point with strictly more checkpoints
    OrbitTrace full = run_orbit(t, t.port(1), CheckpointPolicy::per_run);
    CHECK(full.checkpoints.size() > tr.checkpoints.size());
    CHECK((full.checkpoints.back().vector - tr.checkpoints.back().vector).norm() == 0);
    CHECK(full.norms_nonincreasing());
    CHECK(full.positions_increasing());
}

TEST_CASE("orbit from a point outside every window collapses") {
    const GluedTriple& t = small_chain();
    const int dim = t.geometry.dim + 2;
    Eigen::VectorXd z0 = Eigen::VectorXd::Unit(dim, dim - 1);
    OrbitTrace tr = run_orbit(t, z0, CheckpointPolicy::per_run);
    CHECK(tr.checkpoints.front().norm == 1);
    for (std::size_t i = 1; i < tr.checkpoints.size(); ++i) CHECK(tr.checkpoints[i].norm == 0);
}

TEST_CASE("chains with derived eta: one and two blocks") {
    GluedTriple one = build_chain(geometric_eps_schedule(1, 9));
    CHECK(parse_real(one.eta_texts[0]) == Real("0.5"));
    CHECK(one.preconditions_hold);
    CHECK(one.terminal_in_y);  // m + 1 = 2 is even
    OrbitTrace tr1 = run_orbit(one, one.port(1), CheckpointPolicy::per_block);
    CHECK(tr1.checkpoints.back().dist_to_target < 4.0 / 9);
    CHECK(verify_divergence(tr1, one).ok);

    GluedTriple two = build_chain(geometric_eps_schedule(2, 9));
    CHECK_FALSE(two.terminal_in_y);
    // eta_1 = delta_2 / 2, eta_2 = delta_1 / 2, rounded down
    CHECK(parse_real(two.eta_texts[0]) <= two.blocks[1].delta / 2);
    CHECK(parse_real(two.eta_texts[0]) > two.blocks[1].delta / 2 * (1 - Real("1e-15")));
    CHECK(parse_real(two.eta_texts[1]) <= two.blocks[0].delta / 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(two.window_distance[i] < two.blocks[i].delta);
        CHECK(two.window_distance[i] <= two.window_bound[i]);
        CHECK(two.block_errors[i] < 4 * to_double(two.blocks[i].eps));
    }
    OrbitTrace tr2 = run_orbit(two, two.port(1), CheckpointPolicy::per_run);
    VerifyReport rep = verify_divergence(tr2, two);
    CHECK(rep.ok);
    CHECK(rep.details["norms_monotone"].get<bool>());
    CHECK(tr2.to_csv().rfind("position,block,norm,dist_to_target,probe_e1,probe_e2,probe_e3\n0,0,1,", 0) == 0);
}

TEST_CASE("chain argument errors") {
    CHECK_THROWS_AS(build_chain({"0.1", "0.2"}), std::invalid_argument);
    CHECK_THROWS_AS(build_chain({"1.5"}), std::invalid_argument);
    CHECK_THROWS_AS(build_chain({}), std::invalid_argument);
    CHECK_THROWS_AS(build_chain({"0.5"}, EtaRule::explicit_values, {}), std::invalid_argument);
}

TEST_CASE("verify_divergence reports a corrupted trace") {
    GluedTriple one = build_chain(geometric_eps_schedule(1, 9));
    OrbitTrace tr = run_orbit(one, one.port(1), CheckpointPolicy::per_run);
    tr.checkpoints[3].norm = 2;
    VerifyReport rep = verify_divergence(tr, one);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.failures.empty());
}
