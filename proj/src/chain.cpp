#include "projlab/chain.hpp"

#include <sstream>

namespace projlab {

std::vector<int> ChainGeometry::window(int i) const {
    std::vector<int> out;
    for (int l = 0; l < window_dim[i - 1]; ++l) out.push_back(global(i, l));
    return out;
}

Frame ChainGeometry::window_frame(int i) const {
    std::vector<int> idx = window(i);
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(dim, static_cast<int>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) cols(idx[c], static_cast<int>(c)) = 1;
    return Frame(dim, cols);
}

Eigen::VectorXd GluedTriple::port(int a, int dim) const {
    return Eigen::VectorXd::Unit(dim > 0 ? dim : geometry.dim, a - 1);
}

std::vector<std::string> geometric_eps_schedule(int m, int base) {
    std::vector<std::string> out;
    BigNat d(1u);
    for (int i = 1; i <= m; ++i) {
        d = d * BigNat(static_cast<std::uint64_t>(base));
        out.push_back("1/" + d.to_string());
    }
    return out;
}

namespace {

// ||(I - P_{Y_l}) e|| for the port e of block l at local coordinate `local`.
Real port_leak(const BlockCertificate& c, int local) {
    Real acc = 0;
    for (int t = 0; t < c.k + 2; ++t) {
        const Real& g = c.reduction.gamma[t];
        const Real& x = c.flag.basis_uv[t][local];
        acc += x * x * g * g / (1 + g * g);
    }
    return sqrt(acc);
}

void check_geometry(const ChainGeometry& g) {
    // windows as index sets: E_i E_j is the projector onto the shared coordinates
    for (int i = 1; i <= g.m; ++i)
        for (int j = i + 1; j <= g.m; ++j) {
            std::vector<int> a = g.window(i), b = g.window(j);
            std::vector<int> common;
            for (int x : a)
                for (int y : b)
                    if (x == y) common.push_back(x);
            if (j == i + 1 && !(common.size() == 1 && common[0] == i))
                throw ChainError("windows E_i, E_{i+1} must meet exactly in e_{i+1}", i);
            if (j >= i + 2 && !common.empty()) throw ChainError("windows E_i, E_j with |i-j| >= 2 overlap", i);
        }
}

}  // namespace

GluedTriple build_chain(const std::vector<std::string>& eps, EtaRule rule, const std::vector<std::string>& eta) {
    const int m = static_cast<int>(eps.size());
    if (m < 1) throw std::invalid_argument("need at least one block");
    std::vector<Real> ev;
    for (const std::string& s : eps) ev.push_back(parse_real(s));
    for (int i = 0; i < m; ++i) {
        if (!(ev[i] > 0 && ev[i] < 1)) throw std::invalid_argument("eps_i must lie in (0, 1)");
        if (i > 0 && !(ev[i] < ev[i - 1])) throw std::invalid_argument("eps schedule must be decreasing");
    }
    if (rule == EtaRule::explicit_values && static_cast<int>(eta.size()) != m)
        throw std::invalid_argument("explicit eta needs one value per block");

    GluedTriple t;
    t.eps_texts = eps;
    std::vector<NestedFlag> flags;
    std::vector<Real> delta(m + 2, Real(1));
    for (int i = 1; i <= m; ++i) {
        const int k = k_of_eps(ev[i - 1]);
        flags.push_back(build_nested_flag(QuarterCircle::canonical(k, k + 2), ev[i - 1], Real("0.5")));
        delta[i] = ev[i - 1] / to_real(flag_wall_count(flags.back()));
    }
    for (int i = 1; i <= m; ++i) {
        if (rule == EtaRule::explicit_values) {
            t.eta_texts.push_back(eta[i - 1]);
            continue;
        }
        Real e = delta[i - 1];
        if (i < m && delta[i + 1] < e) e = delta[i + 1];
        t.eta_texts.push_back(round_down_text(e / 2));
    }
    for (int i = 1; i <= m; ++i) {
        t.blocks.push_back(build_block(std::move(flags[i - 1]), eps[i - 1], t.eta_texts[i - 1]));
        if (!t.blocks.back().holds()) throw ChainError("block certificate bound violated", i);
    }

    ChainGeometry& g = t.geometry;
    g.m = m;
    int next = m + 1;
    for (const BlockCertificate& c : t.blocks) {
        g.offset.push_back(next);
        g.window_dim.push_back(c.e_dim);
        next += c.e_dim - 2;
    }
    g.dim = next;
    check_geometry(g);
    t.terminal_in_y = (m + 1) % 2 == 0;

    for (int i = 1; i <= m; ++i) {
        const PowerWord& psi = t.blocks[i - 1].psi;
        t.schedule.push_back(i % 2 == 0 ? psi : transpose_letters(psi, 1, 3));
    }

    t.preconditions_hold = true;
    for (int i = 1; i <= m; ++i) {
        Real left = i > 1 ? port_leak(t.blocks[i - 2], 1) : Real(0);
        Real right = i < m ? port_leak(t.blocks[i], 0) : Real(0);
        t.window_distance.push_back(left > right ? left : right);
        Real bound = 0;
        if (i > 1) bound += t.blocks[i - 2].reduction.distance;
        if (i < m) bound += t.blocks[i].reduction.distance;
        t.window_bound.push_back(bound);
        bool ok = t.window_distance.back() <= bound && t.window_distance.back() < t.blocks[i - 1].delta;
        if (!ok) {
            t.preconditions_hold = false;
            if (rule == EtaRule::from_neighbors) throw ChainError("window precondition ||W_i - R E_i|| < delta_i fails", i);
        }
    }

    RunGeometry geo[2] = {parity_geometry(t, 0, g.dim), parity_geometry(t, 1, g.dim)};
    for (int i = 1; i <= m; ++i) {
        const BlockCertificate& c = t.blocks[i - 1];
        Eigen::VectorXd x = t.port(i);
        for (int j = 1; j <= c.k; ++j) x = build_run(geo[i % 2], c.reduction.s[j - 1], c.flag.r[j - 1]).apply(x);
        t.block_errors.push_back((x - t.port(i + 1)).norm());
    }
    return t;
}

RunGeometry parity_geometry(const GluedTriple& t, int parity, int dim) {
    const ChainGeometry& g = t.geometry;
    const int m = g.m, p = m + 1;
    RunGeometry out;
    out.dim = dim;
    out.ports = p;
    out.defect = RealMatrix(p, p);
    for (int l = 1; l <= m; ++l) {
        const BlockCertificate& c = t.blocks[l - 1];
        const int n = c.k + 2;
        if (l % 2 == parity) {
            for (int s = 0; s < n; ++s) {
                RunLevel lv;
                for (int r = 0; r < n; ++r) {
                    double v = c.flag.basis(r, s);
                    if (v == 0) continue;
                    lv.f.index.push_back(g.global(l, r));
                    lv.f.value.push_back(v);
                }
                lv.port.assign(p, Real(0));
                lv.port[l - 1] = c.flag.basis_uv[s][0];
                lv.port[l] = c.flag.basis_uv[s][1];
                lv.log_mu = c.reduction.log_mu(s);
                out.levels.push_back(std::move(lv));
            }
        } else {
            for (int s = 0; s < n; ++s) {
                const Real& gm = c.reduction.gamma[s];
                Real w = gm * gm / (1 + gm * gm);
                const Real& u = c.flag.basis_uv[s][0];
                const Real& v = c.flag.basis_uv[s][1];
                out.defect(l - 1, l - 1) += u * u * w;
                out.defect(l, l) += v * v * w;
                out.defect(l - 1, l) += u * v * w;
            }
            out.defect(l, l - 1) = out.defect(l - 1, l);
        }
    }
    auto identity_level = [&](int a) {
        RunLevel lv;
        lv.f.index.push_back(a - 1);
        lv.f.value.push_back(1.0);
        lv.port.assign(p, Real(0));
        lv.port[a - 1] = 1;
        lv.log_mu = 0;
        out.levels.push_back(std::move(lv));
    };
    // the Y-role space of even runs is Y, which holds e_1; the terminal
    // piece sits in the Y-role space of the parity opposite to block m
    if (parity == 0) identity_level(1);
    if (parity != m % 2) identity_level(m + 1);
    return out;
}

Frame chain_frame(const GluedTriple& t, Role role, int max_dim) {
    const ChainGeometry& g = t.geometry;
    if (g.dim > max_dim) throw std::domain_error("chain dimension above the dense frame limit");
    std::vector<Eigen::VectorXd> cols;
    for (int l = 1; l <= g.m; ++l) {
        const BlockCertificate& c = t.blocks[l - 1];
        const int n = c.k + 2;
        const bool take_y = role == Role::Y ? l % 2 == 0 : role == Role::Z ? l % 2 == 1 : false;
        if (role != Role::X && !take_y) continue;
        for (int s = 0; s < n; ++s) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(g.dim);
            double scale = 1, tail = 0;
            if (role != Role::X) {
                const Real& gm = c.reduction.gamma[s];
                Real nrm = sqrt(1 + gm * gm);
                scale = to_double(1 / nrm);
                tail = to_double(gm / nrm);
            }
            for (int r = 0; r < n; ++r) col(g.global(l, r)) = c.flag.basis(r, s) * scale;
            if (role != Role::X) col(g.global(l, n + s)) = tail;
            cols.push_back(col);
        }
    }
    if (role == Role::Y) cols.push_back(t.port(1));
    if ((role == Role::Y && t.terminal_in_y) || (role == Role::Z && !t.terminal_in_y)) cols.push_back(t.port(g.m + 1));
    Eigen::MatrixXd mat(g.dim, static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) mat.col(static_cast<int>(i)) = cols[i];
    if (role == Role::X) return orthonormalize(mat);  // X_i and X_{i+1} share e_{i+1}
    return Frame(g.dim, mat);
}

namespace {

Checkpoint make_checkpoint(const GluedTriple& t, const Eigen::VectorXd& z, const BigNat& pos, int block, int run,
                           bool end) {
    Checkpoint c;
    c.position = pos;
    c.block = block;
    c.run = run;
    c.block_end = end;
    c.vector = z;
    c.norm = z.norm();
    c.dist_to_target = (z - t.port(block + 1, static_cast<int>(z.size()))).norm();
    for (int a = 1; a <= t.m() + 1; ++a) c.probes.push_back(z(a - 1));
    return c;
}

}  // namespace

ChainProgram compile_chain(const GluedTriple& t, int dim) {
    ChainProgram prog;
    prog.dim = dim > 0 ? dim : t.geometry.dim;
    if (prog.dim < t.geometry.dim) throw std::invalid_argument("ambient smaller than the chain dimension");
    RunGeometry geo[2] = {parity_geometry(t, 0, prog.dim), parity_geometry(t, 1, prog.dim)};
    BigNat pos(0u);
    for (int i = 1; i <= t.m(); ++i) {
        const BlockCertificate& c = t.blocks[i - 1];
        for (int j = 1; j <= c.k; ++j) {
            const BigNat& s = c.reduction.s[j - 1];
            const BigNat& r = c.flag.r[j - 1];
            prog.runs.push_back(build_run(geo[i % 2], s, r));
            pos += r * (s * BigNat(6u) + BigNat(1u));
            prog.block.push_back(i);
            prog.run.push_back(j);
            prog.position.push_back(pos);
        }
    }
    return prog;
}

OrbitTrace run_program(const ChainProgram& prog, const GluedTriple& t, const Eigen::VectorXd& z0,
                       CheckpointPolicy policy) {
    if (z0.size() != prog.dim) throw std::invalid_argument("z0 dimension does not match the program");
    OrbitTrace out;
    Eigen::VectorXd z = z0;
    out.checkpoints.push_back(make_checkpoint(t, z, BigNat(0u), 0, 0, true));
    for (std::size_t q = 0; q < prog.runs.size(); ++q) {
        z = prog.runs[q].apply(z);
        const int i = prog.block[q], j = prog.run[q];
        const bool end = j == t.blocks[i - 1].k;
        if (policy == CheckpointPolicy::per_run || end)
            out.checkpoints.push_back(
                make_checkpoint(t, z, prog.position[q], i, policy == CheckpointPolicy::per_run ? j : 0, end));
    }
    return out;
}

OrbitTrace run_orbit(const GluedTriple& t, const Eigen::VectorXd& z0, CheckpointPolicy policy) {
    if (z0.size() < t.geometry.dim) throw std::invalid_argument("z0 shorter than the chain dimension");
    return run_program(compile_chain(t, static_cast<int>(z0.size())), t, z0, policy);
}

VerifyReport verify_divergence(const OrbitTrace& trace, const GluedTriple& t) {
    VerifyReport rep;
    rep.ok = true;
    auto fail = [&](const std::string& what, double measured, double bound) {
        rep.ok = false;
        std::ostringstream os;
        os << what << ": measured " << format_double(measured) << ", bound " << format_double(bound);
        rep.failures.push_back(os.str());
    };
    const int m = t.m();
    std::vector<const Checkpoint*> ends;
    for (const Checkpoint& c : trace.checkpoints)
        if (c.block_end) ends.push_back(&c);
    if (static_cast<int>(ends.size()) != m + 1) {
        rep.ok = false;
        rep.failures.push_back("trace does not cover every block end");
        return rep;
    }
    if ((ends[0]->vector - t.port(1, static_cast<int>(ends[0]->vector.size()))).norm() != 0)
        rep.failures.push_back("trace does not start at e_1"), rep.ok = false;

    std::vector<double> bound(m + 1, 0.0);
    Real acc = 0;
    for (int n = 1; n <= m; ++n) {
        acc += 4 * t.blocks[n - 1].eps;
        bound[n] = to_double(acc);
    }
    json blocks = json::array();
    double sum_measured = 0;
    for (int n = 1; n <= m; ++n) {
        const Checkpoint& c = *ends[n];
        sum_measured += t.block_errors[n - 1];
        json b;
        b["block"] = n;
        b["error"] = c.dist_to_target;
        b["bound"] = bound[n];
        b["telescoped"] = sum_measured;
        b["norm"] = c.norm;
        b["block_error"] = t.block_errors[n - 1];
        blocks.push_back(b);
        if (!(t.block_errors[n - 1] < 4 * to_double(t.blocks[n - 1].eps)))
            fail("block " + std::to_string(n) + " error ||A_n e_n - e_{n+1}|| above 4 eps_n", t.block_errors[n - 1],
                 4 * to_double(t.blocks[n - 1].eps));
        if (!(c.dist_to_target <= sum_measured + 1e-12))
            fail("prefix " + std::to_string(n) + " error above the telescoped block errors", c.dist_to_target,
                 sum_measured);
        if (!(c.dist_to_target <= bound[n]))
            fail("prefix " + std::to_string(n) + " error above 4 sum eps_i", c.dist_to_target, bound[n]);
        const double floor = std::max(0.5, 1 - bound[n]);
        if (!(c.norm >= floor)) fail("block-end norm below 1 - 4 sum eps_i", c.norm, floor);
    }
    json gaps = json::array();
    for (int n = 0; n < m; ++n) {
        double d = (ends[n + 1]->vector - ends[n]->vector).norm();
        double lower = std::sqrt(2.0) - (bound[n] + bound[n + 1]);
        gaps.push_back(d);
        if (!(d >= lower)) fail("block-end gap " + std::to_string(n) + " below sqrt(2) - bounds", d, lower);
        if (!(d > 0.4)) fail("block-end gap " + std::to_string(n) + " not above 0.4", d, 0.4);
    }
    json probes = json::array();
    const Checkpoint& last = *ends[m];
    for (int j = 1; j <= m; ++j) {
        double p = std::abs(last.probes[j - 1]);
        probes.push_back(p);
        if (!(p <= bound[m])) fail("weak probe |<z, e_" + std::to_string(j) + ">|", p, bound[m]);
    }
    bool monotone = true, increasing = true;
    for (std::size_t i = 1; i < trace.checkpoints.size(); ++i) {
        if (trace.checkpoints[i].norm > trace.checkpoints[i - 1].norm) {
            monotone = false;
            fail("checkpoint norm increased at index " + std::to_string(i), trace.checkpoints[i].norm,
                 trace.checkpoints[i - 1].norm);
        }
        if (!(trace.checkpoints[i - 1].position < trace.checkpoints[i].position)) increasing = false;
    }
    if (!increasing) rep.ok = false, rep.failures.push_back("checkpoint positions not strictly increasing");
    double min_norm = 1e300;
    for (int n = 1; n <= m; ++n) min_norm = std::min(min_norm, ends[n]->norm);
    rep.details["blocks"] = blocks;
    rep.details["block_end_gaps"] = gaps;
    rep.details["final_probes"] = probes;
    rep.details["min_block_end_norm"] = min_norm;
    rep.details["norms_monotone"] = monotone;
    rep.details["positions_increasing"] = increasing;
    rep.details["final_bound"] = bound[m];
    rep.details["checkpoints"] = static_cast<int>(trace.checkpoints.size());
    rep.details["within_run_norms"] = "not sampled; each letter is a projection, so norms cannot increase inside a run";
    return rep;
}

json chain_json(const GluedTriple& t) {
    json j;
    j["type"] = "glued_chain";
    j["m"] = t.m();
    j["dim"] = t.geometry.dim;
    j["eps"] = t.eps_texts;
    j["eta"] = t.eta_texts;
    j["terminal_in"] = t.terminal_in_y ? "Y" : "Z";
    j["preconditions_hold"] = t.preconditions_hold;
    json blocks = json::array();
    for (int i = 1; i <= t.m(); ++i) {
        const BlockCertificate& c = t.blocks[i - 1];
        json b;
        b["index"] = i;
        b["k"] = c.k;
        b["window_dim"] = c.e_dim;
        b["offset"] = t.geometry.offset[i - 1];
        b["delta"] = format_real(c.delta);
        b["N"] = c.N.to_string();
        b["achieved_error"] = format_real(c.achieved_error);
        b["x_minus_y"] = format_real(c.reduction.distance);
        b["window_distance"] = format_real(t.window_distance[i - 1]);
        b["window_bound"] = format_real(t.window_bound[i - 1]);
        b["glued_error"] = t.block_errors[i - 1];
        b["roles"] = i % 2 == 0 ? "Psi_i = psi_i(Z, X, Y)" : "Psi_i(Z, X, Y) = psi_i(Y, X, Z)";
        b["holds"] = c.holds();
        blocks.push_back(b);
    }
    j["blocks"] = blocks;
    return j;
}

}  // namespace projlab
