#include "projlab/five.hpp"

#include <cmath>

namespace projlab {

Pairing build_pairing(const Frame& x, int ambient) {
    if (x.ambient_dim != ambient) throw std::invalid_argument("X lives in a different ambient space");
    if (2 * x.rank() != ambient)
        throw std::invalid_argument("pairing needs rank(X) = ambient - rank(X); got rank " + std::to_string(x.rank()) +
                                    " in dimension " + std::to_string(ambient));
    x.validate(1e-10);
    std::vector<Eigen::VectorXd> vecs;
    for (int i = 0; i < x.rank(); ++i) vecs.push_back(x.columns.col(i));
    for (int i = 0; i < ambient; ++i) vecs.push_back(Eigen::VectorXd::Unit(ambient, i));
    Frame all = orthonormalize(vecs, 1e-10, ambient);
    Pairing p;
    p.x = x;
    p.complement = Frame(ambient, all.columns.rightCols(ambient - x.rank()));
    p.y = Frame(ambient, (x.columns + p.complement.columns) / std::sqrt(2.0));
    return p;
}

double pairing_min(const Pairing& p, const std::vector<Eigen::VectorXd>& zs) {
    const Eigen::MatrixXd& e = p.x.columns;
    const Eigen::MatrixXd& y = p.y.columns;
    double best = 1e300;
    for (const Eigen::VectorXd& z : zs) {
        Eigen::VectorXd xz = e * (e.transpose() * z);
        Eigen::VectorXd yz = y * (y.transpose() * z);
        Eigen::VectorXd xyz = e * (e.transpose() * yz);
        best = std::min(best, xz.norm() + xyz.norm());
    }
    return best;
}

Frame FanOut::base() const {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(dim(), d);
    for (int l = 0; l < d; ++l) cols(w(l), l) = 1;
    return Frame(dim(), cols);
}

Frame FanOut::window(int l) const {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(dim(), copy_dim);
    for (int i = 0; i < copy_dim; ++i) cols(l * copy_dim + i, i) = 1;
    return Frame(dim(), cols);
}

Frame FanOut::joined(Role role) const {
    Frame one = chain_frame(chain, role);
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(dim(), d * one.rank());
    for (int l = 0; l < d; ++l) cols.block(l * copy_dim, l * one.rank(), copy_dim, one.rank()) = one.columns;
    return Frame(dim(), cols);
}

FanOut build_fanout(int d, const std::vector<std::string>& eps, EtaRule rule, const std::vector<std::string>& eta) {
    if (d < 1) throw std::invalid_argument("fan-out needs d >= 1");
    FanOut f;
    f.d = d;
    f.chain = build_chain(eps, rule, eta);
    f.copy_dim = f.chain.geometry.dim;
    f.program = compile_chain(f.chain);
    return f;
}

FanOutRun run_fanout(const FanOut& f, const Eigen::VectorXd& z0, CheckpointPolicy policy) {
    if (z0.size() != f.dim()) throw std::invalid_argument("z0 dimension does not match the fan-out");
    FanOutRun out;
    for (int l = 0; l < f.d; ++l) out.t.push_back(z0(f.w(l)));
    for (int l = 1; l < f.d; ++l)
        if (std::abs(out.t[l]) > std::abs(out.t[out.alpha])) out.alpha = l;
    const int D = f.copy_dim, m = f.chain.m();
    std::vector<Eigen::VectorXd> parts;
    std::vector<bool> live;
    for (int l = 0; l < f.d; ++l) {
        parts.push_back(z0.segment(l * D, D));
        live.push_back(parts.back().squaredNorm() > 0);
    }
    auto record = [&](const BigNat& pos, int block, int run, bool end) {
        Checkpoint c;
        c.position = pos;
        c.block = block;
        c.run = run;
        c.block_end = end;
        c.vector = Eigen::VectorXd(f.dim());
        std::vector<double> norms;
        double sq = 0;
        for (int l = 0; l < f.d; ++l) {
            c.vector.segment(l * D, D) = parts[l];
            norms.push_back(parts[l].norm());
            sq += parts[l].squaredNorm();
        }
        c.norm = std::sqrt(sq);
        const Eigen::VectorXd& pa = parts[out.alpha];
        Eigen::VectorXd target = Eigen::VectorXd::Zero(D);
        target(block) = out.t[out.alpha];
        c.dist_to_target = (pa - target).norm();
        for (int a = 0; a <= m; ++a) c.probes.push_back(pa(a));
        out.trace.checkpoints.push_back(std::move(c));
        out.copy_norms.push_back(std::move(norms));
    };
    record(BigNat(0u), 0, 0, true);
    const ChainProgram& prog = f.program;
    for (std::size_t q = 0; q < prog.runs.size(); ++q) {
        for (int l = 0; l < f.d; ++l)
            if (live[l]) parts[l] = prog.runs[q].apply(parts[l]);
        const int i = prog.block[q], j = prog.run[q];
        const bool end = j == f.chain.blocks[i - 1].k;
        if (policy == CheckpointPolicy::per_run || end)
            record(prog.position[q], i, policy == CheckpointPolicy::per_run ? j : 0, end);
    }
    return out;
}

Signature divergence_signature(const FanOutRun& run, const FanOut& f) {
    Signature s;
    const int m = f.chain.m();
    s.scale = std::abs(run.t[run.alpha]);
    s.floor = s.scale / 2;
    std::vector<const Checkpoint*> ends;
    for (const Checkpoint& c : run.trace.checkpoints)
        if (c.block_end) ends.push_back(&c);
    std::vector<double> bound(m + 1, 0.0);
    Real acc = 0;
    for (int n = 1; n <= m; ++n) {
        acc += 4 * f.chain.blocks[n - 1].eps;
        bound[n] = to_double(acc);
    }
    s.ok = s.scale > 0 && static_cast<int>(ends.size()) == m + 1;
    if (s.scale == 0) s.failures.push_back("no component along any w^l");
    s.min_norm = 1e300;
    s.min_gap = 1e300;
    for (int n = 1; n < static_cast<int>(ends.size()); ++n) {
        double need = s.scale * std::max(0.5, 1 - bound[n]);
        s.min_norm = std::min(s.min_norm, ends[n]->norm);
        if (!(ends[n]->norm >= need)) {
            s.ok = false;
            s.failures.push_back("block-end norm " + format_double(ends[n]->norm) + " below " + format_double(need));
        }
        double gap = (ends[n]->vector - ends[n - 1]->vector).norm();
        double lower = s.scale * (std::sqrt(2.0) - bound[n - 1] - bound[n]);
        s.min_gap = std::min(s.min_gap, gap);
        if (!(gap >= lower && lower > 0)) {
            s.ok = false;
            s.failures.push_back("block-end gap " + format_double(gap) + " below " + format_double(lower));
        }
    }
    for (std::size_t i = 1; i < run.trace.checkpoints.size(); ++i)
        if (run.trace.checkpoints[i].norm > run.trace.checkpoints[i - 1].norm) {
            s.ok = false;
            s.failures.push_back("norm increased at checkpoint " + std::to_string(i));
        }
    return s;
}

Eigen::VectorXd FiveTuple::embed(const Eigen::VectorXd& z) const {
    if (z.size() != paired_dim()) throw std::invalid_argument("z must have length 2d");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fan.dim());
    for (int l = 0; l < fan.d; ++l) {
        out(fan.w(l)) = z(l);
        out(f[l]) = z(fan.d + l);
    }
    return out;
}

Frame FiveTuple::x() const { return fan.base(); }

Frame FiveTuple::y() const {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(fan.dim(), fan.d);
    for (int l = 0; l < fan.d; ++l) {
        cols(fan.w(l), l) = 1 / std::sqrt(2.0);
        cols(f[l], l) = 1 / std::sqrt(2.0);
    }
    return Frame(fan.dim(), cols);
}

FiveTuple build_five(int d, const std::vector<std::string>& eps, EtaRule rule, const std::vector<std::string>& eta) {
    FiveTuple five;
    five.fan = build_fanout(d, eps, rule, eta);
    // f_l: the last coordinate of copy l, which lies in F_l
    for (int l = 0; l < d; ++l) five.f.push_back((l + 1) * five.fan.copy_dim - 1);
    return five;
}

DispatchResult dispatch_and_run(const FiveTuple& five, const Eigen::VectorXd& z, CheckpointPolicy policy) {
    if (!(z.norm() > 0)) throw std::invalid_argument("z must be nonzero");
    const FanOut& fan = five.fan;
    Eigen::VectorXd zf = five.embed(z);
    DispatchResult r;
    r.u0 = Eigen::VectorXd::Zero(fan.dim());
    r.v0 = Eigen::VectorXd::Zero(fan.dim());
    for (int l = 0; l < fan.d; ++l) {
        r.u0(fan.w(l)) = zf(fan.w(l));
        r.v0(fan.w(l)) = (zf(fan.w(l)) + zf(five.f[l])) / 2;
    }
    const double tiny = 1e-14 * z.norm();
    if (r.u0.norm() <= tiny && r.v0.norm() <= tiny)
        throw DispatchError("both Xz and XYz vanish: the pairing invariant is violated");
    if (r.u0.norm() > tiny) {
        r.u_run = true;
        r.u = run_fanout(fan, r.u0, policy);
        r.u_sig = divergence_signature(r.u, fan);
    }
    if (r.v0.norm() > tiny) {
        r.v_run = true;
        r.v = run_fanout(fan, r.v0, policy);
        r.v_sig = divergence_signature(r.v, fan);
    }
    r.verdict = (r.u_run && r.u_sig.ok) || (r.v_run && r.v_sig.ok);
    return r;
}

json dispatch_json(const DispatchResult& r) {
    auto sig = [](bool ran, const Signature& s) {
        json j;
        j["ran"] = ran;
        if (!ran) return j;
        j["ok"] = s.ok;
        j["scale"] = s.scale;
        j["norm_floor"] = s.floor;
        j["min_block_end_norm"] = s.min_norm;
        j["min_block_end_gap"] = s.min_gap;
        j["failures"] = s.failures;
        return j;
    };
    json j;
    j["type"] = "dispatch";
    j["u0_norm"] = r.u0.norm();
    j["v0_norm"] = r.v0.norm();
    j["u"] = sig(r.u_run, r.u_sig);
    j["v"] = sig(r.v_run, r.v_sig);
    j["verdict"] = r.verdict;
    return j;
}

}  // namespace projlab
