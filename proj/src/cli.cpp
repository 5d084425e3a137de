#include "projlab/cli.hpp"

#include "projlab/chain.hpp"
#include "projlab/five.hpp"
#include "projlab/props.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace projlab {

namespace {

const std::vector<std::string> kCommands = {"build-block", "build-five", "assemble", "run-orbit",
                                            "verify",      "dispatch",   "baseline", "prop-suite"};
const std::vector<std::string> kFlags = {"von-neumann", "halperin"};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Flat key=value file turned into option tokens placed right after the
// subcommand, so explicit flags (which come later) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (std::find(kFlags.begin(), kFlags.end(), key) != kFlags.end()) {
            if (value == "true" || value == "1" || value == "yes") tokens.push_back("--" + key);
            continue;
        }
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    auto sub = std::find_first_of(args.begin(), args.end(), kCommands.begin(), kCommands.end());
    if (sub == args.end()) throw UsageError("no subcommand given");
    args.insert(sub + 1, tokens.begin(), tokens.end());
    return args;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

struct ChainOpts {
    int blocks = 3;
    int eps_base = 9;
    std::string eps;  // explicit comma list, overrides the geometric schedule
    std::string eta_rule = "neighbors";
    std::string eta;
};

void add_chain_options(CLI::App* sub, ChainOpts& o) {
    sub->add_option("--blocks", o.blocks, "number of blocks m")->check(CLI::Range(1, 64));
    sub->add_option("--eps-base", o.eps_base, "eps_i = base^-i")->check(CLI::Range(2, 1000000));
    sub->add_option("--eps", o.eps, "explicit comma-separated eps schedule");
    sub->add_option("--eta-rule", o.eta_rule, "neighbors | explicit")
        ->check(CLI::IsMember({"neighbors", "explicit"}));
    sub->add_option("--eta", o.eta, "comma-separated eta values for --eta-rule explicit");
}

std::vector<std::string> chain_eps(const ChainOpts& o) {
    return o.eps.empty() ? geometric_eps_schedule(o.blocks, o.eps_base) : split_list(o.eps);
}

GluedTriple chain_from(const ChainOpts& o) {
    if (o.eta_rule == "explicit") return build_chain(chain_eps(o), EtaRule::explicit_values, split_list(o.eta));
    return build_chain(chain_eps(o));
}

json chain_config(const ChainOpts& o) {
    json c;
    c["blocks"] = o.eps.empty() ? o.blocks : static_cast<int>(split_list(o.eps).size());
    c["eps"] = chain_eps(o);
    c["eta_rule"] = o.eta_rule;
    if (o.eta_rule == "explicit") c["eta"] = split_list(o.eta);
    return c;
}

struct Ctx {
    std::ostream& out;
    std::ostream& err;
    std::filesystem::path dir;

    std::string path(const std::string& given, const std::string& fallback) const {
        return given.empty() ? (dir / fallback).string() : given;
    }
    void write(const std::string& p, const std::string& text) const {
        std::filesystem::path fp(p);
        if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path());
        write_text_file(p, text);
        out << "wrote " << p << "\n";
    }
};

std::string list_failures(const std::vector<std::string>& fs) {
    std::string s;
    for (const std::string& f : fs) s += "  " + f + "\n";
    return s;
}

int cmd_build_block(const Ctx& ctx, const std::string& eps, const std::string& eta, const std::string& alpha0,
                    const std::string& a, int ambient, const std::string& out) {
    BlockCertificate c = build_block(eps, eta, alpha0, BigNat::parse(a));
    if (ambient > 0) {
        if (ambient < c.e_dim)
            throw UsageError("--ambient-dim " + std::to_string(ambient) + " below the block dimension 2(k+2) = " +
                             std::to_string(c.e_dim));
        c.embedding = Eigen::MatrixXd::Identity(ambient, c.e_dim);
        if (c.frames_embedded) {
            c.x_frame = block_x_frame(c);
            c.y_frame = block_y_frame(c);
        }
    }
    ctx.write(ctx.path(out, "block.json"), dump_json(to_json(c)));
    ctx.out << "k = " << c.k << ", block dimension " << c.e_dim << ", achieved error "
            << format_double(to_double(c.achieved_error)) << " (3 eps = " << format_double(3 * to_double(c.eps))
            << ")\n";
    if (!c.holds()) {
        ctx.err << "bound violated: build_block certificate checks (flag error, display, reduction, distance, "
                   "achieved error) do not all hold\n";
        return kExitBound;
    }
    return kExitOk;
}

int cmd_assemble(const Ctx& ctx, const ChainOpts& o, const std::string& out) {
    json report;
    report["command"] = "assemble";
    report["config"] = chain_config(o);
    try {
        GluedTriple t = chain_from(o);
        report["chain"] = chain_json(t);
        ctx.write(ctx.path(out, "chain.json"), dump_json(report));
        for (int i = 1; i <= t.m(); ++i)
            ctx.out << "block " << i << ": k = " << t.blocks[i - 1].k << ", glued error "
                    << format_double(t.block_errors[i - 1]) << "\n";
        if (!t.preconditions_hold) {
            ctx.err << "bound violated: build_chain window precondition ||W_i - R E_i|| < delta_i\n";
            return kExitBound;
        }
        for (int i = 1; i <= t.m(); ++i)
            if (!(t.block_errors[i - 1] < 4 * to_double(t.blocks[i - 1].eps))) {
                ctx.err << "bound violated: build_chain glued block " << i << " error not below 4 eps_i\n";
                return kExitBound;
            }
        return kExitOk;
    } catch (const ChainError& e) {
        report["error"] = e.what();
        report["failing_block"] = e.block;
        ctx.write(ctx.path(out, "chain.json"), dump_json(report));
        ctx.err << "bound violated: build_chain, block " << e.block << ": " << e.what() << "\n";
        return kExitBound;
    }
}

int cmd_run_orbit(const Ctx& ctx, const ChainOpts& o, const std::string& policy, const std::string& csv,
                  const std::string& out) {
    json report;
    report["command"] = "run-orbit";
    report["config"] = chain_config(o);
    report["config"]["checkpoints"] = policy;
    GluedTriple t;
    try {
        t = chain_from(o);
    } catch (const ChainError& e) {
        report["error"] = e.what();
        report["failing_block"] = e.block;
        ctx.write(ctx.path(out, "orbit_report.json"), dump_json(report));
        ctx.err << "bound violated: build_chain, block " << e.block << ": " << e.what() << "\n";
        return kExitBound;
    }
    OrbitTrace tr = run_orbit(t, t.port(1), policy == "per-run" ? CheckpointPolicy::per_run : CheckpointPolicy::per_block);
    VerifyReport rep = verify_divergence(tr, t);
    report["chain"] = chain_json(t);
    report["verify"] = rep.details;
    report["ok"] = rep.ok;
    report["failures"] = rep.failures;
    ctx.write(ctx.path(csv, "orbit.csv"), tr.to_csv());
    ctx.write(ctx.path(out, "orbit_report.json"), dump_json(report));
    ctx.out << "checkpoints " << tr.checkpoints.size() << ", final distance to e_" << t.m() + 1 << " "
            << format_double(tr.checkpoints.back().dist_to_target) << ", min block-end norm "
            << format_double(rep.details["min_block_end_norm"].get<double>()) << "\n";
    if (!rep.ok) {
        ctx.err << "bound violated: verify_divergence\n" << list_failures(rep.failures);
        return kExitBound;
    }
    return kExitOk;
}

int cmd_verify(const Ctx& ctx, const std::string& file, const std::string& out) {
    json j;
    try {
        j = read_json_file(file);
    } catch (const std::exception& e) {
        throw UsageError("cannot read certificate " + file + ": " + e.what());
    }
    if (j.value("type", "") != "block_certificate") throw UsageError(file + " is not a block certificate");
    VerifyReport rep = verify_certificate(j);
    json report;
    report["command"] = "verify";
    report["config"] = {{"certificate", std::filesystem::path(file).filename().string()}};
    report["ok"] = rep.ok;
    report["failures"] = rep.failures;
    report["details"] = rep.details;
    ctx.write(ctx.path(out, "verify_report.json"), dump_json(report));
    if (!rep.ok) {
        ctx.err << "bound violated: verify_certificate\n" << list_failures(rep.failures);
        return kExitBound;
    }
    ctx.out << "certificate verified\n";
    return kExitOk;
}

std::vector<double> read_vector(const std::string& file) {
    std::string text;
    try {
        text = read_text_file(file);
    } catch (const std::exception&) {
        throw UsageError("cannot read vector file " + file);
    }
    std::string t = trim(text);
    std::vector<double> v;
    if (!t.empty() && t[0] == '[') {
        try {
            v = json::parse(t).get<std::vector<double>>();
        } catch (const std::exception&) {
            throw UsageError("vector file is not a JSON array of numbers");
        }
        return v;
    }
    for (char& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream in(t);
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad number in vector file: " + tok);
        }
    }
    return v;
}

int cmd_build_five(const Ctx& ctx, int dim, const ChainOpts& o, std::uint64_t seed, const std::string& out) {
    if (dim < 2 || dim % 2) throw UsageError("--dim must be even and at least 2");
    FiveTuple five = build_five(dim / 2, chain_eps(o));
    const int n = five.paired_dim();
    Eigen::MatrixXd px = five.x().columns * five.x().columns.transpose();
    Eigen::MatrixXd py = five.y().columns * five.y().columns.transpose();
    // XYz against (Xz + sum <f_l, z> w^l) / 2 over the paired basis
    double formula = 0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd z = five.embed(Eigen::VectorXd::Unit(n, i));
        Eigen::VectorXd expect = Eigen::VectorXd::Zero(five.fan.dim());
        for (int l = 0; l < five.fan.d; ++l) expect(five.fan.w(l)) = (z(five.fan.w(l)) + z(five.f[l])) / 2;
        formula = std::max(formula, (px * (py * z) - expect).norm());
    }
    std::vector<bool> verdicts;
    bool all = true;
    for (int i = 0; i < n; ++i) {
        DispatchResult r = dispatch_and_run(five, Eigen::VectorXd::Unit(n, i));
        verdicts.push_back(r.verdict);
        all = all && r.verdict;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    double pair_min = 1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = g(rng);
        Eigen::VectorXd zf = five.embed(z.normalized());
        pair_min = std::min(pair_min, std::max((px * zf).norm(), (px * (py * zf)).norm()));
    }
    json report;
    report["command"] = "build-five";
    report["config"] = chain_config(o);
    report["config"]["dim"] = dim;
    report["config"]["seed"] = seed;
    report["d"] = five.fan.d;
    report["copy_dim"] = five.fan.copy_dim;
    report["ambient_dim"] = five.fan.dim();
    report["paired_dim"] = n;
    report["f_coordinates"] = five.f;
    report["xyz_formula_max_error"] = formula;
    report["pairing_min_max_norm_sampled"] = pair_min;
    report["basis_verdicts"] = verdicts;
    report["chain"] = chain_json(five.fan.chain);
    const bool ok = all && formula < 1e-12 && pair_min >= 1 / std::sqrt(10.0) - 1e-9;
    report["ok"] = ok;
    ctx.write(ctx.path(out, "five.json"), dump_json(report));
    ctx.out << "five subspaces in dimension " << five.fan.dim() << " (pairing on " << n << "), basis verdicts "
            << (all ? "all positive" : "NOT all positive") << "\n";
    if (!ok) {
        ctx.err << "bound violated: build_pairing / dispatch_and_run checks on the basis sweep\n";
        return kExitBound;
    }
    return kExitOk;
}

int cmd_dispatch(const Ctx& ctx, const std::string& zfile, int dim, const ChainOpts& o, const std::string& policy,
                 const std::string& out) {
    std::vector<double> zv = read_vector(zfile);
    if (dim == 0) dim = static_cast<int>(zv.size());
    if (static_cast<int>(zv.size()) != dim) throw UsageError("vector length differs from --dim");
    if (dim < 2 || dim % 2) throw UsageError("vector length must be even (coordinates on w^l then f_l)");
    Eigen::VectorXd z = Eigen::Map<Eigen::VectorXd>(zv.data(), dim);
    if (!(z.norm() > 0)) throw UsageError("z must be nonzero");
    FiveTuple five = build_five(dim / 2, chain_eps(o));
    const CheckpointPolicy p = policy == "per-run" ? CheckpointPolicy::per_run : CheckpointPolicy::per_block;
    json report;
    report["command"] = "dispatch";
    report["config"] = chain_config(o);
    report["config"]["dim"] = dim;
    report["config"]["checkpoints"] = policy;
    report["config"]["z"] = zv;
    DispatchResult r;
    try {
        r = dispatch_and_run(five, z, p);
    } catch (const DispatchError& e) {
        report["error"] = e.what();
        ctx.write(ctx.path(out, "dispatch.json"), dump_json(report));
        ctx.err << "bound violated: dispatch_and_run: " << e.what() << "\n";
        return kExitBound;
    }
    report["result"] = dispatch_json(r);
    if (r.u_run) ctx.write((ctx.dir / "dispatch_u.csv").string(), r.u.trace.to_csv());
    if (r.v_run) ctx.write((ctx.dir / "dispatch_v.csv").string(), r.v.trace.to_csv());
    ctx.write(ctx.path(out, "dispatch.json"), dump_json(report));
    ctx.out << "u0 = Xz norm " << format_double(r.u0.norm()) << ", v0 = XYz norm " << format_double(r.v0.norm())
            << ", verdict " << (r.verdict ? "diverging trace found" : "NO diverging trace") << "\n";
    if (!r.verdict) {
        ctx.err << "bound violated: dispatch_and_run found no trace with the divergence signature\n";
        return kExitBound;
    }
    return kExitOk;
}

int cmd_baseline(const Ctx& ctx, bool vn, bool halperin, double angle, int iters, std::uint64_t seed, double tol,
                 long max_periods, const std::string& csv, const std::string& out) {
    if (vn == halperin) throw UsageError("baseline needs exactly one of --von-neumann, --halperin");
    json report;
    report["command"] = "baseline";
    std::ostringstream rows;
    bool ok = true;
    if (vn) {
        report["config"] = {{"mode", "von-neumann"}, {"angle", angle}, {"iters", iters}};
        const double th = angle * std::acos(-1.0) / 180;
        Eigen::MatrixXd l1(2, 1), l2(2, 1);
        l1 << 1, 0;
        l2 << std::cos(th), std::sin(th);
        Eigen::MatrixXd p1 = projector(Frame(2, l1)).matrix, p2 = projector(Frame(2, l2)).matrix;
        Eigen::VectorXd z(2);
        z << 1, 0;
        rows << "pairs,norm,expected\n";
        double worst = 0;
        for (int n = 0; n <= iters; ++n) {
            if (n > 0) z = p1 * (p2 * z);
            const double expect = std::pow(std::cos(th), 2 * n);
            worst = std::max(worst, std::abs(z.norm() - expect) / expect);
            rows << n << "," << format_double(z.norm()) << "," << format_double(expect) << "\n";
        }
        report["final_norm"] = z.norm();
        report["expected"] = std::pow(std::cos(th), 2 * iters);
        report["max_relative_error"] = worst;
        ok = worst <= 1e-9;
        ctx.out << "after " << iters << " alternation pairs: norm " << format_double(z.norm()) << "\n";
    } else {
        report["config"] = {{"mode", "halperin"}, {"seed", seed}, {"tol", tol}, {"max_periods", max_periods}};
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        std::vector<Projector> ps;
        for (int s = 0; s < 3; ++s) {
            Eigen::MatrixXd m(8, 4);
            for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
            ps.push_back(projector(orthonormalize(m)));
        }
        Eigen::VectorXd z0(8);
        for (int i = 0; i < 8; ++i) z0(i) = g(rng);
        z0.normalize();
        PeriodicRun run = periodic_product_run(ps, {0, 1, 2}, z0, tol, max_periods);
        rows << "period,norm\n";
        for (const Checkpoint& c : run.trace.checkpoints)
            rows << c.position.to_string() << "," << format_double(c.norm) << "\n";
        report["periods"] = run.periods;
        report["capped"] = run.capped;
        report["distance_to_intersection"] = run.distance_to_intersection;
        report["final_norm"] = run.limit.norm();
        ok = !run.capped;
        ctx.out << "periodic product: Cauchy to " << format_double(tol) << " after " << run.periods
                << " periods\n";
    }
    report["ok"] = ok;
    ctx.write(ctx.path(csv, "baseline.csv"), rows.str());
    ctx.write(ctx.path(out, "baseline.json"), dump_json(report));
    if (!ok) {
        ctx.err << "bound violated: baseline convergence check\n";
        return kExitBound;
    }
    return kExitOk;
}

int cmd_prop_suite(const Ctx& ctx, std::uint64_t seed, int trials, const std::string& out) {
    PropSuiteResult r = prop_suite(seed, trials);
    json report;
    report["command"] = "prop-suite";
    report["config"] = {{"seed", seed}, {"trials", trials}, {"tol", 1e-9}};
    report["trials"] = r.trials;
    report["failures"] = r.failures;
    report["failed_words"] = r.failed;
    report["max_ratio"] = r.max_ratio;
    report["min_slack"] = r.min_slack;
    report["ok"] = r.failures == 0;
    ctx.write(ctx.path(out, "prop_suite.json"), dump_json(report));
    ctx.out << r.trials - r.failures << "/" << r.trials << " trials satisfy the word continuity bound\n";
    if (r.failures) {
        ctx.err << "bound violated: check_word_continuity in " << r.failures << " trials\n";
        return kExitBound;
    }
    return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    CLI::App app{"projection-iterate divergence laboratory", "projlab"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir;
    app.add_option("--out-dir", out_dir, "output directory (default: $PROJLAB_OUT or .)");
    std::string config_unused;
    app.add_option("--config", config_unused, "flat key=value file; explicit flags override it");

    std::string eps, eta, alpha0 = "1/2", a = "1", out_file, csv_file, cert, zfile;
    int ambient = 0, dim = 0, iters = 20, trials = 1000;
    double angle = 45, tol = 1e-8;
    long max_periods = 10000;
    std::uint64_t seed = 7;
    bool vn = false, halperin = false;
    std::string policy = "per-run";
    ChainOpts chain;

    auto* bb = app.add_subcommand("build-block", "build and certify one block");
    bb->add_option("--eps", eps, "target error, decimal or p/q")->required();
    bb->add_option("--eta", eta, "bound on ||X - Y||")->required();
    bb->add_option("--alpha0", alpha0, "first flag scale");
    bb->add_option("--a", a, "lower bound for the reduction exponents");
    bb->add_option("--ambient-dim", ambient, "embed the block in this many dimensions")->check(CLI::NonNegativeNumber);
    bb->add_option("--out", out_file, "certificate path");

    auto* as = app.add_subcommand("assemble", "glue blocks into X, Y, Z");
    add_chain_options(as, chain);
    as->add_option("--out", out_file, "report path");

    auto* ro = app.add_subcommand("run-orbit", "run the divergent orbit from e_1 and verify it");
    add_chain_options(ro, chain);
    ro->add_option("--checkpoints", policy, "per-run | per-block")->check(CLI::IsMember({"per-run", "per-block"}));
    ro->add_option("--csv", csv_file, "trace CSV path");
    ro->add_option("--out", out_file, "report path");

    auto* ve = app.add_subcommand("verify", "re-derive a block certificate and compare");
    ve->add_option("--certificate", cert, "certificate JSON")->required();
    ve->add_option("--out", out_file, "report path");

    auto* bf = app.add_subcommand("build-five", "five-subspace system with the pairing checks");
    bf->add_option("--dim", dim, "dimension of the paired space (even)")->required();
    add_chain_options(bf, chain);
    bf->add_option("--seed", seed, "sampling seed");
    bf->add_option("--out", out_file, "report path");

    auto* di = app.add_subcommand("dispatch", "run u0 = Xz and v0 = XYz");
    di->add_option("--z", zfile, "vector file: coordinates on w^1..w^d then f_1..f_d")->required();
    di->add_option("--dim", dim, "paired dimension (defaults to the vector length)");
    add_chain_options(di, chain);
    di->add_option("--checkpoints", policy, "per-run | per-block")->check(CLI::IsMember({"per-run", "per-block"}));
    di->add_option("--out", out_file, "report path");

    auto* ba = app.add_subcommand("baseline", "convergent baselines");
    ba->add_flag("--von-neumann", vn, "two lines in the plane");
    ba->add_flag("--halperin", halperin, "periodic product of three subspaces of R^8");
    ba->add_option("--angle", angle, "angle between the lines, degrees")->check(CLI::Range(0.0, 90.0));
    ba->add_option("--iters", iters, "alternation pairs")->check(CLI::Range(0, 100000));
    ba->add_option("--seed", seed, "seed for the random subspaces");
    ba->add_option("--tol", tol, "Cauchy tolerance")->check(CLI::PositiveNumber);
    ba->add_option("--max-periods", max_periods, "period cap")->check(CLI::PositiveNumber);
    ba->add_option("--csv", csv_file, "CSV path");
    ba->add_option("--out", out_file, "report path");

    auto* ps = app.add_subcommand("prop-suite", "random word continuity trials");
    ps->add_option("--seed", seed, "seed");
    ps->add_option("--trials", trials, "number of trials")->check(CLI::Range(1, 100000000));
    ps->add_option("--out", out_file, "report path");

    try {
        std::vector<std::string> args = expand_config(raw);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    if (out_dir.empty()) {
        const char* env = std::getenv("PROJLAB_OUT");
        out_dir = env && *env ? env : ".";
    }
    Ctx ctx{out, err, std::filesystem::path(out_dir)};
    try {
        if (bb->parsed()) return cmd_build_block(ctx, eps, eta, alpha0, a, ambient, out_file);
        if (as->parsed()) return cmd_assemble(ctx, chain, out_file);
        if (ro->parsed()) return cmd_run_orbit(ctx, chain, policy, csv_file, out_file);
        if (ve->parsed()) return cmd_verify(ctx, cert, out_file);
        if (bf->parsed()) return cmd_build_five(ctx, dim, chain, seed, out_file);
        if (di->parsed()) return cmd_dispatch(ctx, zfile, dim, chain, policy, out_file);
        if (ba->parsed())
            return cmd_baseline(ctx, vn, halperin, angle, iters, seed, tol, max_periods, csv_file, out_file);
        if (ps->parsed()) return cmd_prop_suite(ctx, seed, trials, out_file);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace projlab
