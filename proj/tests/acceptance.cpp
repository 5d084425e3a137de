// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "projlab/block.hpp"
#include "projlab/chain.hpp"
#include "projlab/five.hpp"
#include "projlab/props.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace projlab;

namespace {

using Dec = boost::multiprecision::cpp_dec_float_100;
using Bin = boost::multiprecision::cpp_bin_float_100;
using BinMat = Eigen::Matrix<Bin, Eigen::Dynamic, Eigen::Dynamic>;
using BinVec = Eigen::Matrix<Bin, Eigen::Dynamic, 1>;

std::string real_text(const Real& x) { return x.str(70, std::ios_base::scientific); }
Dec dec(const Real& x) { return Dec(real_text(x)); }
Bin bin(const Real& x) { return Bin(real_text(x)); }

// Smallest k with cos(pi/2k)^k > 1 - eps by direct scan; ties within 1e-60 are not greater.
int scan_k(const std::string& eps_text) {
    Dec eps(eps_text);
    const Dec pi = boost::math::constants::pi<Dec>();
    for (int k = 1;; ++k)
        if (boost::multiprecision::pow(boost::multiprecision::cos(pi / (2 * k)), k) - (1 - eps) > Dec("1e-60"))
            return k;
}

BinMat bin_projector(const std::vector<BinVec>& vecs) {
    std::vector<BinVec> q;
    for (BinVec v : vecs) {
        for (const BinVec& b : q) v -= b * b.dot(v);
        for (const BinVec& b : q) v -= b * b.dot(v);
        q.push_back(v / sqrt(v.dot(v)));
    }
    BinMat p = BinMat::Zero(vecs[0].size(), vecs[0].size());
    for (const BinVec& b : q) p += b * b.transpose();
    return p;
}

BinMat bin_power(BinMat base, boost::multiprecision::cpp_int n) {
    BinMat acc = BinMat::Identity(base.rows(), base.cols());
    while (n > 0) {
        if (n & 1) acc = acc * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return acc;
}

// phi(W, X_1..X_k) u rebuilt from the flag scalars in 100-digit arithmetic.
double flag_error_oracle(const NestedFlag& f) {
    const int k = f.k, n = k + 2;
    const Bin xi = bin(f.xi);
    auto unit = [n](int i) {
        BinVec e = BinVec::Zero(n);
        e(i) = 1;
        return e;
    };
    std::vector<BinVec> gens;
    for (int i = 0; i <= k; ++i) {
        BinVec h = unit(0) * cos(xi * i) + unit(1) * sin(xi * i);
        if (i < k) h += unit(2 + i) * bin(f.alpha[i]);
        gens.push_back(h);
    }
    const BinMat w = bin_projector({unit(0), unit(1)});
    BinVec x = unit(0);
    for (int j = 1; j <= k; ++j) {
        BinMat p = bin_projector(std::vector<BinVec>(gens.begin(), gens.begin() + j + 1));
        x = bin_power(p * w * p, boost::multiprecision::cpp_int(f.r[j - 1].to_string())) * x;
    }
    BinVec d = x - unit(1);
    return static_cast<double>(sqrt(d.dot(d)));
}

struct Line {
    bool pass = true;
    std::ostringstream note;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

std::string label(const BlockCertificate& c) { return "eps " + c.eps_text + ", eta " + c.eta_text; }

void criterion(int n, const std::string& title, const std::function<void(Line&)>& body) {
    Line line;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(line);
    } catch (const std::exception& e) {
        line.pass = false;
        line.note << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!line.pass) ++failures;
    std::printf("criterion %2d %s  %s (%.3f s):%s\n", n, line.pass ? "PASS" : "FAIL", title.c_str(), secs,
                line.note.str().c_str());
    std::fflush(stdout);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

int main() {
    GluedTriple chain;
    bool have_chain = false;
    double chain_build_secs = 0;
    auto need_chain = [&]() -> const GluedTriple& {
        if (!have_chain) {
            const auto t0 = std::chrono::steady_clock::now();
            chain = build_chain(geometric_eps_schedule(3, 9));
            chain_build_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            have_chain = true;
        }
        return chain;
    };

    criterion(1, "k(eps) matches a brute-force scan", [](Line& l) {
        const std::vector<std::string> eps = {"0.6", "0.5", "0.25", "0.1"};
        const std::vector<int> fixed = {2, 3, -1, 12};
        double worst_ms = 0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const Real e = parse_real(eps[i]);
            const auto t0 = std::chrono::steady_clock::now();
            const int k = k_of_eps(e);
            worst_ms = std::max(worst_ms, std::chrono::duration<double, std::milli>(
                                              std::chrono::steady_clock::now() - t0).count());
            const int oracle = scan_k(eps[i]);
            l.note << " eps " << eps[i] << " -> " << k;
            l.require(k == oracle, "scan gives " + std::to_string(oracle));
            if (fixed[i] > 0) l.require(k == fixed[i], "expected " + std::to_string(fixed[i]));
            else l.require(k >= 5 && k <= 7, "expected 6 +- 1");
        }
        l.note << "; slowest call " << fmt(worst_ms) << " ms";
        l.require(worst_ms < 1, "a call took 1 ms or more");
    });

    criterion(2, "nested flag at eps = 1/9 reaches v within 2 eps", [](Line& l) {
        const Real eps = parse_real("1/9");
        const int k = k_of_eps(eps);
        QuarterCircle qc = QuarterCircle::canonical(k, k + 2);
        NestedFlag f = build_nested_flag(qc, eps, parse_real("1/2"));
        const double err = to_double(f.error);
        const double oracle = flag_error_oracle(f);
        l.note << " k " << k << ", ambient " << qc.ambient_dim() << ", error " << fmt(err) << ", 100-digit dense "
               << fmt(oracle);
        l.require(k == scan_k("0.11111111111111111111111111111111111111111111111111111111111111111111111111"),
                  "k differs from the scan");
        l.require(qc.ambient_dim() == k + 2 && f.basis.rows() == k + 2, "ambient dimension is not k + 2");
        l.require(f.error < Real("0.9") * 2 * eps, "error not below 0.9 * 2 eps");
        l.require(err < 0.2, "error not below 0.2");
        l.require(std::abs(err - oracle) < 1e-9, "dense oracle disagrees");
    });

    criterion(3, "(XYX)^m e follows the scalar closed form", [](Line& l) {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ug(1e-4, 1.0);
        double worst = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const double g = ug(rng);
            const std::uint64_t m = 1 + rng() % 1000000;
            Eigen::MatrixXd ef(3, 1), yf(3, 1);
            ef << 1, 0, 0;
            yf << 1, 0, g;
            yf /= std::sqrt(1 + g * g);
            Eigen::MatrixXd p = projector(Frame(3, ef)).matrix, q = projector(Frame(3, yf)).matrix;
            Eigen::VectorXd got = matrix_power(p * q * p, BigNat(m)) * Eigen::Vector3d(1, 0, 0);
            const double want = to_double(exp(-Real(m) * log1p(Real(g) * Real(g))));
            worst = std::max(worst, (got - Eigen::Vector3d(want, 0, 0)).norm());
        }
        l.note << " 100 trials, worst deviation " << fmt(worst);
        l.require(worst <= 1e-9, "deviation above 1e-9");
    });

    criterion(4, "reduction bounds on every certificate", [&](Line& l) {
        std::vector<BlockCertificate> certs = {build_block("1/9", "1/2")};
        for (const BlockCertificate& b : need_chain().blocks) certs.push_back(b);
        for (const BlockCertificate& c : certs) {
            const TwoSpaceReduction& red = c.reduction;
            const Dec margin = Dec("0.9") * dec(c.eps_prime);
            Dec worst_ratio = 0;
            const std::string name = label(c);
            for (int j = 1; j <= red.k; ++j) {
                // spectral norm of (XYX)^s(j) - X_j is the largest eigenvalue deviation
                const Dec s = dec(to_real(red.s[j - 1]));
                Dec dev = 0;
                for (int t = 0; t <= red.k + 1; ++t) {
                    const Dec g = dec(red.gamma[t]);
                    const Dec mu_s = boost::multiprecision::exp(-s * boost::multiprecision::log1p(g * g));
                    const Dec d = t <= j ? 1 - mu_s : mu_s;
                    if (d > dev) dev = d;
                }
                const Dec stored = dec(red.flag_error[j - 1]);
                l.require(boost::multiprecision::abs(dev - stored) <= Dec("1e-8") * dev + Dec("1e-300"),
                          "stored flag error differs from the oracle");
                l.require(dev < margin, "flag error not below 0.9 eps'");
                if (dev / margin > worst_ratio) worst_ratio = dev / margin;
            }
            double dist_oracle = 0;
            if (c.frames_embedded) {
                dist_oracle = operator_norm(projector(c.x_frame).matrix - projector(c.y_frame).matrix);
            } else {
                for (const Real& g : red.gamma) dist_oracle = std::max(dist_oracle, to_double(g / sqrt(1 + g * g)));
            }
            l.require(std::abs(dist_oracle - to_double(red.distance)) < 1e-10, "||X - Y|| differs from the oracle");
            l.require(red.distance < Real("0.9") * c.eta, "||X - Y|| not below 0.9 eta");
            l.note << " " << name << ": min relative slack in (XYX)^s - X_j < 0.9 eps' "
                   << fmt(static_cast<double>(1 - worst_ratio))
                   << ", ||X-Y|| / eta " << fmt(to_double(red.distance / c.eta)) << ";";
        }
    });

    criterion(5, "block error below 3 eps and robust below 4 eps", [&](Line& l) {
        BlockCertificate c = build_block("1/9", "1/2");
        l.require(c.achieved_error < 3 * c.eps, "achieved error not below 3 eps");
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<RobustnessResult> trials = robustness_trials(c, 100, 2024);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        int good = 0;
        double worst = 0, closest = 0;
        for (const RobustnessResult& r : trials) {
            if (r.distance < c.delta && r.error < 4 * to_double(c.eps)) ++good;
            worst = std::max(worst, r.error);
            closest = std::max(closest, r.distance_over_delta);
        }
        l.note << " achieved " << fmt(to_double(c.achieved_error)) << " < " << fmt(3 * to_double(c.eps)) << "; "
               << good << "/100 trials below 4 eps = " << fmt(4 * to_double(c.eps)) << ", worst " << fmt(worst)
               << ", max ||W - ZE|| / delta " << fmt(closest) << ", trials " << fmt(secs) << " s";
        l.require(good == 100, "not every trial stayed below 4 eps");
        l.require(secs < 60, "trials took 60 s or more");
        // deeper blocks: the glued chain perturbs each block by its neighbours
        const GluedTriple& t = need_chain();
        for (int i = 1; i <= t.m(); ++i) {
            l.require(t.blocks[i - 1].achieved_error < 3 * t.blocks[i - 1].eps, "chain block achieved error");
            l.require(t.block_errors[i - 1] < 4 * to_double(t.blocks[i - 1].eps), "glued chain block error");
            l.note << "; glued block " << i << " error " << fmt(t.block_errors[i - 1]) << " < "
                   << fmt(4 * to_double(t.blocks[i - 1].eps));
        }
    });

    double chain_min_gap = 0;
    criterion(6, "three-block chain orbit does not converge", [&](Line& l) {
        const GluedTriple& t = need_chain();
        const auto t0 = std::chrono::steady_clock::now();
        OrbitTrace tr = run_orbit(t, t.port(1), CheckpointPolicy::per_run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        VerifyReport rep = verify_divergence(tr, t);
        for (const std::string& f : rep.failures) l.require(false, f);
        std::vector<const Checkpoint*> ends;
        for (const Checkpoint& c : tr.checkpoints)
            if (c.block_end) ends.push_back(&c);
        l.require(ends.size() == 4, "expected four block-end checkpoints");
        Real bound = 0;
        double min_norm = 1, min_gap = 10;
        for (int n = 1; n < static_cast<int>(ends.size()); ++n) {
            bound += 4 * t.blocks[n - 1].eps;
            const double err = ends[n]->dist_to_target;
            l.require(err <= to_double(bound), "block-end error above 4 sum eps");
            l.note << " error after block " << n << " " << fmt(err) << " <= " << fmt(to_double(bound)) << ";";
            min_norm = std::min(min_norm, ends[n]->norm);
            min_gap = std::min(min_gap, (ends[n]->vector - ends[n - 1]->vector).norm());
        }
        l.require(bound == Real(364) / 729, "4 sum eps is not 364/729");
        l.require(min_norm >= 0.5, "a block-end norm is below 1/2");
        l.require(tr.norms_nonincreasing(), "checkpoint norms increase somewhere");
        l.require(min_gap >= 0.4, "consecutive block-end distance below 0.4");
        double probe = 0;
        for (int j = 0; j < 3; ++j) probe = std::max(probe, std::abs(ends.back()->probes[j]));
        l.require(probe <= 0.5, "final weak probe above 0.5");
        chain_min_gap = min_gap;
        l.note << " min block-end norm " << fmt(min_norm) << ", min block-end gap " << fmt(min_gap)
               << ", max final probe on e_1..e_3 " << fmt(probe) << ", dimension " << t.geometry.dim << ", "
               << tr.checkpoints.size() << " checkpoints, orbit " << fmt(secs) << " s + chain build "
               << fmt(chain_build_secs) << " s";
    });

    criterion(7, "von Neumann and Halperin baselines converge", [&](Line& l) {
        const double th = std::acos(-1.0) / 4;
        Eigen::MatrixXd l1(2, 1), l2(2, 1);
        l1 << 1, 0;
        l2 << std::cos(th), std::sin(th);
        Eigen::MatrixXd p1 = projector(Frame(2, l1)).matrix, p2 = projector(Frame(2, l2)).matrix;
        Eigen::VectorXd z = Eigen::Vector2d(1, 0);
        double worst = 0;
        for (int n = 1; n <= 20; ++n) {
            z = p1 * (p2 * z);
            worst = std::max(worst, std::abs(z.norm() * std::ldexp(1.0, n) - 1));
        }
        l.require(worst <= 1e-9, "two-line norms differ from 2^-n");
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g;
        std::vector<Projector> ps;
        for (int s = 0; s < 3; ++s) {
            Eigen::MatrixXd m(8, 4);
            for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
            ps.push_back(projector(orthonormalize(m)));
        }
        Eigen::VectorXd z0(8);
        for (int i = 0; i < 8; ++i) z0(i) = g(rng);
        PeriodicRun run = periodic_product_run(ps, {0, 1, 2}, z0.normalized(), 1e-8, 10000);
        l.require(!run.capped, "periodic product not Cauchy within 10^4 periods");
        l.note << " two lines: max relative error " << fmt(worst) << "; three subspaces: Cauchy to 1e-8 after "
               << run.periods << " periods, distance to the intersection " << fmt(run.distance_to_intersection);
        if (chain_min_gap > 0)
            l.note << "; contrast: chain block-end steps never drop below " << fmt(chain_min_gap);
    });

    criterion(8, "pairing formula and five-tuple dispatch", [](Line& l) {
        FiveTuple five = build_five(4, geometric_eps_schedule(3, 9));
        const int n = five.paired_dim();
        const Eigen::MatrixXd& xc = five.x().columns;
        const Eigen::MatrixXd yc = five.y().columns;
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd z = five.embed(Eigen::VectorXd::Unit(n, i));
            Eigen::VectorXd got = xc * (xc.transpose() * (yc * (yc.transpose() * z)));
            Eigen::VectorXd want = Eigen::VectorXd::Zero(five.fan.dim());
            for (int a = 0; a < five.fan.d; ++a) want(five.fan.w(a)) = (z(five.fan.w(a)) + z(five.f[a])) / 2;
            worst = std::max(worst, (got - want).norm());
        }
        l.require(worst <= 1e-12, "XYz differs from the pairing formula");
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g;
        int positive = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd z(n);
            for (int i = 0; i < n; ++i) z(i) = g(rng);
            if (dispatch_and_run(five, z.normalized()).verdict) ++positive;
        }
        l.require(positive == 100, "some dispatch verdict negative");
        l.note << " ambient " << five.fan.dim() << ", basis sweep worst " << fmt(worst) << ", " << positive
               << "/100 random unit z positive";
    });

    criterion(9, "word continuity property suite", [](Line& l) {
        PropSuiteResult r = prop_suite(7, 1000);
        l.require(r.trials == 1000 && r.failures == 0, std::to_string(r.failures) + " trials violate the bound");
        l.note << " " << r.trials - r.failures << "/" << r.trials << " hold, min slack " << fmt(r.min_slack)
               << ", max lhs/rhs " << fmt(r.max_ratio);
    });

    criterion(10, "certificate round trip", [&](Line& l) {
        std::vector<BlockCertificate> certs = {build_block("1/9", "1/2")};
        for (const BlockCertificate& b : need_chain().blocks) certs.push_back(b);
        for (const BlockCertificate& c : certs) {
            const std::string text = dump_json(to_json(c));
            const json parsed = json::parse(text);
            VerifyReport rep = verify_certificate(parsed);
            for (const std::string& f : rep.failures) l.require(false, label(c) + ": " + f);
            l.require(rep.details.value("byte_identical", false), label(c) + ": re-serialization differs");
            const std::string again = dump_json(to_json(certificate_from_json(parsed)));
            l.require(again == text, label(c) + ": parse and dump is not byte-identical");
            l.note << " " << label(c) << " (" << text.size() << " bytes) ok;";
        }
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures ? 1 : 0;
}
