#include "projlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace projlab {

Frame::Frame(int d, Eigen::MatrixXd cols) : ambient_dim(d), columns(std::move(cols)) {
    if (columns.rows() != d) throw std::invalid_argument("frame rows differ from ambient dimension");
}

void Frame::validate(double tol) const {
    if (columns.rows() != ambient_dim) throw std::invalid_argument("frame rows differ from ambient dimension");
    if (columns.cols() > ambient_dim) throw std::invalid_argument("frame has more columns than ambient dimension");
    Eigen::MatrixXd g = columns.transpose() * columns;
    g -= Eigen::MatrixXd::Identity(g.rows(), g.cols());
    if (g.size() > 0 && g.cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("frame columns are not orthonormal");
}

void Projector::validate(double tol) const {
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("projector must be square");
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("projector not symmetric");
    if (operator_norm(matrix * matrix - matrix) > tol) throw std::invalid_argument("projector not idempotent");
    if (source_frame) {
        Eigen::MatrixXd ff = source_frame->columns * source_frame->columns.transpose();
        if (operator_norm(ff - matrix) > tol) throw std::invalid_argument("projector differs from its frame");
    }
}

Frame orthonormalize(const std::vector<Eigen::VectorXd>& vectors, double tol, int ambient_dim) {
    int d = ambient_dim;
    if (d < 0) {
        if (vectors.empty()) throw std::invalid_argument("ambient dimension unknown for empty input");
        d = static_cast<int>(vectors.front().size());
    }
    std::vector<Eigen::VectorXd> kept;
    for (const auto& v0 : vectors) {
        if (v0.size() != d) throw std::invalid_argument("vector length differs from ambient dimension");
        double n0 = v0.norm();
        if (n0 == 0) continue;
        Eigen::VectorXd v = v0 / n0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : kept) v -= q.dot(v) * q;
        double n = v.norm();
        if (n < tol) continue;
        kept.push_back(v / n);
    }
    Eigen::MatrixXd cols(d, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = kept[i];
    return Frame(d, std::move(cols));
}

Frame orthonormalize(const Eigen::MatrixXd& columns, double tol) {
    std::vector<Eigen::VectorXd> vs;
    for (Eigen::Index j = 0; j < columns.cols(); ++j) vs.emplace_back(columns.col(j));
    return orthonormalize(vs, tol, static_cast<int>(columns.rows()));
}

Frame join(const std::vector<Frame>& frames, double tol) {
    if (frames.empty()) throw std::invalid_argument("join of no frames");
    std::vector<Eigen::VectorXd> vs;
    for (const auto& f : frames) {
        if (f.ambient_dim != frames.front().ambient_dim) throw std::invalid_argument("join: ambient mismatch");
        for (Eigen::Index j = 0; j < f.columns.cols(); ++j) vs.emplace_back(f.columns.col(j));
    }
    return orthonormalize(vs, tol, frames.front().ambient_dim);
}

Projector projector(const Frame& f) {
    Projector p;
    p.matrix = f.columns * f.columns.transpose();
    p.source_frame = f;
    return p;
}

double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (std::max(m.rows(), m.cols()) <= 64) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        return svd.singularValues()(0);
    }
    // power iteration on m^T m with Rayleigh quotient stopping
    Eigen::MatrixXd g = m.transpose() * m;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(g.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += 1e-3 * std::sin(1.0 + static_cast<double>(i));
    x.normalize();
    double lambda = 0;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd y = g * x;
        double next = x.dot(y);
        double ny = y.norm();
        if (ny == 0) return 0.0;
        x = y / ny;
        if (it > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

PrincipalAngleData principal_angles(const Frame& a, const Frame& b) {
    if (a.rank() == 0 || b.rank() == 0) throw std::invalid_argument("principal angles of a rank-0 frame");
    if (a.ambient_dim != b.ambient_dim) throw std::invalid_argument("principal angles: ambient mismatch");
    Eigen::MatrixXd c = a.columns.transpose() * b.columns;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
    PrincipalAngleData out;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        out.cosines.push_back(std::clamp(svd.singularValues()(i), 0.0, 1.0));
    return out;
}

double projector_distance(const Projector& p, const Projector& q) { return operator_norm(p.matrix - q.matrix); }

Eigen::MatrixXd power_by_squaring(const Eigen::MatrixXd& m, const BigNat& e) {
    if (m.rows() != m.cols()) throw std::invalid_argument("power of a non-square matrix");
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    std::uint64_t n = e.bit_length();
    if (n == 0) return result;
    Eigen::MatrixXd base = m;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (e.bit(i)) result = result * base;
        if (i + 1 < n) base = base * base;
    }
    return result;
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, const BigNat& e, double tol) {
    double nrm = operator_norm(m);
    if (nrm > 1 + tol) throw std::domain_error("matrix_power: input is not a contraction (norm " + format_double(nrm) + ")");
    return power_by_squaring(m, e);
}

AlternatingResult alternating_limit(const Projector& p, const Projector& q, double tol, int cap) {
    if (!(tol > 0)) throw std::invalid_argument("alternating_limit: tol must be positive");
    AlternatingResult out;
    Eigen::MatrixXd t = p.matrix * q.matrix * p.matrix;
    for (int i = 0; i < cap; ++i) {
        Eigen::MatrixXd next = t * t;
        ++out.iterations;
        double diff = operator_norm(next - t);
        t = std::move(next);
        if (diff < tol) {
            out.limit = t;
            return out;
        }
    }
    out.limit = t;
    out.capped = true;
    return out;
}

Eigen::MatrixXd intersection_projector(const std::vector<Projector>& ps, double tol) {
    if (ps.empty()) throw std::invalid_argument("intersection of no subspaces");
    const Eigen::Index d = ps.front().matrix.rows();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (const auto& p : ps) s += Eigen::MatrixXd::Identity(d, d) - p.matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        if (es.eigenvalues()(i) < tol) out += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    return out;
}

PeriodicRun periodic_product_run(const std::vector<Projector>& subspaces, const std::vector<int>& period,
                                 const Eigen::VectorXd& z0, double tol, long cap) {
    if (period.empty()) throw std::invalid_argument("periodic_product_run: empty period");
    for (int i : period)
        if (i < 0 || i >= static_cast<int>(subspaces.size())) throw std::invalid_argument("period index out of range");
    PeriodicRun out;
    Eigen::VectorXd target = intersection_projector(subspaces) * z0;
    Eigen::VectorXd z = z0;
    BigNat position(0u);
    const BigNat step(static_cast<std::uint64_t>(period.size()));
    for (long n = 1; n <= cap; ++n) {
        Eigen::VectorXd prev = z;
        for (int i : period) z = subspaces[static_cast<std::size_t>(i)].matrix * z;
        position += step;
        Checkpoint c;
        c.position = position;
        c.vector = z;
        c.norm = z.norm();
        c.dist_to_target = (z - target).norm();
        out.trace.checkpoints.push_back(std::move(c));
        out.periods = n;
        if ((z - prev).norm() < tol) {
            out.limit = z;
            out.distance_to_intersection = (z - target).norm();
            return out;
        }
    }
    out.capped = true;
    out.limit = z;
    out.distance_to_intersection = (z - target).norm();
    return out;
}

json to_json(const Frame& f) {
    json cols = json::array();
    for (Eigen::Index j = 0; j < f.columns.cols(); ++j) {
        json c = json::array();
        for (Eigen::Index i = 0; i < f.columns.rows(); ++i) c.push_back(f.columns(i, j));
        cols.push_back(std::move(c));
    }
    return json{{"ambient_dim", f.ambient_dim}, {"columns", std::move(cols)}};
}

Frame frame_from_json(const json& j) {
    int d = j.at("ambient_dim").get<int>();
    const json& cols = j.at("columns");
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (static_cast<int>(cols[c].size()) != d) throw std::invalid_argument("frame column length mismatch");
        for (int i = 0; i < d; ++i) m(i, static_cast<Eigen::Index>(c)) = cols[c][static_cast<std::size_t>(i)].get<double>();
    }
    return Frame(d, std::move(m));
}

json to_json(const Projector& p) {
    json cols = json::array();
    for (Eigen::Index j = 0; j < p.matrix.cols(); ++j) {
        json c = json::array();
        for (Eigen::Index i = 0; i < p.matrix.rows(); ++i) c.push_back(p.matrix(i, j));
        cols.push_back(std::move(c));
    }
    json out{{"ambient_dim", p.dim()}, {"matrix", std::move(cols)}};
    if (p.source_frame) out["source_frame"] = to_json(*p.source_frame);
    return out;
}

Projector projector_from_json(const json& j) {
    int d = j.at("ambient_dim").get<int>();
    const json& cols = j.at("matrix");
    Projector p;
    p.matrix.resize(d, d);
    for (int c = 0; c < d; ++c)
        for (int i = 0; i < d; ++i) p.matrix(i, c) = cols.at(static_cast<std::size_t>(c)).at(static_cast<std::size_t>(i)).get<double>();
    if (j.contains("source_frame")) p.source_frame = frame_from_json(j.at("source_frame"));
    return p;
}

}  // namespace projlab
