#include "projlab/real.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace projlab {

Real to_real(const BigNat& n) {
    Real out = 0;
    for (const auto& c : n.chunks()) {
        unsigned w = boost::multiprecision::msb(c.value) + 1;
        cpp_int top = c.value;
        long shift = static_cast<long>(c.shift);
        if (w > 256) {
            top >>= (w - 256);
            shift += static_cast<long>(w - 256);
        }
        out += boost::multiprecision::ldexp(Real(top), shift);
    }
    return out;
}

Real real_pi() { return boost::math::constants::pi<Real>(); }

double to_double(const Real& x) {
    if (x == 0) return 0.0;
    if (abs(x) < Real(std::numeric_limits<double>::denorm_min())) return 0.0;
    return x.convert_to<double>();
}

std::string format_real(const Real& x) {
    if (x == 0) return "0";
    return x.str(17, std::ios::scientific);
}

Real parse_real(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty real");
    auto slash = text.find('/');
    if (slash != std::string_view::npos)
        return parse_real(text.substr(0, slash)) / parse_real(text.substr(slash + 1));
    try {
        return Real(std::string(text));
    } catch (const std::exception&) {
        throw std::invalid_argument("not a real number: " + std::string(text));
    }
}

std::string round_down_text(const Real& x) {
    if (x <= 0) throw std::invalid_argument("round_down_text needs a positive value");
    std::string s = format_real(x);
    Real step = x * Real("1e-16");
    Real y = x;
    while (parse_real(s) > x) {
        y -= step;
        s = format_real(y);
    }
    return s;
}

double log10_of(const Real& x) { return log10(x).convert_to<double>(); }

BigNat ceil_compact(const Real& x) {
    if (x <= 0) return BigNat(0u);
    Real c = ceil(x);
    int e = 0;
    frexp(c, &e);
    if (e <= 60) return BigNat(c.convert_to<std::uint64_t>());
    Real m = ceil(ldexp(x, 60 - e));  // m < 2^60 (or == 2^60)
    return BigNat::shifted(cpp_int(m.convert_to<std::uint64_t>()), static_cast<std::uint64_t>(e - 60));
}

RealMatrix RealMatrix::identity(int n) {
    RealMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

RealMatrix operator*(const RealMatrix& x, const RealMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("RealMatrix shape mismatch");
    RealMatrix z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            if (x(i, k) == 0) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += x(i, k) * y(k, j);
        }
    return z;
}

RealMatrix transpose(const RealMatrix& x) {
    RealMatrix t(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
    return t;
}

SymEigen jacobi_eigen(RealMatrix a, const Real& abs_floor) {
    const int n = a.rows;
    if (a.cols != n) throw std::invalid_argument("jacobi_eigen needs a square matrix");
    RealMatrix v = RealMatrix::identity(n);
    const Real tol("1e-60");
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const Real apq = a(p, q);
                if (apq == 0) continue;
                if (abs(apq) <= tol * sqrt(abs(a(p, p) * a(q, q))) || abs(apq) <= abs_floor) continue;
                rotated = true;
                Real theta = (a(q, q) - a(p, p)) / (2 * apq);
                Real t = 1 / (abs(theta) + sqrt(theta * theta + 1));
                if (theta < 0) t = -t;
                Real c = 1 / sqrt(t * t + 1), s = t * c;
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        Real arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = c * arp - s * arq;
                        a(r, q) = a(q, r) = s * arp + c * arq;
                    }
                    Real vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        if (!rotated) break;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    SymEigen out;
    out.vectors = RealMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.values.push_back(a(order[k], order[k]));
        for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

}  // namespace projlab
