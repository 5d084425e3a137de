#include "projlab/block.hpp"

#include <stdexcept>
#include <string>

namespace projlab {

namespace {

// 1 - (1+b^2)^-s, the defect of a level kept by (XYX)^s
Real kept_defect(const BigNat& s, const Real& beta) { return -expm1(-to_real(s) * log1p(beta * beta)); }

TwoSpaceReduction construct(int k, const Real& eps_prime, const Real& eta, const BigNat& a,
                            const std::vector<long>* fixed) {
    if (!(eta > 0 && eta < 1)) throw std::invalid_argument("eta must lie in (0,1)");
    if (!(eps_prime > 0 && eps_prime < 1)) throw std::invalid_argument("eps' must lie in (0,1)");
    if (fixed && static_cast<int>(fixed->size()) != k) throw std::invalid_argument("beta halving list must have k entries");
    TwoSpaceReduction red;
    red.k = k;
    red.eps_prime = eps_prime;
    red.eta = eta;
    red.a = a;
    const Real bound = Real("0.9") * eps_prime;
    red.beta.assign(k + 1, Real(0));
    red.s.assign(k, BigNat(0u));
    red.beta_halvings.assign(k, 0);
    red.beta[k] = eta / 4;
    BigNat floor_s = a;
    for (int j = k; j >= 1; --j) {
        // s(j): (1+beta_{j+1}^2)^-s < bound and s > max(a, s(j+1))
        BigNat s = reduction_exponent(red.beta[j], eps_prime, floor_s);
        red.s[j - 1] = s;
        floor_s = s;
        // beta_j: largest beta_{j+1} 2^-t with 1 - (1+beta_j^2)^-s(j) < bound
        long t;
        if (fixed) {
            t = (*fixed)[j - 1];
        } else {
            Real target = sqrt(bound / to_real(s));
            t = std::max(1L, static_cast<long>(floor(log2(red.beta[j] / target)).convert_to<double>()) - 2);
            while (!(kept_defect(s, ldexp(red.beta[j], -t)) < bound)) ++t;
            while (t > 1 && kept_defect(s, ldexp(red.beta[j], -(t - 1))) < bound) --t;
        }
        red.beta_halvings[j - 1] = t;
        red.beta[j - 1] = ldexp(red.beta[j], -t);
    }
    red.gamma.assign(k + 2, Real(0));
    // e_0, e_1 span X_1 and share beta_1; e_t enters at X_t; e_{k+1} completes X
    red.gamma[0] = red.beta[0];
    for (int t = 1; t <= k + 1; ++t) red.gamma[t] = red.beta[t - 1];

    for (int j = 1; j <= k; ++j) {
        Real worst = 0;
        const Real sr = to_real(red.s[j - 1]);
        for (int t = 0; t <= k + 1; ++t) {
            Real lm = sr * log1p(red.gamma[t] * red.gamma[t]);
            Real dev = t <= j ? -expm1(-lm) : exp(-lm);
            if (dev > worst) worst = dev;
        }
        red.flag_error.push_back(worst);
    }
    red.distance = 0;
    red.min_gamma = red.gamma[0];
    for (const Real& g : red.gamma) {
        Real d = g / sqrt(1 + g * g);
        if (d > red.distance) red.distance = d;
        if (g < red.min_gamma) red.min_gamma = g;
    }
    return red;
}

}  // namespace

BigNat reduction_exponent(const Real& beta, const Real& eps_prime, const BigNat& above) {
    const Real bound = Real("0.9") * eps_prime;
    BigNat s = ceil_compact(floor(-log(bound) / log1p(beta * beta)) + 1);
    BigNat minimal = above + BigNat(1u);
    return s < minimal ? minimal : s;
}

TwoSpaceReduction build_two_space_reduction(const NestedFlag& flag, int x_rank, int e_dim, const Real& eps_prime,
                                            const Real& eta, const BigNat& a) {
    if (x_rank != flag.k + 2) throw ReductionError("X must have rank k+2 to carry the flag");
    if (e_dim < 2 * x_rank)
        throw ReductionError("E has dimension " + std::to_string(e_dim) + ", needs " + std::to_string(2 * x_rank));
    return construct(flag.k, eps_prime, eta, a, nullptr);
}

TwoSpaceReduction rebuild_two_space_reduction(int k, const Real& eps_prime, const Real& eta, const BigNat& a,
                                              const std::vector<long>& beta_halvings) {
    return construct(k, eps_prime, eta, a, &beta_halvings);
}

}  // namespace projlab
