#pragma once

#include "projlab/word.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace projlab {

// Random trials of ||psi(A)E - psi(B)E|| <= sum_i |psi|_i ||A_iE - B_iE||.
// Words have length at most 50 over three letters; A_i, B_i are orthogonal
// projections. Trials cycle through E = I, E a projection commuting with
// every A_i and B_i, and A_i, B_i projecting onto subspaces of E.
struct PropSuiteResult {
    int trials = 0;
    int failures = 0;
    double max_ratio = 0;  // largest lhs / rhs over trials with rhs > 1e-6
    double min_slack = 0;  // smallest rhs + tol - lhs
    std::vector<std::string> failed;  // words of failing trials
};

PropSuiteResult prop_suite(std::uint64_t seed, int trials, double tol = 1e-9);

}  // namespace projlab
