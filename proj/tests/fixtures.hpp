// Shared scenarios and independent oracles for the test suites. Nothing in
// here calls into the library's own evaluation code paths.
#pragma once

#include <cmath>
#include <vector>

#include "rcid/model.hpp"

namespace fixtures {

inline rcid::ModelSpec logit2(bool outside, std::vector<double> alphas = {0.0, 0.0}) {
    return rcid::ModelSpec({1, 1}, rcid::AnalyticLogit{std::move(alphas), outside});
}

inline rcid::BetaDistribution mixture_13() {
    return rcid::BetaDistribution::discrete({1, 1}, {{1, 1}, {1, 3}}, {0.5, 0.5});
}

inline rcid::BetaDistribution unit_point() {
    return rcid::BetaDistribution::point_mass({1, 1}, {1, 1});
}

/// Logit choice probabilities written out directly.
inline std::vector<double> softmax(const std::vector<double>& v, bool outside) {
    double z = outside ? 1.0 : 0.0;
    for (double a : v)
        z += std::exp(a);
    std::vector<double> p;
    for (double a : v)
        p.push_back(std::exp(a) / z);
    return p;
}

/// d p_k / d u_j for the logit.
inline double softmax_d1(const std::vector<double>& p, int k, int j) {
    return p[k] * ((k == j ? 1.0 : 0.0) - p[j]);
}

/// d^2 p_k / d u_i d u_j for the logit.
inline double softmax_d2(const std::vector<double>& p, int k, int i, int j) {
    const double dki = k == i ? 1.0 : 0.0;
    const double dkj = k == j ? 1.0 : 0.0;
    const double dij = i == j ? 1.0 : 0.0;
    return p[k] * ((dki - p[i]) * (dkj - p[j]) - p[j] * (dij - p[i]));
}

/// Two-good bundle model used across suites: six scenarios with Gumbel
/// smoothing, one of them restricted to {(0,0),(1,0)}.
inline rcid::FiniteBundle six_scenarios() {
    rcid::FiniteBundle fb;
    fb.smoothing = 1.0;
    fb.scenarios = {
        {0.20, {0.5, -0.3}, {{1, 2, 0.8}}, std::nullopt},
        {0.15, {-0.4, 0.6}, {{1, 2, -0.5}}, std::nullopt},
        {0.20, {0.1, 0.2}, {{1, 2, 0.3}}, std::nullopt},
        {0.15, {1.0, -1.0}, {{1, 2, 1.0}}, std::nullopt},
        {0.10, {-0.2, -0.1}, {}, std::nullopt},
        {0.20, {0.3, 0.4}, {{1, 2, 0.2}}, std::vector<rcid::Bundle>{{0, 0}, {1, 0}}},
    };
    return fb;
}

inline rcid::BetaDistribution four_point() {
    return rcid::BetaDistribution::discrete({1, 1}, {{1.0, 0.5}, {1.5, 1.0}, {0.8, 2.0}, {1.2, 1.5}},
                                            {0.1, 0.2, 0.3, 0.4});
}

} // namespace fixtures
