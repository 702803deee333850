#include "rcid/indirect_utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcid/errors.hpp"

namespace rcid {

namespace {

// Set partitions of {0..n-1} as restricted growth strings.
std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> rgs(n, 0);
    auto rec = [&](auto&& self, int i, int blocks) -> void {
        if (i == n) {
            out.push_back(rgs);
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            rgs[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    if (n == 0)
        return {{}};
    rgs[0] = 0;
    rec(rec, 1, 1);
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

// Joint cumulant of (Y_{gamma_1}, ..., Y_{gamma_n}) for a finite distribution
// over bundles.
double joint_cumulant(const std::vector<Bundle>& budget, const std::vector<double>& prob,
                      const GoodTuple& gamma) {
    const int n = static_cast<int>(gamma.size());
    double out = 0.0;
    for (const auto& rgs : set_partitions(n)) {
        const int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
        double term = 1.0;
        for (int b = 0; b < blocks; ++b) {
            double m = 0.0;
            for (std::size_t i = 0; i < budget.size(); ++i) {
                if (prob[i] == 0.0)
                    continue;
                double p = prob[i];
                for (int j = 0; j < n; ++j)
                    if (rgs[j] == b)
                        p *= budget[i][gamma[j] - 1];
                m += p;
            }
            term *= m;
        }
        const double sign = (blocks - 1) % 2 == 0 ? 1.0 : -1.0;
        out += sign * factorial(blocks - 1) * term;
    }
    return out;
}

void check_index_vector(const ModelSpec& model, std::span<const double> u) {
    if (u.size() != static_cast<std::size_t>(model.goods()))
        throw ConfigError("index vector dimension differs from the number of goods");
}

} // namespace

double closed_form_v(const ModelSpec& model, std::span<const double> u) {
    check_index_vector(model, u);
    const auto& table = model.choices();
    double out = 0.0;
    for (std::size_t s = 0; s < table.scenarios.size(); ++s) {
        const double w = table.scenarios[s].weight;
        if (w == 0.0)
            continue;
        if (table.smoothing > 0.0) {
            double log_z = 0.0;
            choice_probabilities(table, u, s, &log_z);
            out += w * table.smoothing * log_z;
        } else {
            double best = -std::numeric_limits<double>::infinity();
            bool any = false;
            const auto& dist = table.scenarios[s].disturbance;
            for (std::size_t i = 0; i < table.budget.size(); ++i) {
                if (dist[i].is_excluded())
                    continue;
                any = true;
                double v = dist[i].value();
                for (std::size_t k = 0; k < u.size(); ++k)
                    v += table.budget[i][k] * u[k];
                best = std::max(best, v);
            }
            if (!any)
                throw InfeasibleScenarioError("every bundle is excluded in scenario " +
                                              std::to_string(s));
            out += w * best;
        }
    }
    return out;
}

double closed_form_v_derivative(const ModelSpec& model, std::span<const double> u,
                                const GoodTuple& gamma) {
    check_index_vector(model, u);
    if (gamma.empty())
        throw PreconditionError("derivative multi-index must be nonempty");
    for (int g : gamma)
        if (g < 1 || g > model.goods())
            throw PreconditionError("derivative multi-index out of range");
    const auto& table = model.choices();
    const int n = static_cast<int>(gamma.size());

    if (table.smoothing == 0.0) {
        if (n > 1)
            throw PreconditionError("higher derivatives of V do not exist without smoothing");
        double out = 0.0;
        for (std::size_t s = 0; s < table.scenarios.size(); ++s)
            out += table.scenarios[s].weight * argmax_average(table, u, s)[gamma[0] - 1];
        return out;
    }

    const double factor = std::pow(table.smoothing, 1 - n);
    double out = 0.0;
    for (std::size_t s = 0; s < table.scenarios.size(); ++s) {
        const double w = table.scenarios[s].weight;
        if (w == 0.0)
            continue;
        const auto prob = choice_probabilities(table, u, s);
        out += w * factor * joint_cumulant(table.budget, prob, gamma);
    }
    return out;
}

VDerivTable analytic_v_derivatives(const ModelSpec& model, int max_order) {
    if (max_order < 1)
        throw PreconditionError("analytic_v_derivatives: max_order must be >= 1");
    const std::vector<double> zero(model.goods(), 0.0);
    VDerivTable out;
    for (int n = 1; n <= max_order; ++n)
        for (const auto& key : good_multisets(model.goods(), n))
            out.set(key, closed_form_v_derivative(model, zero, key));
    return out;
}

} // namespace rcid
