#include "rcid/asf.hpp"

#include <cmath>
#include <random>

#include "rcid/errors.hpp"

namespace rcid {

namespace {

std::vector<double> ybar_from_indices(const ChoiceTable& table, std::span<const double> u) {
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t s = 0; s < table.scenarios.size(); ++s) {
        const double w = table.scenarios[s].weight;
        if (w == 0.0)
            continue;
        if (table.smoothing > 0.0) {
            const auto p = choice_probabilities(table, u, s);
            for (std::size_t i = 0; i < p.size(); ++i)
                for (std::size_t k = 0; k < out.size(); ++k)
                    out[k] += w * p[i] * table.budget[i][k];
        } else {
            const auto y = argmax_average(table, u, s);
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += w * y[k];
        }
    }
    return out;
}

} // namespace

std::vector<double> ybar_given_beta(const ModelSpec& model, std::span<const double> x,
                                    std::span<const double> beta) {
    return ybar_from_indices(model.choices(), model.indices(x, beta));
}

AsfEvaluator::AsfEvaluator(ModelSpec model, BetaDistribution beta)
    : AsfEvaluator(model, beta,
                   model.is_logit() ? AsfStrategy::ClosedForm : AsfStrategy::Enumeration) {}

AsfEvaluator::AsfEvaluator(ModelSpec model, BetaDistribution beta, AsfStrategy strategy,
                           std::optional<MonteCarloOptions> mc)
    : model_(std::move(model)), beta_(std::move(beta)), strategy_(strategy),
      cache_(std::make_unique<Cache>()) {
    if (beta_.dims() != model_.dims())
        throw ConfigError("beta distribution layout does not match the model");
    if (strategy_ == AsfStrategy::ClosedForm && !model_.is_logit())
        throw ConfigError("closed-form ASF is only available for the logit model");
    if (strategy_ == AsfStrategy::Enumeration && model_.is_logit())
        throw ConfigError("enumeration ASF needs a finite-budget model");
    if (strategy_ != AsfStrategy::MonteCarlo)
        return;

    if (!mc)
        throw ConfigError("Monte Carlo ASF requires a seed");
    if (mc->draws == 0)
        throw ConfigError("Monte Carlo ASF requires at least one draw");
    const auto& table = model_.choices();
    std::mt19937_64 rng(mc->seed);
    std::vector<double> weights;
    for (const auto& s : table.scenarios)
        weights.push_back(s.weight);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    mc_scenario_.reserve(mc->draws);
    mc_shock_.reserve(mc->draws);
    for (std::size_t r = 0; r < mc->draws; ++r) {
        mc_scenario_.push_back(pick(rng));
        std::vector<double> shock(table.budget.size(), 0.0);
        if (table.smoothing > 0.0)
            for (double& z : shock)
                z = table.smoothing * gumbel(rng);
        mc_shock_.push_back(std::move(shock));
    }
}

std::vector<double> AsfEvaluator::simulate(std::span<const double> u) const {
    const auto& table = model_.choices();
    std::vector<double> out(u.size(), 0.0);
    ChoiceTable one;
    one.budget = table.budget;
    one.scenarios.resize(1);
    for (std::size_t r = 0; r < mc_scenario_.size(); ++r) {
        const auto& base = table.scenarios[mc_scenario_[r]].disturbance;
        auto& d = one.scenarios[0].disturbance;
        d.clear();
        for (std::size_t i = 0; i < base.size(); ++i)
            d.push_back(base[i].is_excluded() ? Utility::excluded()
                                              : Utility(base[i].value() + mc_shock_[r][i]));
        const auto y = argmax_average(one, u, 0);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += y[k];
    }
    for (double& v : out)
        v /= static_cast<double>(mc_scenario_.size());
    return out;
}

std::vector<double> AsfEvaluator::evaluate(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(model_.goods()), 0.0);
    for (const auto& point : beta_.support()) {
        const auto u = model_.indices(x, point.beta);
        const auto y = strategy_ == AsfStrategy::MonteCarlo ? simulate(u)
                                                            : ybar_from_indices(model_.choices(), u);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += point.weight * y[k];
    }
    return out;
}

std::vector<double> AsfEvaluator::operator()(std::span<const double> x) const {
    std::vector<double> key(x.begin(), x.end());
    {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->values.find(key);
        if (it != cache_->values.end())
            return it->second;
    }
    auto value = evaluate(x);
    std::lock_guard lock(cache_->mutex);
    return cache_->values.emplace(std::move(key), std::move(value)).first->second;
}

std::size_t AsfEvaluator::cache_size() const {
    std::lock_guard lock(cache_->mutex);
    return cache_->values.size();
}

std::vector<double> asf(const AsfEvaluator& evaluator, std::span<const double> x) {
    return evaluator(x);
}

} // namespace rcid
