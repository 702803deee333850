#ifndef RCID_ASF_HPP_
#define RCID_ASF_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "rcid/model.hpp"

namespace rcid {

/// Y-bar(x, beta): demand with the disturbance integrated out exactly.
/// Smoothed tables use Gibbs probabilities, unsmoothed ones the
/// tie-averaged argmax, each weighted over the scenarios.
std::vector<double> ybar_given_beta(const ModelSpec& model, std::span<const double> x,
                                    std::span<const double> beta);

enum class AsfStrategy {
    ClosedForm,  // logit formula
    Enumeration, // finite budgets, scenario by scenario
    MonteCarlo,  // simulated disturbances, seeded
};

struct MonteCarloOptions {
    std::uint64_t seed = 0;
    std::size_t draws = 20000;
};

/// Average structural function x -> sum_s w_s Y-bar(x, beta_s).
///
/// Results are memoized per covariate point behind a mutex, so one
/// evaluator may be shared across threads. Monte Carlo draws are taken
/// once at construction and reused at every x.
class AsfEvaluator {
public:
    AsfEvaluator(ModelSpec model, BetaDistribution beta);
    AsfEvaluator(ModelSpec model, BetaDistribution beta, AsfStrategy strategy,
                 std::optional<MonteCarloOptions> mc = std::nullopt);

    std::vector<double> operator()(std::span<const double> x) const;

    const ModelSpec& model() const { return model_; }
    const BetaDistribution& beta() const { return beta_; }
    AsfStrategy strategy() const { return strategy_; }
    std::size_t cache_size() const;

private:
    std::vector<double> evaluate(std::span<const double> x) const;
    std::vector<double> simulate(std::span<const double> u) const;

    struct Cache {
        std::mutex mutex;
        std::map<std::vector<double>, std::vector<double>> values;
    };

    ModelSpec model_;
    BetaDistribution beta_;
    AsfStrategy strategy_;
    // Monte Carlo: scenario index and per-bundle Gumbel shocks per draw.
    std::vector<std::size_t> mc_scenario_;
    std::vector<std::vector<double>> mc_shock_;
    std::unique_ptr<Cache> cache_;
};

std::vector<double> asf(const AsfEvaluator& evaluator, std::span<const double> x);

} // namespace rcid

#endif // RCID_ASF_HPP_
