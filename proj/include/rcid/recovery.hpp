#ifndef RCID_RECOVERY_HPP_
#define RCID_RECOVERY_HPP_

#include <map>
#include <optional>
#include <vector>

#include "rcid/asf.hpp"
#include "rcid/indexing.hpp"
#include "rcid/numdiff.hpp"
#include "rcid/tables.hpp"

namespace rcid {

inline constexpr double kDefaultRelevance = 1e-7;

enum class Route { Scale, Independence, VKnown };

const char* to_string(Route route);
Route parse_route(const std::string& name);

struct RecoveryConfig {
    Route route = Route::Scale;
    // Scale route: known E[beta_11^M] for M = 1, 2, ...
    std::vector<double> known_scale;
    // Independence route: |E[beta_11]|.
    double abs_mean = 1.0;
    // VKnown route: derivatives of V at the center.
    VDerivTable v_derivs;
    double tau_rel = kDefaultRelevance;

    void validate(int max_order) const;
};

/// One derivative entry d_idx Ybar_good.
struct Term {
    int good = 1;
    MomentIndex idx;
};

/// True when the good multiset of (num.idx, num.good) equals that of
/// (den.idx, den.good).
bool permutation_compatible(const Term& num, const Term& den);

/// d_num / d_den, which equals E[beta_num.idx] / E[beta_den.idx] under the
/// permutation condition.
double ratio_of_moments(const DerivativeTable& table, const Term& num, const Term& den,
                        double tau = kDefaultRelevance);

struct RelevanceEntry {
    GoodTuple goods;
    MomentIndex selected; // characteristic assignment with the largest entry
    int target = 1;       // demand component that was probed
    double magnitude = 0.0;
};

struct ChainResult {
    int order = 0;
    MomentIndex reference;
    // E[beta_idx] / E[beta_reference] for every index of the order.
    std::map<MomentIndex, double> ratios;
    // Parent good tuple each tuple was reached from (root maps to itself).
    std::map<GoodTuple, GoodTuple> parent;
    std::vector<RelevanceEntry> relevance;
};

/// Moment ratios of one order by walking the good-tuple graph from (1,...,1).
ChainResult chain_ratios(const DerivativeTable& table, int order, double tau = kDefaultRelevance);

/// Ratio E[beta_target] / E[beta_reference] along an explicit path of good
/// tuples starting at (1,...,1) and ending at the goods of `target`; each
/// consecutive pair must differ in exactly one component.
double chain_ratio_along(const DerivativeTable& table, const std::vector<GoodTuple>& path,
                         const MomentIndex& target, double tau = kDefaultRelevance);

/// Order-`order` moments from a known E[beta_11^order].
MomentTable recover_moments_scale(const DerivativeTable& table, int order, double known_scale,
                                  double tau = kDefaultRelevance);

enum class Sign { Negative = -1, Indeterminate = 0, Positive = 1 };
const char* to_string(Sign sign);

/// Sign of E[beta_11] read off d Ybar_1 / d x_11 (V is convex).
Sign signed_first_sign(const DerivativeTable& table, double tau = kDefaultRelevance);

/// Order-1 moments with E[beta_11] = sign * abs_mean.
MomentTable independence_first_order(const DerivativeTable& table, double abs_mean,
                                     double tau = kDefaultRelevance);

/// Order M+1 from order M using E[beta_11 beta_(d,e)] = E[beta_11] E[beta_(d,e)]
/// for an anchor (d,e) that avoids slot (1,1).
MomentTable independence_next_order(const DerivativeTable& table, const MomentTable& previous,
                                    double mean_11, double tau = kDefaultRelevance);

/// Orders 1..max_order under independence of beta_11.
std::vector<MomentTable> recover_moments_independence(const DerivativeTable& table, int max_order,
                                                      double abs_mean,
                                                      double tau = kDefaultRelevance);

/// First derivatives of V at the center: Ybar(center).
VDerivTable v_gradient_at_center(const DerivativeTable& table);

/// Derivatives of V of order M+1 from order-M moments. Each sorted key is
/// averaged over its (k, gamma) splits; the spread is kept as discrepancy.
VDerivTable recover_v_derivatives(const DerivativeTable& table, const MomentTable& moments,
                                  double tau = kDefaultRelevance);

/// Order-`order` moments by dividing by supplied derivatives of V.
MomentTable recover_moments_vknown(const DerivativeTable& table, int order,
                                   const VDerivTable& v_derivs);

/// E[beta_(g,xi)] / E[beta_(g,xi')] for index pairs sharing the good tuple.
double same_good_ratios(const DerivativeTable& table, int good, const MomentIndex& num,
                        const MomentIndex& den, double tau = kDefaultRelevance);

/// E[rho_j] / E[rho_k] for the power-index model, from first derivatives at
/// the all-ones covariate point.
double exponent_moment_ratio(const AsfEvaluator& evaluator, int j, int k, const FdScheme& scheme,
                             double tau = kDefaultRelevance);

/// An externally supplied estimate of d_idx Ybar_good.
struct Estimate {
    Term term;
    double value = 0.0;
};

/// Plug-in estimator: product of numerator/denominator ratios over the steps
/// of a chain. Every step must satisfy the permutation condition.
double plugin_estimate(const std::vector<std::pair<Estimate, Estimate>>& steps,
                       double tau = kDefaultRelevance);

} // namespace rcid

#endif // RCID_RECOVERY_HPP_
