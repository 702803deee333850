#ifndef RCID_WELFARE_HPP_
#define RCID_WELFARE_HPP_

#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "rcid/asf.hpp"
#include "rcid/tables.hpp"

namespace rcid {

/// A value with a flag set when it was extrapolated beyond the trust region.
template <class T>
struct Flagged {
    T value{};
    bool extrapolated = false;
};

inline constexpr double kDefaultTrustRadius = 1.0;
inline constexpr int kDefaultQuadratureNodes = 32;

/// Taylor polynomial of V around index 0 from its derivatives there.
struct TaylorV {
    VDerivTable derivs;
    double trust_radius = kDefaultTrustRadius;
};

/// V differences by integrating the ASF of a model whose first slopes are 1.
struct PathIntegralV {
    std::shared_ptr<const AsfEvaluator> evaluator;
    int nodes = kDefaultQuadratureNodes;
};

using VModel = std::variant<TaylorV, PathIntegralV>;

/// V(u) - V(0); flagged when max|u_k| exceeds the trust radius.
Flagged<double> taylor_v(const TaylorV& v, std::span<const double> u);

/// Gradient of the Taylor polynomial at u.
Flagged<std::vector<double>> taylor_gradient(const TaylorV& v, std::span<const double> u);

/// V(xF) - V(xI) by Gauss-Legendre quadrature of Ybar along t xF + (1-t) xI.
/// Needs beta_{k,1} = 1 on the support and both endpoints equal to the
/// center outside the first characteristic of each good.
double path_integral_v(const AsfEvaluator& evaluator, std::span<const double> x_initial,
                       std::span<const double> x_final, int nodes = kDefaultQuadratureNodes);

/// V(u) - V(0) under either representation.
Flagged<double> v_difference(const VModel& v, std::span<const double> u);

enum class Weighting { Unweighted, InverseAbsBeta11 };

const char* to_string(Weighting w);
Weighting parse_weighting(const std::string& name);

/// sum_s w_s c_s [V(u_s) - V(0)] with u_s the indices at x for support point
/// s and c_s = 1 or 1/|beta_11|.
Flagged<double> average_indirect_utility(const VModel& v, const ModelSpec& model,
                                         const BetaDistribution& beta, std::span<const double> x,
                                         Weighting weighting);

/// Same aggregate with the closed-form V of the model.
double average_indirect_utility_exact(const ModelSpec& model, const BetaDistribution& beta,
                                      std::span<const double> x, Weighting weighting);

struct DemandPoint {
    double weight = 0.0;
    std::vector<double> beta;
    std::vector<double> demand;
    bool extrapolated = false;
};

/// Ybar(x, beta_s) per support point from the Taylor gradient of V.
std::vector<DemandPoint> counterfactual_demand(const TaylorV& v, const ModelSpec& model,
                                               const BetaDistribution& beta,
                                               std::span<const double> x);

/// Ybar(x, beta_s) per support point from the model itself.
std::vector<DemandPoint> counterfactual_demand(const AsfEvaluator& evaluator,
                                               const BetaDistribution& beta,
                                               std::span<const double> x);

struct ScalarDistribution {
    std::vector<double> values;
    std::vector<double> weights;
};

/// Tabulated nondecreasing map, linear between grid points.
struct MonotoneMap {
    std::vector<double> grid;
    std::vector<double> values;
    double operator()(double a) const;
};

/// F_W^{-1} o F_eta on a uniform grid over the support of eta. Both CDFs are
/// the piecewise-linear interpolants through the mid-rank points of the
/// discrete distributions.
MonotoneMap quantile_match_vprime(const ScalarDistribution& w, const ScalarDistribution& eta,
                                  std::size_t grid_points = 101);

/// For a one-good model: (Ybar(x, beta), index at x) over the beta support.
std::pair<ScalarDistribution, ScalarDistribution>
one_good_distributions(const AsfEvaluator& evaluator, std::span<const double> x);

} // namespace rcid

#endif // RCID_WELFARE_HPP_
