#ifndef RCID_MODEL_HPP_
#define RCID_MODEL_HPP_

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rcid {

/// One characteristic of one good, both 1-based: the coordinate x_{good,ch}
/// and its slope beta_{good,ch}.
struct CharSlot {
    int good = 1;
    int ch = 1;
    auto operator<=>(const CharSlot&) const = default;
};

/// Canonical name of the moment E[beta_{g1,c1} ... beta_{gM,cM}].
///
/// The pairs are kept lexicographically sorted, so two indices naming the
/// same product compare equal regardless of the order they were given in.
class MomentIndex {
public:
    MomentIndex() = default;
    explicit MomentIndex(std::vector<CharSlot> pairs);

    static MomentIndex power(CharSlot slot, int exponent);

    std::size_t order() const { return pairs_.size(); }
    const std::vector<CharSlot>& pairs() const { return pairs_; }

    /// Sorted good multiset of the index.
    std::vector<int> goods() const;
    bool contains(CharSlot slot) const;
    MomentIndex with(CharSlot slot) const;

    /// Rendering used in reports, e.g. "b[1:1]*b[2:1]".
    std::string to_string() const;

    auto operator<=>(const MomentIndex&) const = default;

private:
    std::vector<CharSlot> pairs_;
};

/// Utility of a bundle for one disturbance scenario. An excluded bundle
/// stands for D(y, eps) = -infinity and carries no floating value.
class Utility {
public:
    struct Excluded {};

    Utility(double value) : value_(value) {} // NOLINT(implicit)
    Utility(Excluded) {}                     // NOLINT(implicit)

    static Utility excluded() { return Utility(Excluded{}); }

    bool is_excluded() const { return !value_.has_value(); }
    double value() const;

    bool operator==(const Utility&) const = default;

private:
    std::optional<double> value_;
};

using Bundle = std::vector<double>;

enum class IndexForm {
    Linear, // u_k = beta_k'(x_k - c_k)
    Power,  // u_k = sum_l x_{k,l}^{rho_{k,l}}, slopes read as exponents
};

struct AnalyticLogit {
    std::vector<double> alphas;
    bool outside_good = false;
};

struct PairTerm {
    int first = 1;
    int second = 2;
    double value = 0.0;
};

struct BundleScenario {
    double weight = 1.0;
    std::vector<double> intercepts;
    std::vector<PairTerm> pairwise;
    // Consideration set B(eps); nullopt means the whole lattice.
    std::optional<std::vector<Bundle>> consideration;
};

struct FiniteBundle {
    std::vector<BundleScenario> scenarios;
    // Empty means {0,1}^K.
    std::vector<Bundle> lattice;
    // Scale of iid Gumbel bundle shocks added on top of each scenario;
    // 0 gives the pure finite-support model.
    double smoothing = 0.0;
};

struct GenericScenario {
    double weight = 1.0;
    std::vector<Utility> disturbance; // aligned with GenericFiniteEps::budget
};

struct GenericFiniteEps {
    std::vector<Bundle> budget;
    std::vector<GenericScenario> scenarios;
    double smoothing = 0.0;
};

/// Finite-budget form shared by every model variant. Logit becomes the
/// unit-vector budget (plus the zero bundle for an outside good) with one
/// scenario whose disturbance is the intercept vector and smoothing 1.
struct ChoiceTable {
    struct Scenario {
        double weight = 1.0;
        std::vector<Utility> disturbance;
    };
    std::vector<Bundle> budget;
    std::vector<Scenario> scenarios;
    double smoothing = 0.0;
};

class ModelSpec {
public:
    using Variant = std::variant<AnalyticLogit, FiniteBundle, GenericFiniteEps>;

    ModelSpec(std::vector<int> dims, Variant variant,
              std::vector<double> center = {},
              IndexForm form = IndexForm::Linear,
              bool nonnegative_domain = false);

    int goods() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t covariate_dim() const { return offsets_.back(); }
    const std::vector<double>& center() const { return center_; }
    IndexForm index_form() const { return form_; }
    bool nonnegative_domain() const { return nonnegative_domain_; }
    const Variant& variant() const { return variant_; }
    const ChoiceTable& choices() const { return choices_; }

    bool is_logit() const { return std::holds_alternative<AnalyticLogit>(variant_); }
    bool has_finite_budget() const { return !is_logit(); }
    double smoothing() const { return choices_.smoothing; }

    /// Bounds-checked slot constructor.
    CharSlot slot(int good, int ch) const;
    std::size_t flat(CharSlot slot) const;

    /// Utility indices (u_1, ..., u_K) at covariates x for slopes beta.
    std::vector<double> indices(std::span<const double> x,
                                std::span<const double> beta) const;

private:
    std::vector<int> dims_;
    std::vector<std::size_t> offsets_;
    Variant variant_;
    std::vector<double> center_;
    IndexForm form_;
    bool nonnegative_domain_;
    ChoiceTable choices_;
};

struct UnivariateFinite {
    std::vector<double> values;
    std::vector<double> weights;
};

struct SupportPoint {
    double weight = 0.0;
    std::vector<double> beta;
};

/// Finite-support distribution of the slope vector.
class BetaDistribution {
public:
    struct DiscretePoints {
        std::vector<std::vector<double>> points;
        std::vector<double> weights;
    };
    struct ProductUnivariate {
        std::vector<UnivariateFinite> coords;
    };
    using Variant = std::variant<DiscretePoints, ProductUnivariate>;

    static BetaDistribution discrete(std::vector<int> dims,
                                     std::vector<std::vector<double>> points,
                                     std::vector<double> weights);
    static BetaDistribution point_mass(std::vector<int> dims, std::vector<double> beta);
    static BetaDistribution product(std::vector<int> dims,
                                    std::vector<UnivariateFinite> coords);

    const std::vector<int>& dims() const { return dims_; }
    std::size_t dim() const { return support_.front().beta.size(); }
    const Variant& variant() const { return variant_; }
    bool is_product() const { return std::holds_alternative<ProductUnivariate>(variant_); }

    /// Expanded support (the full product grid for ProductUnivariate),
    /// zero-weight points dropped.
    const std::vector<SupportPoint>& support() const { return support_; }
    std::size_t flat(CharSlot slot) const;

private:
    BetaDistribution(std::vector<int> dims, Variant variant);

    std::vector<int> dims_;
    Variant variant_;
    std::vector<SupportPoint> support_;
};

/// sum_k y_k u_k + D(y, eps_s), or excluded when y is outside B(eps_s).
Utility latent_utility(const ModelSpec& model, std::span<const double> y,
                       std::span<const double> x, std::span<const double> beta,
                       std::size_t scenario);

/// Maximizer of the latent utility for one scenario; tied maximizers are
/// averaged uniformly.
Bundle solve_choice(const ModelSpec& model, std::span<const double> x,
                    std::span<const double> beta, std::size_t scenario);

/// Argmax average on an explicit choice table, for utility indices u.
Bundle argmax_average(const ChoiceTable& table, std::span<const double> u,
                      std::size_t scenario);

/// Gibbs probabilities over table.budget for one scenario (smoothing > 0);
/// excluded bundles get probability 0. When `log_partition` is given it
/// receives log sum_y exp((y.u + D(y)) / s).
std::vector<double> choice_probabilities(const ChoiceTable& table, std::span<const double> u,
                                         std::size_t scenario,
                                         double* log_partition = nullptr);

/// Exact moment E[beta_idx] under a finite-support distribution.
double true_moment(const BetaDistribution& dist, const MomentIndex& idx);

} // namespace rcid

#endif // RCID_MODEL_HPP_
