#ifndef RCID_NUMDIFF_HPP_
#define RCID_NUMDIFF_HPP_

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "rcid/asf.hpp"
#include "rcid/model.hpp"

namespace rcid {

enum class FdKind { Central, Forward };

struct FdScheme {
    FdKind kind = FdKind::Central;
    // Step in covariate units; nullopt picks the per-order default.
    std::optional<double> base_step;
    int richardson_levels = 1;
    // Worker threads for stencil-node evaluation; results do not depend on it.
    int threads = 1;

    static FdScheme central() { return {}; }
    static FdScheme forward() { return {FdKind::Forward, std::nullopt, 2, 1}; }

    double step_for_order(int order) const;

    /// Throws ConfigError on a non-positive step, negative level count, or a
    /// central scheme on a nonnegative-orthant model.
    void validate(const ModelSpec& model) const;
};

const char* to_string(FdKind kind);

/// Finite-difference weights for the `deriv`-th derivative at 0 on the given
/// offsets (unit spacing), by Fornberg's recursion.
std::vector<double> stencil_weights(const std::vector<double>& offsets, int deriv);

/// Integer offsets of the 1-D stencil used for a derivative of this order.
std::vector<int> stencil_offsets(FdKind kind, int deriv);

struct DerivKey {
    int good = 1;    // target demand component k
    MomentIndex idx; // differentiation variables (gamma, xi)
    auto operator<=>(const DerivKey&) const = default;
};

/// Estimates of d_(gamma,xi) Ybar_k at the center for every (k, gamma, xi)
/// with 1 <= |gamma| <= order, plus Ybar itself at the center.
class DerivativeTable {
public:
    DerivativeTable() = default;
    DerivativeTable(int order, FdScheme scheme, std::vector<double> center, std::vector<int> dims);

    int order() const { return order_; }
    int goods() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    const FdScheme& scheme() const { return scheme_; }
    const std::vector<double>& center() const { return center_; }

    void set(int good, const MomentIndex& idx, double value);
    bool contains(int good, const MomentIndex& idx) const;
    double at(int good, const MomentIndex& idx) const;
    const std::map<DerivKey, double>& entries() const { return entries_; }

    const std::vector<double>& level() const { return level_; }
    void set_level(std::vector<double> level) { level_ = std::move(level); }

private:
    int order_ = 0;
    std::vector<int> dims_;
    FdScheme scheme_;
    std::vector<double> center_;
    std::vector<double> level_;
    std::map<DerivKey, double> entries_;
};

/// Estimate of d_idx Ybar_k at the model center.
double mixed_partial(const AsfEvaluator& evaluator, int good, const MomentIndex& idx,
                     const FdScheme& scheme);

/// Every derivative of orders 1..max_order; stencil nodes shared between
/// entries are evaluated once.
DerivativeTable derivative_table(const AsfEvaluator& evaluator, int max_order,
                                 const FdScheme& scheme);

} // namespace rcid

#endif // RCID_NUMDIFF_HPP_
