#include "rcid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <map>
#include <numeric>
#include <sstream>

#include "rcid/errors.hpp"

namespace rcid {

namespace {

constexpr double kWeightTolerance = 1e-12;
constexpr double kTieTolerance = 1e-12;

void check_weights(const std::vector<double>& weights, const std::string& what) {
    if (weights.empty())
        throw ConfigError(what + ": no weights");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw ConfigError(what + ": weights must be finite and nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": weights sum to " << total << ", expected 1";
        throw ConfigError(os.str());
    }
}

std::vector<Bundle> binary_lattice(int goods) {
    std::vector<Bundle> out;
    const std::size_t n = std::size_t{1} << goods;
    out.reserve(n);
    for (std::size_t code = 0; code < n; ++code) {
        Bundle y(goods, 0.0);
        for (int k = 0; k < goods; ++k)
            y[k] = static_cast<double>((code >> (goods - 1 - k)) & 1u);
        out.push_back(std::move(y));
    }
    return out;
}

std::ptrdiff_t find_bundle(const std::vector<Bundle>& budget, std::span<const double> y) {
    for (std::size_t i = 0; i < budget.size(); ++i)
        if (std::equal(budget[i].begin(), budget[i].end(), y.begin(), y.end()))
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

void check_smoothing(double s) {
    if (!std::isfinite(s) || s < 0.0)
        throw ConfigError("smoothing scale must be finite and >= 0");
}

ChoiceTable logit_table(const AnalyticLogit& logit, int goods) {
    if (static_cast<int>(logit.alphas.size()) != goods)
        throw ConfigError("logit: expected one intercept per good");
    ChoiceTable table;
    table.smoothing = 1.0;
    ChoiceTable::Scenario only;
    for (int k = 0; k < goods; ++k) {
        Bundle e(goods, 0.0);
        e[k] = 1.0;
        table.budget.push_back(std::move(e));
        only.disturbance.emplace_back(logit.alphas[k]);
    }
    if (logit.outside_good) {
        table.budget.emplace_back(goods, 0.0);
        only.disturbance.emplace_back(0.0);
    }
    table.scenarios.push_back(std::move(only));
    return table;
}

ChoiceTable bundle_table(const FiniteBundle& model, int goods) {
    check_smoothing(model.smoothing);
    ChoiceTable table;
    table.smoothing = model.smoothing;
    table.budget = model.lattice.empty() ? binary_lattice(goods) : model.lattice;
    for (const auto& y : table.budget)
        if (static_cast<int>(y.size()) != goods)
            throw ConfigError("bundle lattice: bundle dimension differs from the number of goods");
    if (model.scenarios.empty())
        throw ConfigError("bundle model: no scenarios");

    std::vector<double> weights;
    for (const auto& s : model.scenarios) {
        weights.push_back(s.weight);
        if (static_cast<int>(s.intercepts.size()) != goods)
            throw ConfigError("bundle scenario: expected one intercept per good");
        for (const auto& p : s.pairwise)
            if (p.first < 1 || p.first > goods || p.second < 1 || p.second > goods ||
                p.first == p.second)
                throw ConfigError("bundle scenario: invalid pairwise term");

        std::vector<bool> considered(table.budget.size(), !s.consideration.has_value());
        if (s.consideration) {
            if (s.consideration->empty())
                throw ConfigError("bundle scenario: empty consideration set");
            for (const auto& y : *s.consideration) {
                auto pos = find_bundle(table.budget, y);
                if (pos < 0)
                    throw ConfigError("bundle scenario: consideration set is not a subset of the lattice");
                considered[pos] = true;
            }
        }

        ChoiceTable::Scenario out;
        out.weight = s.weight;
        for (std::size_t i = 0; i < table.budget.size(); ++i) {
            if (!considered[i]) {
                out.disturbance.push_back(Utility::excluded());
                continue;
            }
            const auto& y = table.budget[i];
            double d = 0.0;
            for (int k = 0; k < goods; ++k)
                d += y[k] * s.intercepts[k];
            for (const auto& p : s.pairwise)
                d += y[p.first - 1] * y[p.second - 1] * p.value;
            out.disturbance.emplace_back(d);
        }
        table.scenarios.push_back(std::move(out));
    }
    check_weights(weights, "bundle scenarios");
    return table;
}

ChoiceTable generic_table(const GenericFiniteEps& model, int goods) {
    check_smoothing(model.smoothing);
    if (model.budget.empty())
        throw ConfigError("generic model: empty budget");
    for (const auto& y : model.budget)
        if (static_cast<int>(y.size()) != goods)
            throw ConfigError("generic model: bundle dimension differs from the number of goods");
    if (model.scenarios.empty())
        throw ConfigError("generic model: no scenarios");
    ChoiceTable table;
    table.smoothing = model.smoothing;
    table.budget = model.budget;
    std::vector<double> weights;
    for (const auto& s : model.scenarios) {
        if (s.disturbance.size() != model.budget.size())
            throw ConfigError("generic scenario: one disturbance value per budget bundle expected");
        for (const auto& d : s.disturbance)
            if (!d.is_excluded() && !std::isfinite(d.value()))
                throw ConfigError("generic scenario: disturbance values must be finite or excluded");
        weights.push_back(s.weight);
        table.scenarios.push_back({s.weight, s.disturbance});
    }
    check_weights(weights, "generic scenarios");
    return table;
}

} // namespace

// ---------------------------------------------------------------------------

MomentIndex::MomentIndex(std::vector<CharSlot> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
}

MomentIndex MomentIndex::power(CharSlot slot, int exponent) {
    return MomentIndex(std::vector<CharSlot>(static_cast<std::size_t>(exponent), slot));
}

std::vector<int> MomentIndex::goods() const {
    std::vector<int> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_)
        out.push_back(p.good);
    return out; // already sorted: pairs sort by good first
}

bool MomentIndex::contains(CharSlot slot) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), slot);
}

MomentIndex MomentIndex::with(CharSlot slot) const {
    auto pairs = pairs_;
    pairs.push_back(slot);
    return MomentIndex(std::move(pairs));
}

std::string MomentIndex::to_string() const {
    if (pairs_.empty())
        return "1";
    std::string out;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (i)
            out += '*';
        out += "b[" + std::to_string(pairs_[i].good) + ':' + std::to_string(pairs_[i].ch) + ']';
    }
    return out;
}

double Utility::value() const {
    if (!value_)
        throw PreconditionError("value() of an excluded bundle");
    return *value_;
}

// ---------------------------------------------------------------------------

ModelSpec::ModelSpec(std::vector<int> dims, Variant variant, std::vector<double> center,
                     IndexForm form, bool nonnegative_domain)
    : dims_(std::move(dims)), variant_(std::move(variant)), center_(std::move(center)),
      form_(form), nonnegative_domain_(nonnegative_domain) {
    if (dims_.empty())
        throw ConfigError("model: at least one good required");
    offsets_.assign(1, 0);
    for (int d : dims_) {
        if (d < 1)
            throw ConfigError("model: every good needs at least one characteristic");
        offsets_.push_back(offsets_.back() + static_cast<std::size_t>(d));
    }
    if (center_.empty())
        center_.assign(covariate_dim(), 0.0);
    if (center_.size() != covariate_dim())
        throw ConfigError("model: center dimension must equal the total number of characteristics");
    for (double c : center_)
        if (!std::isfinite(c))
            throw ConfigError("model: center must be finite");

    const int k = goods();
    choices_ = std::visit(
        [k](const auto& v) -> ChoiceTable {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AnalyticLogit>)
                return logit_table(v, k);
            else if constexpr (std::is_same_v<T, FiniteBundle>)
                return bundle_table(v, k);
            else
                return generic_table(v, k);
        },
        variant_);
}

CharSlot ModelSpec::slot(int good, int ch) const {
    if (good < 1 || good > goods())
        throw ConfigError("good index " + std::to_string(good) + " out of range");
    if (ch < 1 || ch > dims_[good - 1])
        throw ConfigError("characteristic index " + std::to_string(ch) + " out of range for good " +
                          std::to_string(good));
    return {good, ch};
}

std::size_t ModelSpec::flat(CharSlot s) const {
    slot(s.good, s.ch);
    return offsets_[s.good - 1] + static_cast<std::size_t>(s.ch - 1);
}

std::vector<double> ModelSpec::indices(std::span<const double> x,
                                       std::span<const double> beta) const {
    if (x.size() != covariate_dim())
        throw ConfigError("covariate vector has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(covariate_dim()));
    if (beta.size() != covariate_dim())
        throw ConfigError("slope vector has dimension " + std::to_string(beta.size()) +
                          ", model expects " + std::to_string(covariate_dim()));
    std::vector<double> u(dims_.size(), 0.0);
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        for (std::size_t i = offsets_[k]; i < offsets_[k + 1]; ++i) {
            if (form_ == IndexForm::Linear) {
                u[k] += beta[i] * (x[i] - center_[i]);
            } else {
                if (!(x[i] > 0.0))
                    throw PreconditionError("power index requires positive covariates");
                u[k] += std::pow(x[i], beta[i]);
            }
        }
    }
    return u;
}

// ---------------------------------------------------------------------------

BetaDistribution::BetaDistribution(std::vector<int> dims, Variant variant)
    : dims_(std::move(dims)), variant_(std::move(variant)) {
    if (dims_.empty())
        throw ConfigError("beta distribution: empty layout");
    std::size_t total = 0;
    for (int d : dims_) {
        if (d < 1)
            throw ConfigError("beta distribution: every good needs at least one characteristic");
        total += static_cast<std::size_t>(d);
    }

    if (auto* dp = std::get_if<DiscretePoints>(&variant_)) {
        if (dp->points.size() != dp->weights.size())
            throw ConfigError("beta distribution: one weight per support point expected");
        check_weights(dp->weights, "beta distribution");
        for (std::size_t s = 0; s < dp->points.size(); ++s) {
            if (dp->points[s].size() != total)
                throw ConfigError("beta distribution: support vector dimension must equal the total "
                                  "number of characteristics");
            for (double b : dp->points[s])
                if (!std::isfinite(b))
                    throw ConfigError("beta distribution: non-finite support value");
            if (dp->weights[s] > 0.0)
                support_.push_back({dp->weights[s], dp->points[s]});
        }
    } else {
        auto& pu = std::get<ProductUnivariate>(variant_);
        if (pu.coords.size() != total)
            throw ConfigError("product distribution: one univariate factor per characteristic expected");
        for (const auto& c : pu.coords) {
            if (c.values.size() != c.weights.size())
                throw ConfigError("product distribution: one weight per value expected");
            check_weights(c.weights, "product distribution factor");
            for (double v : c.values)
                if (!std::isfinite(v))
                    throw ConfigError("product distribution: non-finite support value");
        }
        // Full grid, first coordinate varying slowest.
        support_.push_back({1.0, {}});
        for (const auto& c : pu.coords) {
            std::vector<SupportPoint> next;
            for (const auto& partial : support_) {
                for (std::size_t i = 0; i < c.values.size(); ++i) {
                    if (c.weights[i] <= 0.0)
                        continue;
                    SupportPoint p = partial;
                    p.weight *= c.weights[i];
                    p.beta.push_back(c.values[i]);
                    next.push_back(std::move(p));
                }
            }
            support_ = std::move(next);
        }
    }
}

BetaDistribution BetaDistribution::discrete(std::vector<int> dims,
                                            std::vector<std::vector<double>> points,
                                            std::vector<double> weights) {
    return BetaDistribution(std::move(dims), DiscretePoints{std::move(points), std::move(weights)});
}

BetaDistribution BetaDistribution::point_mass(std::vector<int> dims, std::vector<double> beta) {
    return discrete(std::move(dims), {std::move(beta)}, {1.0});
}

BetaDistribution BetaDistribution::product(std::vector<int> dims,
                                           std::vector<UnivariateFinite> coords) {
    return BetaDistribution(std::move(dims), ProductUnivariate{std::move(coords)});
}

std::size_t BetaDistribution::flat(CharSlot s) const {
    if (s.good < 1 || s.good > static_cast<int>(dims_.size()) || s.ch < 1 ||
        s.ch > dims_[s.good - 1])
        throw ConfigError("moment index slot out of range for the beta layout");
    std::size_t off = 0;
    for (int k = 0; k < s.good - 1; ++k)
        off += static_cast<std::size_t>(dims_[k]);
    return off + static_cast<std::size_t>(s.ch - 1);
}

// ---------------------------------------------------------------------------

Bundle argmax_average(const ChoiceTable& table, std::span<const double> u,
                      std::size_t scenario) {
    if (scenario >= table.scenarios.size())
        throw PreconditionError("scenario id out of range");
    const auto& dist = table.scenarios[scenario].disturbance;
    const std::size_t n = table.budget.size();

    std::vector<double> value(n, 0.0);
    std::vector<bool> feasible(n, false);
    double best = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i].is_excluded())
            continue;
        double v = dist[i].value();
        const auto& y = table.budget[i];
        for (std::size_t k = 0; k < y.size(); ++k)
            v += y[k] * u[k];
        value[i] = v;
        feasible[i] = true;
        best = std::max(best, v);
        scale = std::max(scale, std::abs(v));
    }
    if (std::none_of(feasible.begin(), feasible.end(), [](bool f) { return f; }))
        throw InfeasibleScenarioError("every bundle is excluded in scenario " +
                                      std::to_string(scenario));

    const double tol = kTieTolerance * scale;
    Bundle out(u.size(), 0.0);
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!feasible[i] || value[i] < best - tol)
            continue;
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += table.budget[i][k];
        ++ties;
    }
    for (double& q : out)
        q /= static_cast<double>(ties);
    return out;
}

std::vector<double> choice_probabilities(const ChoiceTable& table, std::span<const double> u,
                                         std::size_t scenario, double* log_partition) {
    if (scenario >= table.scenarios.size())
        throw PreconditionError("scenario id out of range");
    if (!(table.smoothing > 0.0))
        throw PreconditionError("choice probabilities need a positive smoothing scale");
    const auto& dist = table.scenarios[scenario].disturbance;
    std::vector<double> a(table.budget.size(), 0.0);
    std::vector<bool> feasible(a.size(), false);
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (dist[i].is_excluded())
            continue;
        double v = dist[i].value();
        for (std::size_t k = 0; k < u.size(); ++k)
            v += table.budget[i][k] * u[k];
        a[i] = v / table.smoothing;
        feasible[i] = true;
        shift = std::max(shift, a[i]);
    }
    if (std::none_of(feasible.begin(), feasible.end(), [](bool f) { return f; }))
        throw InfeasibleScenarioError("every bundle is excluded in scenario " +
                                      std::to_string(scenario));
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = feasible[i] ? std::exp(a[i] - shift) : 0.0;
        total += a[i];
    }
    for (double& p : a)
        p /= total;
    if (log_partition)
        *log_partition = shift + std::log(total);
    return a;
}

Utility latent_utility(const ModelSpec& model, std::span<const double> y,
                       std::span<const double> x, std::span<const double> beta,
                       std::size_t scenario) {
    if (y.size() != static_cast<std::size_t>(model.goods()))
        throw ConfigError("quantity vector dimension differs from the number of goods");
    const auto u = model.indices(x, beta);
    const auto& table = model.choices();
    if (scenario >= table.scenarios.size())
        throw PreconditionError("scenario id out of range");
    const auto pos = find_bundle(table.budget, y);
    if (pos < 0)
        throw PreconditionError("quantity vector is not in the budget");
    const auto& d = table.scenarios[scenario].disturbance[pos];
    if (d.is_excluded())
        return Utility::excluded();
    double v = d.value();
    for (std::size_t k = 0; k < u.size(); ++k)
        v += y[k] * u[k];
    return v;
}

Bundle solve_choice(const ModelSpec& model, std::span<const double> x,
                    std::span<const double> beta, std::size_t scenario) {
    if (!model.has_finite_budget())
        throw PreconditionError("solve_choice needs a finite-budget model variant");
    return argmax_average(model.choices(), model.indices(x, beta), scenario);
}

double true_moment(const BetaDistribution& dist, const MomentIndex& idx) {
    if (const auto* pu = std::get_if<BetaDistribution::ProductUnivariate>(&dist.variant())) {
        std::map<std::size_t, int> power;
        for (const auto& p : idx.pairs())
            ++power[dist.flat(p)];
        double out = 1.0;
        for (const auto& [coord, m] : power) {
            const auto& c = pu->coords[coord];
            double e = 0.0;
            for (std::size_t i = 0; i < c.values.size(); ++i)
                e += c.weights[i] * std::pow(c.values[i], m);
            out *= e;
        }
        return out;
    }
    std::vector<std::size_t> coords;
    for (const auto& p : idx.pairs())
        coords.push_back(dist.flat(p));
    double out = 0.0;
    for (const auto& s : dist.support()) {
        double term = s.weight;
        for (auto c : coords)
            term *= s.beta[c];
        out += term;
    }
    return out;
}

} // namespace rcid
