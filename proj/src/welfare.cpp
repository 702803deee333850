#include "rcid/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/special_functions/legendre.hpp>

#include "rcid/errors.hpp"
#include "rcid/indirect_utility.hpp"

namespace rcid {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

bool outside_trust(const TaylorV& v, std::span<const double> u) {
    for (double x : u)
        if (std::abs(x) > v.trust_radius)
            return true;
    return false;
}

std::vector<int> counts(const GoodTuple& key, std::size_t goods) {
    std::vector<int> c(goods, 0);
    for (int g : key) {
        if (g < 1 || static_cast<std::size_t>(g) > goods)
            throw PreconditionError("V derivative key " + v_key_string(key) +
                                    " does not fit the index vector");
        ++c[static_cast<std::size_t>(g - 1)];
    }
    return c;
}

double monomial(std::span<const double> u, const std::vector<int>& c, std::size_t skip_one = -1) {
    double out = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const int p = c[i] - (i == skip_one ? 1 : 0);
        out *= std::pow(u[i], p) / factorial(p);
    }
    return out;
}

// Sorted distinct support with merged weights; zero weights dropped.
std::vector<std::pair<double, double>> tidy(const ScalarDistribution& d, const char* what) {
    if (d.values.size() != d.weights.size() || d.values.empty())
        throw PreconditionError(std::string(what) + ": one weight per value expected");
    std::map<double, double> merged;
    double total = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (!std::isfinite(d.values[i]) || !(d.weights[i] >= 0.0))
            throw PreconditionError(std::string(what) + ": invalid value or weight");
        if (d.weights[i] > 0.0)
            merged[d.values[i]] += d.weights[i];
        total += d.weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw PreconditionError(std::string(what) + ": weights must sum to 1");
    return {merged.begin(), merged.end()};
}

// Mid-rank CDF knots.
std::vector<double> knots(const std::vector<std::pair<double, double>>& d) {
    std::vector<double> c;
    double below = 0.0;
    for (const auto& [v, w] : d) {
        c.push_back(below + w / 2.0);
        below += w;
    }
    return c;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front())
        return ys.front();
    if (x >= xs.back())
        return ys.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

void check_path_endpoint(const ModelSpec& model, std::span<const double> x) {
    if (x.size() != model.covariate_dim())
        throw ConfigError("path endpoint dimension differs from the covariate dimension");
    for (int k = 1; k <= model.goods(); ++k)
        for (int l = 2; l <= model.dims()[k - 1]; ++l) {
            const auto i = model.flat({k, l});
            if (x[i] != model.center()[i])
                throw PreconditionError("path endpoints may move only the first characteristic of "
                                        "each good");
        }
}

} // namespace

Flagged<double> taylor_v(const TaylorV& v, std::span<const double> u) {
    double acc = 0.0;
    for (const auto& [key, e] : v.derivs.entries())
        acc += e.value * monomial(u, counts(key, u.size()));
    return {acc, outside_trust(v, u)};
}

Flagged<std::vector<double>> taylor_gradient(const TaylorV& v, std::span<const double> u) {
    std::vector<double> g(u.size(), 0.0);
    for (const auto& [key, e] : v.derivs.entries()) {
        const auto c = counts(key, u.size());
        for (std::size_t k = 0; k < u.size(); ++k)
            if (c[k] > 0)
                g[k] += e.value * monomial(u, c, k);
    }
    return {g, outside_trust(v, u)};
}

double path_integral_v(const AsfEvaluator& evaluator, std::span<const double> x_initial,
                       std::span<const double> x_final, int nodes) {
    const auto& model = evaluator.model();
    if (model.index_form() != IndexForm::Linear)
        throw PreconditionError("path integral needs the linear index");
    if (nodes < 1)
        throw PreconditionError("quadrature needs at least one node");
    for (const auto& s : evaluator.beta().support())
        for (int k = 1; k <= model.goods(); ++k)
            if (s.beta[model.flat({k, 1})] != 1.0)
                throw PreconditionError("path integral needs beta_{k,1} = 1 on the support");
    check_path_endpoint(model, x_initial);
    check_path_endpoint(model, x_final);

    const std::size_t K = static_cast<std::size_t>(model.goods());
    std::vector<double> delta(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto i = model.flat({static_cast<int>(k) + 1, 1});
        delta[k] = x_final[i] - x_initial[i];
    }
    auto integrand = [&](double p, double q) {
        std::vector<double> x(x_final.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = p * x_final[i] + q * x_initial[i];
        const auto y = evaluator(x);
        double dot = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            dot += y[k] * delta[k];
        return dot;
    };

    // Nodes come in pairs t, 1 - t; summing each pair first makes the
    // reversed path give exactly the negated value.
    double acc = 0.0;
    for (double z : boost::math::legendre_p_zeros<double>(nodes)) {
        const double dp = boost::math::legendre_p_prime(nodes, z);
        const double w = 1.0 / ((1.0 - z * z) * dp * dp);
        if (z == 0.0) {
            acc += w * integrand(0.5, 0.5);
        } else {
            const double p = 0.5 + 0.5 * z;
            const double q = 0.5 - 0.5 * z;
            acc += w * (integrand(p, q) + integrand(q, p));
        }
    }
    return acc;
}

Flagged<double> v_difference(const VModel& v, std::span<const double> u) {
    if (const auto* t = std::get_if<TaylorV>(&v))
        return taylor_v(*t, u);
    const auto& p = std::get<PathIntegralV>(v);
    if (!p.evaluator)
        throw PreconditionError("path-integral V model has no evaluator");
    const auto& model = p.evaluator->model();
    if (u.size() != static_cast<std::size_t>(model.goods()))
        throw ConfigError("index vector dimension differs from the number of goods");
    std::vector<double> x = model.center();
    for (int k = 1; k <= model.goods(); ++k)
        x[model.flat({k, 1})] += u[k - 1];
    return {path_integral_v(*p.evaluator, model.center(), x, p.nodes), false};
}

const char* to_string(Weighting w) {
    return w == Weighting::Unweighted ? "unweighted" : "inverse_abs_beta11";
}

Weighting parse_weighting(const std::string& name) {
    if (name == "unweighted")
        return Weighting::Unweighted;
    if (name == "inverse_abs_beta11")
        return Weighting::InverseAbsBeta11;
    throw ConfigError("unknown weighting '" + name + "'");
}

namespace {

double point_weight(const ModelSpec& model, const SupportPoint& s, Weighting weighting) {
    if (weighting == Weighting::Unweighted)
        return s.weight;
    const double b = s.beta[model.flat({1, 1})];
    if (b == 0.0)
        throw WeightingError("beta_11 = 0 on the support; 1/|beta_11| weighting is undefined");
    return s.weight / std::abs(b);
}

} // namespace

Flagged<double> average_indirect_utility(const VModel& v, const ModelSpec& model,
                                         const BetaDistribution& beta, std::span<const double> x,
                                         Weighting weighting) {
    Flagged<double> out{0.0, false};
    for (const auto& s : beta.support()) {
        const double c = point_weight(model, s, weighting);
        const auto d = v_difference(v, model.indices(x, s.beta));
        out.value += c * d.value;
        out.extrapolated = out.extrapolated || d.extrapolated;
    }
    return out;
}

double average_indirect_utility_exact(const ModelSpec& model, const BetaDistribution& beta,
                                      std::span<const double> x, Weighting weighting) {
    const std::vector<double> zero(static_cast<std::size_t>(model.goods()), 0.0);
    const double v0 = closed_form_v(model, zero);
    double out = 0.0;
    for (const auto& s : beta.support())
        out += point_weight(model, s, weighting) *
               (closed_form_v(model, model.indices(x, s.beta)) - v0);
    return out;
}

std::vector<DemandPoint> counterfactual_demand(const TaylorV& v, const ModelSpec& model,
                                               const BetaDistribution& beta,
                                               std::span<const double> x) {
    std::vector<DemandPoint> out;
    for (const auto& s : beta.support()) {
        auto g = taylor_gradient(v, model.indices(x, s.beta));
        out.push_back({s.weight, s.beta, std::move(g.value), g.extrapolated});
    }
    return out;
}

std::vector<DemandPoint> counterfactual_demand(const AsfEvaluator& evaluator,
                                               const BetaDistribution& beta,
                                               std::span<const double> x) {
    std::vector<DemandPoint> out;
    for (const auto& s : beta.support())
        out.push_back({s.weight, s.beta, ybar_given_beta(evaluator.model(), x, s.beta), false});
    return out;
}

double MonotoneMap::operator()(double a) const {
    if (grid.empty())
        throw PreconditionError("empty monotone map");
    return interpolate(grid, values, a);
}

MonotoneMap quantile_match_vprime(const ScalarDistribution& w, const ScalarDistribution& eta,
                                  std::size_t grid_points) {
    const auto dw = tidy(w, "W distribution");
    const auto de = tidy(eta, "eta distribution");
    if (de.size() < 2)
        throw PreconditionError("eta distribution is degenerate; no continuous proxy exists");
    if (grid_points < 2)
        throw PreconditionError("quantile grid needs at least two points");

    std::vector<double> ev, wv;
    for (const auto& [v, p] : de)
        ev.push_back(v);
    for (const auto& [v, p] : dw)
        wv.push_back(v);
    const auto ce = knots(de);
    const auto cw = knots(dw);

    MonotoneMap out;
    const double lo = ev.front();
    const double hi = ev.back();
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double a = i + 1 == grid_points
                             ? hi
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(grid_points - 1);
        const double p = interpolate(ev, ce, a);
        out.grid.push_back(a);
        out.values.push_back(wv.size() == 1 ? wv.front() : interpolate(cw, wv, p));
    }
    return out;
}

std::pair<ScalarDistribution, ScalarDistribution>
one_good_distributions(const AsfEvaluator& evaluator, std::span<const double> x) {
    const auto& model = evaluator.model();
    if (model.goods() != 1)
        throw PreconditionError("monotone rearrangement is implemented for one good only");
    if (x.size() != model.covariate_dim())
        throw ConfigError("covariate vector dimension differs from the model");
    bool moved = false;
    for (std::size_t i = 0; i < x.size(); ++i)
        moved = moved || x[i] != model.center()[i];
    if (!moved)
        throw PreconditionError("x equals the center: the index distribution is a point mass");
    ScalarDistribution w, eta;
    for (const auto& s : evaluator.beta().support()) {
        eta.values.push_back(model.indices(x, s.beta)[0]);
        eta.weights.push_back(s.weight);
        w.values.push_back(ybar_given_beta(model, x, s.beta)[0]);
        w.weights.push_back(s.weight);
    }
    return {w, eta};
}

} // namespace rcid
