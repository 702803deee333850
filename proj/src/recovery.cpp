#include "rcid/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "rcid/errors.hpp"

namespace rcid {

namespace {

GoodTuple goods_plus(const MomentIndex& idx, int good) {
    auto g = idx.goods();
    g.insert(std::upper_bound(g.begin(), g.end(), good), good);
    return g;
}

GoodTuple remove_one(GoodTuple g, int good) {
    g.erase(std::find(g.begin(), g.end(), good));
    return g;
}

struct Best {
    MomentIndex idx;
    double magnitude = 0.0;
};

// Characteristic assignment of `goods` with the largest |d_idx Ybar_target|;
// the first one in lexicographic order wins ties.
Best most_relevant(const DerivativeTable& table, const GoodTuple& goods, int target) {
    Best best;
    bool first = true;
    for (const auto& idx : moment_indices_for(table.dims(), goods)) {
        const double m = std::abs(table.at(target, idx));
        if (first || m > best.magnitude) {
            best = {idx, m};
            first = false;
        }
    }
    return best;
}

void check_order(const DerivativeTable& table, int order) {
    if (order < 1 || order > table.order())
        throw PreconditionError("order " + std::to_string(order) +
                                " is outside the derivative table (max " +
                                std::to_string(table.order()) + ")");
}

// Single differing component between two good tuples of equal size.
std::pair<int, int> one_step(const GoodTuple& from, const GoodTuple& to) {
    GoodTuple out, in;
    std::set_difference(from.begin(), from.end(), to.begin(), to.end(), std::back_inserter(out));
    std::set_difference(to.begin(), to.end(), from.begin(), from.end(), std::back_inserter(in));
    if (from.size() != to.size() || out.size() != 1 || in.size() != 1)
        throw PreconditionError("good tuples " + to_string(from) + " and " + to_string(to) +
                                " do not differ in exactly one component");
    return {out[0], in[0]};
}

RelevanceEntry relevance_entry(const DerivativeTable& table, const GoodTuple& goods) {
    RelevanceEntry e{goods, {}, 1, -1.0};
    for (int k = 1; k <= table.goods(); ++k) {
        auto b = most_relevant(table, goods, k);
        if (b.magnitude > e.magnitude) {
            e.selected = b.idx;
            e.target = k;
            e.magnitude = b.magnitude;
        }
    }
    return e;
}

MomentTable scaled(const ChainResult& chain, const MomentIndex& anchor, double anchor_value,
                   const std::string& route) {
    const double r = chain.ratios.at(anchor);
    if (!(std::isfinite(r) && r != 0.0))
        throw AnchorError("anchor moment " + anchor.to_string() + " has a vanishing ratio",
                          chain.order);
    MomentTable out(chain.order);
    for (const auto& [idx, ratio] : chain.ratios)
        out.set(idx, ratio / r * anchor_value, route);
    return out;
}

} // namespace

const char* to_string(Route route) {
    switch (route) {
    case Route::Scale:
        return "scale";
    case Route::Independence:
        return "independence";
    case Route::VKnown:
        return "vknown";
    }
    return "?";
}

Route parse_route(const std::string& name) {
    if (name == "scale")
        return Route::Scale;
    if (name == "independence")
        return Route::Independence;
    if (name == "vknown")
        return Route::VKnown;
    throw ConfigError("unknown recovery route '" + name + "'");
}

const char* to_string(Sign sign) {
    switch (sign) {
    case Sign::Negative:
        return "-";
    case Sign::Positive:
        return "+";
    case Sign::Indeterminate:
        break;
    }
    return "indeterminate";
}

void RecoveryConfig::validate(int max_order) const {
    if (!(std::isfinite(tau_rel) && tau_rel > 0.0))
        throw ConfigError("relevance threshold must be positive");
    switch (route) {
    case Route::Scale:
        if (static_cast<int>(known_scale.size()) < max_order)
            throw ConfigError("scale route needs a known E[b11^M] for every order up to " +
                              std::to_string(max_order));
        for (double s : known_scale)
            if (!(std::isfinite(s) && s != 0.0))
                throw ConfigError("known scale values must be finite and nonzero");
        break;
    case Route::Independence:
        if (!(std::isfinite(abs_mean) && abs_mean > 0.0))
            throw ConfigError("|E[b11]| must be finite and positive");
        break;
    case Route::VKnown:
        if (v_derivs.size() == 0)
            throw ConfigError("vknown route needs derivatives of V");
        break;
    }
}

bool permutation_compatible(const Term& num, const Term& den) {
    return goods_plus(num.idx, num.good) == goods_plus(den.idx, den.good);
}

double ratio_of_moments(const DerivativeTable& table, const Term& num, const Term& den,
                        double tau) {
    if (!permutation_compatible(num, den))
        throw PreconditionError("ratio " + num.idx.to_string() + " / " + den.idx.to_string() +
                                " violates the permutation condition");
    const double d = table.at(den.good, den.idx);
    if (std::abs(d) <= tau)
        throw RelevanceError("denominator d" + den.idx.to_string() + " Ybar_" +
                                 std::to_string(den.good) + " is below the relevance threshold",
                             static_cast<int>(den.idx.order()));
    return table.at(num.good, num.idx) / d;
}

ChainResult chain_ratios(const DerivativeTable& table, int order, double tau) {
    check_order(table, order);
    const int K = table.goods();
    const GoodTuple root(static_cast<std::size_t>(order), 1);

    ChainResult out;
    out.order = order;
    const auto ref = most_relevant(table, root, 1);
    if (ref.magnitude <= tau)
        throw RelevanceError("no relevant characteristic assignment for good tuple " +
                                 to_string(root),
                             order);
    out.reference = ref.idx;
    const double ref_value = table.at(1, ref.idx);
    for (const auto& idx : moment_indices_for(table.dims(), root))
        out.ratios[idx] = table.at(1, idx) / ref_value;
    out.parent[root] = root;

    std::deque<GoodTuple> queue{root};
    while (!queue.empty()) {
        const GoodTuple parent = queue.front();
        queue.pop_front();
        std::vector<int> distinct(parent.begin(), parent.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (int a : distinct) {
            for (int b = 1; b <= K; ++b) {
                if (b == a)
                    continue;
                auto child = remove_one(parent, a);
                child.insert(std::upper_bound(child.begin(), child.end(), b), b);
                if (out.parent.count(child))
                    continue;
                const auto eta = most_relevant(table, parent, b);
                if (eta.magnitude <= tau)
                    continue;
                const double scale = out.ratios.at(eta.idx) / table.at(b, eta.idx);
                for (const auto& idx : moment_indices_for(table.dims(), child))
                    out.ratios[idx] = table.at(a, idx) * scale;
                out.parent[child] = parent;
                queue.push_back(child);
            }
        }
    }

    for (const auto& g : good_multisets(K, order)) {
        if (!out.parent.count(g))
            throw RelevanceError("good tuple " + to_string(g) +
                                     " is not reachable through relevant derivatives",
                                 order);
        out.relevance.push_back(relevance_entry(table, g));
    }
    return out;
}

double chain_ratio_along(const DerivativeTable& table, const std::vector<GoodTuple>& path,
                         const MomentIndex& target, double tau) {
    if (path.empty())
        throw PreconditionError("empty chain path");
    const int order = static_cast<int>(target.order());
    check_order(table, order);
    if (path.front() != GoodTuple(static_cast<std::size_t>(order), 1))
        throw PreconditionError("chain path must start at (1,...,1)");
    if (path.back() != target.goods())
        throw PreconditionError("chain path must end at the goods of " + target.to_string());

    const auto ref = most_relevant(table, path.front(), 1);
    if (ref.magnitude <= tau)
        throw RelevanceError("no relevant reference for the chain", order);

    auto ratio = [&](auto&& self, std::size_t i, const MomentIndex& idx) -> double {
        if (i == 0)
            return table.at(1, idx) / table.at(1, ref.idx);
        const auto [a, b] = one_step(path[i - 1], path[i]);
        const auto eta = most_relevant(table, path[i - 1], b);
        if (eta.magnitude <= tau)
            throw RelevanceError("chain step from " + to_string(path[i - 1]) +
                                     " has no relevant denominator",
                                 order);
        return table.at(a, idx) / table.at(b, eta.idx) * self(self, i - 1, eta.idx);
    };
    return ratio(ratio, path.size() - 1, target);
}

MomentTable recover_moments_scale(const DerivativeTable& table, int order, double known_scale,
                                  double tau) {
    if (!(std::isfinite(known_scale) && known_scale != 0.0))
        throw PreconditionError("known scale must be finite and nonzero");
    const auto chain = chain_ratios(table, order, tau);
    const auto anchor = MomentIndex::power({1, 1}, order);
    if (std::abs(table.at(1, anchor)) <= tau)
        throw RelevanceError("d" + anchor.to_string() + " Ybar_1 is below the relevance threshold",
                             order);
    return scaled(chain, anchor, known_scale, "scale");
}

Sign signed_first_sign(const DerivativeTable& table, double tau) {
    const double d = table.at(1, MomentIndex::power({1, 1}, 1));
    if (d > tau)
        return Sign::Positive;
    if (d < -tau)
        return Sign::Negative;
    return Sign::Indeterminate;
}

MomentTable independence_first_order(const DerivativeTable& table, double abs_mean, double tau) {
    if (!(std::isfinite(abs_mean) && abs_mean > 0.0))
        throw PreconditionError("|E[b11]| must be finite and positive");
    const Sign s = signed_first_sign(table, tau);
    if (s == Sign::Indeterminate)
        throw RelevanceError("sign of E[b11] is indeterminate", 1);
    const auto chain = chain_ratios(table, 1, tau);
    return scaled(chain, MomentIndex::power({1, 1}, 1), static_cast<int>(s) * abs_mean,
                  "independence");
}

MomentTable independence_next_order(const DerivativeTable& table, const MomentTable& previous,
                                    double mean_11, double tau) {
    const int order = previous.order() + 1;
    check_order(table, order);
    const CharSlot first{1, 1};
    const MomentIndex* anchor = nullptr;
    double best = 0.0;
    for (const auto& [idx, e] : previous.entries()) {
        if (idx.contains(first))
            continue;
        if (std::abs(e.value) > best) {
            best = std::abs(e.value);
            anchor = &idx;
        }
    }
    if (!anchor || best <= tau)
        throw AnchorError("no nonzero order-" + std::to_string(previous.order()) +
                              " moment avoids b[1:1]; order " + std::to_string(order) +
                              " has no anchor",
                          order);
    const auto chain = chain_ratios(table, order, tau);
    return scaled(chain, anchor->with(first), mean_11 * previous.at(*anchor), "independence");
}

std::vector<MomentTable> recover_moments_independence(const DerivativeTable& table, int max_order,
                                                      double abs_mean, double tau) {
    std::vector<MomentTable> out;
    out.push_back(independence_first_order(table, abs_mean, tau));
    const double mean_11 = out.front().at(MomentIndex::power({1, 1}, 1));
    for (int m = 2; m <= max_order; ++m)
        out.push_back(independence_next_order(table, out.back(), mean_11, tau));
    return out;
}

VDerivTable v_gradient_at_center(const DerivativeTable& table) {
    if (table.level().size() != static_cast<std::size_t>(table.goods()))
        throw PreconditionError("derivative table carries no ASF level");
    VDerivTable out;
    for (int k = 1; k <= table.goods(); ++k)
        out.set({k}, table.level()[k - 1]);
    return out;
}

VDerivTable recover_v_derivatives(const DerivativeTable& table, const MomentTable& moments,
                                  double tau) {
    const int order = moments.order();
    check_order(table, order);
    VDerivTable out;
    for (const auto& key : good_multisets(table.goods(), order + 1)) {
        std::vector<double> cand;
        std::vector<int> distinct(key.begin(), key.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (int k : distinct) {
            const auto g = remove_one(key, k);
            std::optional<MomentIndex> pick;
            double best = 0.0;
            for (const auto& idx : moment_indices_for(table.dims(), g)) {
                const double m = std::abs(moments.at(idx));
                if (m > best) {
                    best = m;
                    pick = idx;
                }
            }
            if (!pick || best <= tau)
                continue;
            cand.push_back(table.at(k, *pick) / moments.at(*pick));
        }
        if (cand.empty())
            throw RelevanceError("no nonzero moment to recover " + v_key_string(key), order);
        double sum = 0.0;
        for (double c : cand)
            sum += c;
        const auto [lo, hi] = std::minmax_element(cand.begin(), cand.end());
        out.set(key, sum / static_cast<double>(cand.size()), *hi - *lo,
                static_cast<int>(cand.size()));
    }
    return out;
}

MomentTable recover_moments_vknown(const DerivativeTable& table, int order,
                                   const VDerivTable& v_derivs) {
    check_order(table, order);
    MomentTable out(order);
    for (const auto& idx : moment_indices(table.dims(), order)) {
        int pick = 0;
        double best = 0.0;
        for (int k = 1; k <= table.goods(); ++k) {
            const auto key = goods_plus(idx, k);
            if (!v_derivs.contains(key))
                continue;
            const double v = std::abs(v_derivs.at(key));
            if (v > best) {
                best = v;
                pick = k;
            }
        }
        if (pick == 0)
            throw PreconditionError("no nonzero supplied derivative of V divides d" +
                                    idx.to_string() + " Ybar");
        out.set(idx, table.at(pick, idx) / v_derivs.at(goods_plus(idx, pick)), "vknown");
    }
    return out;
}

double same_good_ratios(const DerivativeTable& table, int good, const MomentIndex& num,
                        const MomentIndex& den, double tau) {
    if (num.goods() != den.goods())
        throw PreconditionError("same-good ratio needs identical good tuples");
    return ratio_of_moments(table, {good, num}, {good, den}, tau);
}

double exponent_moment_ratio(const AsfEvaluator& evaluator, int j, int k, const FdScheme& scheme,
                             double tau) {
    const auto& model = evaluator.model();
    if (model.index_form() != IndexForm::Power)
        throw PreconditionError("exponent ratio needs the power-index model");
    for (double c : model.center())
        if (c != 1.0)
            throw PreconditionError("exponent ratio is taken at the all-ones covariate point");
    const double num = mixed_partial(evaluator, k, MomentIndex({model.slot(j, 1)}), scheme);
    const double den = mixed_partial(evaluator, j, MomentIndex({model.slot(k, 1)}), scheme);
    if (std::abs(den) <= tau)
        throw RelevanceError("exponent ratio denominator is below the relevance threshold", 1);
    return num / den;
}

double plugin_estimate(const std::vector<std::pair<Estimate, Estimate>>& steps, double tau) {
    if (steps.empty())
        throw PreconditionError("plug-in estimate needs at least one ratio");
    double out = 1.0;
    for (const auto& [num, den] : steps) {
        if (!permutation_compatible(num.term, den.term))
            throw PreconditionError("plug-in ratio violates the permutation condition");
        if (std::abs(den.value) <= tau)
            throw RelevanceError("plug-in denominator is below the relevance threshold",
                                 static_cast<int>(den.term.idx.order()));
        out *= num.value / den.value;
    }
    return out;
}

} // namespace rcid
