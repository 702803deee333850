#include "rcid/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcid/errors.hpp"

namespace rcid {

double cauchy_schwarz_check(const DerivativeTable& table, double tau) {
    if (table.goods() < 2 || table.order() < 2)
        throw PreconditionError("Cauchy-Schwarz statistic needs two goods and order-2 entries");
    const CharSlot a{1, 1};
    const CharSlot b{2, 1};
    const MomentIndex aa({a, a}), ab({a, b}), bb({b, b});
    const double first = ratio_of_moments(table, {2, aa}, {1, ab}, tau);
    const double second = ratio_of_moments(table, {1, bb}, {2, ab}, tau);
    return first * second;
}

MomentLookup lookup_in(const std::vector<MomentTable>& tables) {
    return [&tables](const MomentIndex& idx) -> std::optional<double> {
        for (const auto& t : tables)
            if (t.contains(idx))
                return t.at(idx);
        return std::nullopt;
    };
}

SymmetryResult symmetry_check(const DerivativeTable& table, const MomentLookup& moments,
                              double tau) {
    std::map<GoodTuple, std::vector<double>> implied;
    for (const auto& [key, value] : table.entries()) {
        if (key.idx.order() < 2)
            continue;
        const auto m = moments(key.idx);
        if (!m || std::abs(*m) <= tau)
            continue;
        auto g = key.idx.goods();
        g.insert(std::upper_bound(g.begin(), g.end(), key.good), key.good);
        implied[g].push_back(value / *m);
    }
    SymmetryResult out;
    for (const auto& [g, values] : implied) {
        if (values.size() < 2)
            continue;
        out.applicable = true;
        ++out.comparisons;
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        const double scale = std::max(std::abs(*lo), std::abs(*hi));
        const double r = scale > 0.0 ? (*hi - *lo) / scale : 0.0;
        if (r > out.residual || out.worst.empty()) {
            out.residual = std::max(out.residual, r);
            out.worst = g;
        }
    }
    return out;
}

Sign sign_first_moment(const DerivativeTable& table, double tau) {
    return signed_first_sign(table, tau);
}

std::vector<std::vector<Sign>> complementarity_signs(const VDerivTable& v, int goods,
                                                     double tau) {
    std::vector<std::vector<Sign>> out(goods, std::vector<Sign>(goods, Sign::Indeterminate));
    for (int j = 1; j <= goods; ++j)
        for (int k = 1; k <= goods; ++k) {
            if (!v.contains({j, k}))
                continue;
            const double d = v.at({j, k});
            out[j - 1][k - 1] = d > tau ? Sign::Positive : d < -tau ? Sign::Negative
                                                                     : Sign::Indeterminate;
        }
    return out;
}

std::vector<RelevanceEntry> relevance_map(const DerivativeTable& table) {
    std::vector<RelevanceEntry> out;
    for (int n = 1; n <= table.order(); ++n)
        for (const auto& g : good_multisets(table.goods(), n)) {
            RelevanceEntry e{g, {}, 1, -1.0};
            for (int k = 1; k <= table.goods(); ++k)
                for (const auto& idx : moment_indices_for(table.dims(), g)) {
                    const double m = std::abs(table.at(k, idx));
                    if (m > e.magnitude) {
                        e.selected = idx;
                        e.target = k;
                        e.magnitude = m;
                    }
                }
            out.push_back(std::move(e));
        }
    return out;
}

DiagnosticsReport run_diagnostics(const DerivativeTable& table, const VDerivTable& v,
                                  const MomentLookup& moments, double tau) {
    DiagnosticsReport r;
    if (table.goods() >= 2 && table.order() >= 2) {
        try {
            r.cauchy_schwarz_stat = cauchy_schwarz_check(table, tau);
        } catch (const RelevanceError& e) {
            r.cauchy_schwarz_note = e.what();
        }
    } else {
        r.cauchy_schwarz_note = "not applicable";
    }
    r.symmetry = symmetry_check(table, moments, tau);
    r.relevance = relevance_map(table);
    r.sign_beta11 = sign_first_moment(table, tau);
    r.complementarity = complementarity_signs(v, table.goods(), tau);
    r.min_v_diagonal = v.min_diagonal();
    return r;
}

} // namespace rcid
