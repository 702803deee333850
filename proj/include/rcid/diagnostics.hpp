#ifndef RCID_DIAGNOSTICS_HPP_
#define RCID_DIAGNOSTICS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcid/numdiff.hpp"
#include "rcid/recovery.hpp"
#include "rcid/tables.hpp"

namespace rcid {

/// [d2_{11,11} Ybar_2 / d2_{11,21} Ybar_1] * [d2_{21,21} Ybar_1 / d2_{11,21} Ybar_2],
/// i.e. E[b11^2] E[b21^2] / E[b11 b21]^2 >= 1.
double cauchy_schwarz_check(const DerivativeTable& table, double tau = kDefaultRelevance);

/// Returns E[beta_idx] if known.
using MomentLookup = std::function<std::optional<double>(const MomentIndex&)>;

MomentLookup lookup_in(const std::vector<MomentTable>& tables);

struct SymmetryResult {
    double residual = 0.0;
    bool applicable = false;
    int comparisons = 0;    // multi-indices with at least two candidates
    GoodTuple worst;        // V multi-index attaining the residual
};

/// Every entry d_(g,xi) Ybar_k of order >= 2 implies d_{g+k} V = entry / E[beta_(g,xi)].
/// The residual is the largest relative spread (max - min) / max|.| of those
/// implied values across all factorizations of one sorted V multi-index.
SymmetryResult symmetry_check(const DerivativeTable& table, const MomentLookup& moments,
                              double tau = kDefaultRelevance);

/// Sign of d Ybar_1 / d x_11.
Sign sign_first_moment(const DerivativeTable& table, double tau = kDefaultRelevance);

/// K x K matrix of sign(d_jk V(0)) from order-2 entries of `v`.
std::vector<std::vector<Sign>> complementarity_signs(const VDerivTable& v, int goods,
                                                     double tau = kDefaultRelevance);

/// Most relevant characteristic assignment per good tuple, orders 1..table order.
std::vector<RelevanceEntry> relevance_map(const DerivativeTable& table);

struct DiagnosticsReport {
    std::optional<double> cauchy_schwarz_stat;
    std::string cauchy_schwarz_note;
    SymmetryResult symmetry;
    std::vector<RelevanceEntry> relevance;
    Sign sign_beta11 = Sign::Indeterminate;
    std::vector<std::vector<Sign>> complementarity;
    double min_v_diagonal = 0.0;
};

DiagnosticsReport run_diagnostics(const DerivativeTable& table, const VDerivTable& v,
                                  const MomentLookup& moments, double tau = kDefaultRelevance);

} // namespace rcid

#endif // RCID_DIAGNOSTICS_HPP_
