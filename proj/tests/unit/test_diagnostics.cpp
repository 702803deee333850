#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "rcid/diagnostics.hpp"
#include "rcid/errors.hpp"
#include "rcid/indirect_utility.hpp"

using namespace rcid;

namespace {

DerivativeTable table_for(const ModelSpec& m, const BetaDistribution& b, int order) {
    return derivative_table(AsfEvaluator(m, b), order, FdScheme::central());
}

MomentLookup oracle(const BetaDistribution& b) {
    return [b](const MomentIndex& idx) -> std::optional<double> { return true_moment(b, idx); };
}

const CharSlot s11{1, 1};
const CharSlot s21{2, 1};

} // namespace

TEST_CASE("Cauchy-Schwarz statistic") {
    const auto pm = table_for(fixtures::logit2(true, {0.3, -0.2}), fixtures::unit_point(), 2);
    CHECK(std::abs(cauchy_schwarz_check(pm) - 1.0) < 1e-6);
    const auto mix = table_for(fixtures::logit2(true), fixtures::mixture_13(), 2);
    // E[b11^2] E[b21^2] / E[b11 b21]^2 = 1 * 5 / 4
    CHECK(cauchy_schwarz_check(mix) == doctest::Approx(1.25).epsilon(1e-7));
    const auto bundle = table_for(ModelSpec({1, 1}, fixtures::six_scenarios()), fixtures::four_point(), 2);
    CHECK(cauchy_schwarz_check(bundle) >= 1.0 - 1e-8);
}

TEST_CASE("Cauchy-Schwarz needs relevant denominators") {
    const auto flat = table_for(fixtures::logit2(false), fixtures::mixture_13(), 2);
    CHECK_THROWS_AS(cauchy_schwarz_check(flat), RelevanceError);
    const auto first = table_for(fixtures::logit2(true), fixtures::mixture_13(), 1);
    CHECK_THROWS_AS(cauchy_schwarz_check(first), PreconditionError);
}

TEST_CASE("symmetry residual on model tables") {
    const auto pm = table_for(fixtures::logit2(true, {0.1, 0.4}), fixtures::unit_point(), 3);
    const auto r = symmetry_check(pm, oracle(fixtures::unit_point()));
    CHECK(r.applicable);
    CHECK(r.comparisons > 0);
    CHECK(r.residual < 1e-6);

    const auto mix = table_for(fixtures::logit2(true), fixtures::mixture_13(), 3);
    CHECK(symmetry_check(mix, oracle(fixtures::mixture_13())).residual < 1e-5);
}

TEST_CASE("symmetry check on an order-1 table is vacuous") {
    const auto t = table_for(fixtures::logit2(true), fixtures::mixture_13(), 1);
    const auto r = symmetry_check(t, oracle(fixtures::mixture_13()));
    CHECK_FALSE(r.applicable);
    CHECK(r.residual == 0.0);
    CHECK(r.comparisons == 0);
}

TEST_CASE("symmetry check flags corrupted entries") {
    auto t = table_for(fixtures::logit2(true), fixtures::mixture_13(), 2);
    const auto clean = symmetry_check(t, oracle(fixtures::mixture_13())).residual;
    const MomentIndex ab({s11, s21});
    auto negated = t;
    negated.set(1, ab, -t.at(1, ab));
    const auto bad = symmetry_check(negated, oracle(fixtures::mixture_13()));
    CHECK(bad.residual > 1.0);
    CHECK(bad.worst == GoodTuple{1, 1, 2});

    auto bumped = t;
    bumped.set(2, MomentIndex({s11, s11}), 1.01 * t.at(2, MomentIndex({s11, s11})));
    const auto small = symmetry_check(bumped, oracle(fixtures::mixture_13())).residual;
    CHECK(small > clean);
    CHECK(small > 5e-3);
}

TEST_CASE("symmetry check with recovered moments") {
    const auto t = table_for(fixtures::logit2(true), fixtures::mixture_13(), 2);
    const std::vector<MomentTable> m{recover_moments_scale(t, 1, 1.0), recover_moments_scale(t, 2, 1.0)};
    const auto r = symmetry_check(t, lookup_in(m));
    CHECK(r.applicable);
    CHECK(r.residual < 1e-5);
}

TEST_CASE("sign of the first moment") {
    const auto pos = table_for(fixtures::logit2(true), fixtures::mixture_13(), 1);
    CHECK(sign_first_moment(pos) == Sign::Positive);
    const auto neg = table_for(fixtures::logit2(true),
                               BetaDistribution::discrete({1, 1}, {{-1, 1}, {-1, 3}}, {0.5, 0.5}), 1);
    CHECK(sign_first_moment(neg) == Sign::Negative);
    const auto zero = table_for(fixtures::logit2(true), BetaDistribution::point_mass({1, 1}, {0, 1}), 1);
    CHECK(sign_first_moment(zero) == Sign::Indeterminate);
    CHECK(std::string(to_string(Sign::Negative)) == "-");
    CHECK(std::string(to_string(Sign::Indeterminate)) == "indeterminate");
}

TEST_CASE("logit goods are substitutes") {
    for (bool outside : {false, true}) {
        const auto v = analytic_v_derivatives(fixtures::logit2(outside, {0.5, -0.5}), 2);
        const auto s = complementarity_signs(v, 2);
        CHECK(s[0][1] == Sign::Negative);
        CHECK(s[1][0] == Sign::Negative);
        CHECK(s[0][0] == Sign::Positive);
        CHECK(s[1][1] == Sign::Positive);
    }
}

TEST_CASE("relevance map lists every good tuple") {
    const ModelSpec m({2, 1}, AnalyticLogit{{0, 0}, true});
    const auto b = BetaDistribution::discrete({2, 1}, {{1.0, 0.1, 1.0}, {1.0, 0.2, 2.0}}, {0.5, 0.5});
    const auto t = table_for(m, b, 2);
    const auto map = relevance_map(t);
    CHECK(map.size() == 2 + 3);
    for (const auto& e : map) {
        CHECK(e.magnitude > 0.0);
        CHECK(e.selected.goods() == e.goods);
    }
    // beta_11 dominates beta_12 on good 1.
    CHECK(map.front().selected == MomentIndex({s11}));
}

TEST_CASE("full diagnostics report") {
    const auto m = fixtures::logit2(true);
    const auto t = table_for(m, fixtures::mixture_13(), 2);
    const auto r = run_diagnostics(t, analytic_v_derivatives(m, 2), oracle(fixtures::mixture_13()));
    REQUIRE(r.cauchy_schwarz_stat.has_value());
    CHECK(*r.cauchy_schwarz_stat == doctest::Approx(1.25).epsilon(1e-7));
    CHECK(r.sign_beta11 == Sign::Positive);
    CHECK(r.min_v_diagonal > 0.0);
    CHECK(r.complementarity[0][1] == r.complementarity[1][0]);

    const auto flat = table_for(fixtures::logit2(false), fixtures::mixture_13(), 2);
    const auto rf = run_diagnostics(flat, analytic_v_derivatives(fixtures::logit2(false), 2),
                                    oracle(fixtures::mixture_13()));
    CHECK_FALSE(rf.cauchy_schwarz_stat.has_value());
    CHECK_FALSE(rf.cauchy_schwarz_note.empty());
}
