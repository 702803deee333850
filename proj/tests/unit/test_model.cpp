#include <algorithm>
#include <array>

#include "doctest.h"
#include "fixtures.hpp"

#include "rcid/errors.hpp"
#include "rcid/model.hpp"

using namespace rcid;

namespace {

// Example-2 style scenario: eps = (eps_10, eps_01, eps_11).
FiniteBundle one_scenario(double e10, double e01, double e11,
                          std::optional<std::vector<Bundle>> consider = std::nullopt) {
    FiniteBundle fb;
    fb.scenarios = {{1.0, {e10, e01}, {{1, 2, e11}}, std::move(consider)}};
    return fb;
}

const std::vector<double> zero2{0.0, 0.0};

} // namespace

TEST_CASE("latent utility of a bundle") {
    const ModelSpec m({1, 1}, one_scenario(1, -1, 1));
    const std::vector<double> beta{0.7, -0.2};
    const auto u = latent_utility(m, std::vector<double>{1, 1}, zero2, beta, 0);
    CHECK(u.value() == doctest::Approx(1.0));
    CHECK(latent_utility(m, std::vector<double>{0, 0}, std::vector<double>{3, 4}, beta, 0).value() ==
          0.0);
    CHECK(latent_utility(m, std::vector<double>{1, 0}, std::vector<double>{2, 0}, beta, 0).value() ==
          doctest::Approx(1.0 + 1.4));
}

TEST_CASE("excluded bundles carry no value") {
    const ModelSpec m({1, 1}, one_scenario(1, -1, 1, std::vector<Bundle>{{0, 0}, {1, 0}}));
    const auto u = latent_utility(m, std::vector<double>{1, 1}, zero2, zero2, 0);
    CHECK(u.is_excluded());
    CHECK_THROWS_AS(u.value(), PreconditionError);
}

TEST_CASE("latent utility rejects bad input") {
    const ModelSpec m({1, 1}, one_scenario(1, -1, 1));
    CHECK_THROWS_AS(latent_utility(m, std::vector<double>{1, 1}, std::vector<double>{0}, zero2, 0),
                    ConfigError);
    CHECK_THROWS_AS(latent_utility(m, std::vector<double>{1, 1, 0}, zero2, zero2, 0), ConfigError);
    CHECK_THROWS_AS(latent_utility(m, std::vector<double>{2, 0}, zero2, zero2, 0),
                    PreconditionError);
}

TEST_CASE("solve_choice averages ties") {
    const ModelSpec m({1, 1}, one_scenario(1, -1, 1));
    const auto y = solve_choice(m, zero2, zero2, 0);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 0.5);
}

TEST_CASE("solve_choice inside a consideration set") {
    const ModelSpec m({1, 1}, one_scenario(-2, 0, 0, std::vector<Bundle>{{0, 0}, {1, 0}}));
    const auto y = solve_choice(m, zero2, std::vector<double>{1, 1}, 0);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);
}

TEST_CASE("four-way tie at zero utilities") {
    const ModelSpec m({1, 1}, one_scenario(0, 0, 0));
    const auto y = solve_choice(m, zero2, zero2, 0);
    CHECK(y[0] == 0.5);
    CHECK(y[1] == 0.5);
}

TEST_CASE("solve_choice needs a finite budget") {
    CHECK_THROWS_AS(solve_choice(fixtures::logit2(false), zero2, zero2, 0), PreconditionError);
}

TEST_CASE("all bundles excluded is infeasible") {
    GenericFiniteEps g;
    g.budget = {{0, 0}, {1, 0}};
    g.scenarios = {{1.0, {Utility::excluded(), Utility::excluded()}}};
    const ModelSpec m({1, 1}, g);
    CHECK_THROWS_AS(solve_choice(m, zero2, zero2, 0), InfeasibleScenarioError);
}

TEST_CASE("positive rescaling leaves the argmax unchanged") {
    const std::array<double, 5> lambdas{0.01, 0.5, 1.0, 3.0, 1e4};
    const std::vector<std::array<double, 3>> eps{{1, -1, 1}, {0.3, 0.3, -0.2}, {0, 0, 0}, {-1, 2, 0.5}};
    const std::vector<std::vector<double>> xs{{0, 0}, {0.5, -0.5}, {1, 1}, {-0.25, 0.75}};
    const std::vector<double> beta{1.0, 2.0};
    for (const auto& e : eps) {
        for (const auto& x : xs) {
            const auto base = solve_choice(ModelSpec({1, 1}, one_scenario(e[0], e[1], e[2])), x, beta, 0);
            for (double lam : lambdas) {
                const ModelSpec m({1, 1}, one_scenario(lam * e[0], lam * e[1], lam * e[2]));
                std::vector<double> b{lam * beta[0], lam * beta[1]};
                const auto y = solve_choice(m, x, b, 0);
                CHECK(y == base);
            }
        }
    }
}

TEST_CASE("choices stay in the unit cube") {
    for (int s = 0; s < 6; ++s) {
        const ModelSpec m({1, 1}, fixtures::six_scenarios());
        for (double x1 : {-2.0, -0.1, 0.0, 0.4, 3.0})
            for (double x2 : {-1.0, 0.0, 2.0}) {
                const auto y = solve_choice(m, std::vector<double>{x1, x2}, std::vector<double>{1, 1},
                                            static_cast<std::size_t>(s));
                for (double q : y) {
                    CHECK(q >= 0.0);
                    CHECK(q <= 1.0);
                }
            }
    }
}

TEST_CASE("true moments of a discrete mixture") {
    const auto d = fixtures::mixture_13();
    CHECK(true_moment(d, MomentIndex::power({2, 1}, 2)) == 5.0);
    CHECK(true_moment(d, MomentIndex({{1, 1}, {2, 1}})) == 2.0);
    CHECK(true_moment(fixtures::unit_point(), MomentIndex({{1, 1}, {2, 1}, {2, 1}})) == 1.0);
}

TEST_CASE("moment indices are canonical") {
    const MomentIndex a({{2, 1}, {1, 1}, {2, 1}});
    const MomentIndex b({{2, 1}, {2, 1}, {1, 1}});
    CHECK(a == b);
    CHECK(a.to_string() == "b[1:1]*b[2:1]*b[2:1]");
    const auto d = fixtures::mixture_13();
    CHECK(true_moment(d, a) == true_moment(d, b));
    CHECK(a.goods() == std::vector<int>{1, 2, 2});
}

TEST_CASE("product distributions factorize") {
    const auto d = BetaDistribution::product(
        {2, 1}, {{{0.5, 1.5}, {0.5, 0.5}}, {{-1.0, 2.0}, {0.25, 0.75}}, {{1.0, 3.0}, {0.5, 0.5}}});
    CHECK(d.support().size() == 8);
    const double m11 = 1.0, m12 = 1.25, m21sq = 5.0;
    CHECK(true_moment(d, MomentIndex({{1, 1}, {1, 2}, {2, 1}, {2, 1}})) ==
          doctest::Approx(m11 * m12 * m21sq));
    // Expanded grid gives the same value through the discrete path.
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    for (const auto& s : d.support()) {
        pts.push_back(s.beta);
        w.push_back(s.weight);
    }
    const auto flat = BetaDistribution::discrete({2, 1}, pts, w);
    for (const auto& idx : {MomentIndex({{1, 1}, {1, 2}}), MomentIndex({{1, 2}, {1, 2}, {2, 1}})})
        CHECK(true_moment(flat, idx) == doctest::Approx(true_moment(d, idx)).epsilon(1e-14));
}

TEST_CASE("configuration is validated") {
    CHECK_THROWS_AS(BetaDistribution::discrete({1, 1}, {{1, 1}}, {0.9}), ConfigError);
    CHECK_THROWS_AS(BetaDistribution::discrete({1, 1}, {{1, 1, 1}}, {1.0}), ConfigError);
    CHECK_THROWS_AS(ModelSpec({1, 1}, AnalyticLogit{{0.0}, false}), ConfigError);
    CHECK_THROWS_AS(ModelSpec({1, 1}, AnalyticLogit{{0, 0}, false}, {0.0}), ConfigError);
    FiniteBundle bad;
    bad.scenarios = {{1.0, {0, 0}, {}, std::vector<Bundle>{{2, 0}}}};
    CHECK_THROWS_AS(ModelSpec({1, 1}, bad), ConfigError);
    bad.scenarios = {{1.0, {0, 0}, {}, std::vector<Bundle>{}}};
    CHECK_THROWS_AS(ModelSpec({1, 1}, bad), ConfigError);
    bad.scenarios = {{0.6, {0, 0}, {}, std::nullopt}, {0.6, {0, 0}, {}, std::nullopt}};
    CHECK_THROWS_AS(ModelSpec({1, 1}, bad), ConfigError);
    const auto m = fixtures::logit2(false);
    CHECK_THROWS_AS(m.slot(3, 1), ConfigError);
    CHECK_THROWS_AS(m.slot(1, 2), ConfigError);
}

TEST_CASE("indices are recentered") {
    const ModelSpec m({1, 1}, AnalyticLogit{{0, 0}, false}, {1.0, -1.0});
    const auto u = m.indices(std::vector<double>{1.5, 0.0}, std::vector<double>{2.0, 3.0});
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == doctest::Approx(3.0));
}

TEST_CASE("power index") {
    const ModelSpec m({1, 1}, AnalyticLogit{{0, 0}, false}, {1.0, 1.0}, IndexForm::Power);
    const auto u = m.indices(std::vector<double>{2.0, 3.0}, std::vector<double>{1.0, 2.0});
    CHECK(u[0] == doctest::Approx(2.0));
    CHECK(u[1] == doctest::Approx(9.0));
    CHECK_THROWS_AS(m.indices(std::vector<double>{0.0, 1.0}, std::vector<double>{1, 1}),
                    PreconditionError);
}
