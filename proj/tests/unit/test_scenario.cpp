#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include "doctest.h"

#include "rcid/errors.hpp"
#include "rcid/scenario.hpp"

using namespace rcid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = RCID_SCENARIO_DIR;
const std::string kCli = RCID_CLI_PATH;

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("rcid_test_scenario_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(rc);
#else
    return rc;
#endif
}

json minimal() {
    return json::parse(R"({
      "model": {"type": "logit", "dims": [1, 1], "alphas": [0, 0], "outside_good": true},
      "beta": {"type": "discrete", "points": [[1, 1], [1, 3]], "weights": [0.5, 0.5]}
    })");
}

} // namespace

TEST_CASE("every bundled scenario parses") {
    int n = 0;
    for (const auto& e : fs::directory_iterator(kScenarios)) {
        if (e.path().extension() != ".json")
            continue;
        INFO(e.path().string());
        CHECK_NOTHROW(load_config(e.path()));
        ++n;
    }
    CHECK(n >= 6);
}

TEST_CASE("config echo round-trips") {
    for (const auto& e : fs::directory_iterator(kScenarios)) {
        if (e.path().extension() != ".json")
            continue;
        INFO(e.path().string());
        const auto once = to_json(load_config(e.path()));
        const auto twice = to_json(parse_config(once));
        CHECK(once == twice);
    }
}

TEST_CASE("defaults are filled in") {
    const auto c = parse_config(minimal());
    CHECK(c.recovery.route == Route::Scale);
    CHECK(c.recovery.max_order == 2);
    CHECK_FALSE(c.recovery.scale.has_value());
    CHECK(c.fd.kind == FdKind::Central);
    CHECK(c.recovery.tau_rel == kDefaultRelevance);
    const auto echo = to_json(c);
    CHECK(echo["recovery"]["scale"] == "oracle");
    CHECK(echo["fd"]["step"].is_null());
}

TEST_CASE("unknown keys are rejected") {
    auto top = minimal();
    top["colour"] = "blue";
    CHECK_THROWS_AS(parse_config(top), ConfigError);
    auto nested = minimal();
    nested["fd"] = {{"scheme", "central"}, {"stepsize", 0.01}};
    CHECK_THROWS_AS(parse_config(nested), ConfigError);
    auto model = minimal();
    model["model"]["smoothing"] = 1.0;
    CHECK_THROWS_AS(parse_config(model), ConfigError);
}

TEST_CASE("invalid values are rejected") {
    auto order = minimal();
    order["recovery"] = {{"max_order", 0}};
    CHECK_THROWS_AS(parse_config(order), ConfigError);
    auto weights = minimal();
    weights["beta"]["weights"] = {0.5, 0.6};
    CHECK_THROWS_AS(parse_config(weights), ConfigError);
    auto type = minimal();
    type["model"]["dims"] = "two";
    CHECK_THROWS_AS(parse_config(type), ConfigError);
    auto scale = minimal();
    scale["recovery"] = {{"scale", "guess"}};
    CHECK_THROWS_AS(parse_config(scale), ConfigError);
    auto route = minimal();
    route["recovery"] = {{"route", "sideways"}};
    CHECK_THROWS_AS(parse_config(route), ConfigError);
}

TEST_CASE("mixture scenario recovers the oracle moments") {
    const auto rep = run_scenario(load_config(kScenarios / "logit_k2_mixture.json"));
    REQUIRE(rep.status == "ok");
    REQUIRE(rep.moments.size() == 3);
    const CharSlot a{1, 1}, b{2, 1};
    CHECK(rep.moments[0].at(MomentIndex({b})) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.moments[1].at(MomentIndex({a, b})) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(rep.moments[1].at(MomentIndex({b, b})) == doctest::Approx(5.0).epsilon(1e-8));
    for (std::size_t i = 0; i < rep.moments.size(); ++i)
        for (const auto& [idx, e] : rep.moments[i].entries())
            CHECK(std::abs(e.value - rep.truth[i].at(idx)) < 1e-4 * std::abs(rep.truth[i].at(idx)));
    REQUIRE(rep.v_true.has_value());
    for (const auto& [key, e] : rep.v_derivs.entries())
        CHECK(e.value == doctest::Approx(rep.v_true->at(key)).epsilon(1e-6));
    REQUIRE(rep.welfare.size() == 4);
    for (const auto& w : rep.welfare) {
        CHECK(std::abs(w.taylor.value - w.exact) < 1e-4);
        REQUIRE(w.path.has_value());
        CHECK(std::abs(*w.path - w.exact) < 1e-8);
    }
    REQUIRE(rep.diagnostics.has_value());
    CHECK(*rep.diagnostics->cauchy_schwarz_stat == doctest::Approx(1.25).epsilon(1e-6));
}

TEST_CASE("irrelevant regressors end in a relevance failure") {
    const auto rep = run_scenario(load_config(kScenarios / "beta_zero.json"));
    CHECK(rep.status == "relevance_failure");
    CHECK(rep.failed_order == 1);
    CHECK(rep.exit_code() == 2);
    CHECK(rep.moments.empty());
}

TEST_CASE("a failure keeps the lower orders") {
    auto j = minimal();
    j["model"]["outside_good"] = false;
    j["recovery"] = {{"max_order", 2}, {"scale", {1.0, 1.0}}};
    const auto rep = run_scenario(parse_config(j));
    CHECK(rep.status == "relevance_failure");
    CHECK(rep.failed_order == 2);
    CHECK(rep.moments.size() == 1);
}

TEST_CASE("report files") {
    const auto dir = scratch("files");
    const auto rep = run_scenario(load_config(kScenarios / "logit_k2_mixture.json"));
    write_report(rep, dir);
    for (const char* f : {"moments_order1.csv", "moments_order2.csv", "moments_order3.csv",
                          "v_derivs.csv", "diagnostics.csv", "welfare.csv", "summary.json",
                          "run_metadata.json"})
        CHECK(fs::exists(dir / f));
    const auto csv = slurp(dir / "moments_order2.csv");
    CHECK(csv.rfind("index,recovered,true,abs_err,rel_err,route\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["status"] == "ok");
    CHECK(summary["toolkit"]["name"] == "rcid");
    CHECK(parse_config(summary["config"]).recovery.max_order == 3);
}

TEST_CASE("number rendering") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("Monte Carlo strategy is reproducible by seed") {
    auto j = minimal();
    j["model"] = json::parse(R"({"type": "bundle", "dims": [1, 1], "smoothing": 0.5,
        "scenarios": [{"weight": 0.5, "intercepts": [0.2, -0.1]},
                      {"weight": 0.5, "intercepts": [-0.3, 0.1], "pairwise": [{"goods": [1, 2], "value": 0.4}]}]})");
    j["asf"] = {{"strategy", "monte_carlo"}, {"draws", 2000}};
    j["recovery"] = {{"max_order", 1}};
    j["diagnostics"] = {{"cauchy_schwarz", false}, {"symmetry", false}};
    j["seed"] = 7;
    const auto a = run_scenario(parse_config(j));
    const auto b = run_scenario(parse_config(j));
    CHECK(a.status == b.status);
    REQUIRE(a.v_derivs.size() == b.v_derivs.size());
    for (const auto& [key, e] : a.v_derivs.entries())
        CHECK(b.v_derivs.at(key) == e.value);
    j["seed"] = 8;
    const auto c = run_scenario(parse_config(j));
    CHECK(c.v_derivs.at({1}) != a.v_derivs.at({1}));
}

TEST_CASE("command line exit codes") {
    const auto ok = scratch("cli_ok");
    CHECK(run_cli("run --config " + (kScenarios / "logit_k2_mixture.json").string() + " --out " +
                  ok.string()) == 0);
    CHECK(fs::exists(ok / "summary.json"));

    const auto zero = scratch("cli_zero");
    CHECK(run_cli("run --config " + (kScenarios / "beta_zero.json").string() + " --out " +
                  zero.string()) == 2);
    const auto summary = json::parse(slurp(zero / "summary.json"));
    CHECK(summary["status"] == "relevance_failure");
    CHECK(summary["failure"]["order"] == 1);

    const auto bad = scratch("cli_bad");
    {
        std::ofstream(bad / "broken.json") << "{ \"model\": ";
        std::ofstream(bad / "unknown.json") << R"({"model": {}, "beta": {}, "extra": 1})";
    }
    CHECK(run_cli("run --config " + (bad / "broken.json").string() + " --out " +
                  (bad / "out").string()) == 1);
    CHECK(run_cli("run --config " + (bad / "unknown.json").string() + " --out " +
                  (bad / "out").string()) == 1);
    CHECK_FALSE(fs::exists(bad / "out" / "summary.json"));
}

TEST_CASE("command line overrides") {
    const auto dir = scratch("cli_override");
    CHECK(run_cli("run --config " + (kScenarios / "logit_k2_mixture.json").string() + " --out " +
                  dir.string() + " --max-order 1 --route vknown --seed 11") == 0);
    CHECK(fs::exists(dir / "moments_order1.csv"));
    CHECK_FALSE(fs::exists(dir / "moments_order2.csv"));
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["config"]["recovery"]["route"] == "vknown");
    CHECK(summary["config"]["seed"] == 11);
    CHECK(run_cli("run --config " + (kScenarios / "logit_k2_mixture.json").string() + " --out " +
                  dir.string() + " --scheme sideways") != 0);
}

TEST_CASE("reports are byte-identical across runs") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto cfg = (kScenarios / "bundle_k2_consideration.json").string();
    REQUIRE(run_cli("run --config " + cfg + " --out " + a.string()) == 0);
    REQUIRE(run_cli("run --config " + cfg + " --out " + b.string()) == 0);
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().filename() == "run_metadata.json")
            continue;
        INFO(e.path().filename().string());
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
}
