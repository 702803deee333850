#ifndef RCID_SCENARIO_HPP_
#define RCID_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rcid/asf.hpp"
#include "rcid/diagnostics.hpp"
#include "rcid/model.hpp"
#include "rcid/numdiff.hpp"
#include "rcid/recovery.hpp"
#include "rcid/tables.hpp"
#include "rcid/welfare.hpp"

namespace rcid {

struct AsfBlock {
    AsfStrategy strategy = AsfStrategy::ClosedForm; // ClosedForm/Enumeration mean "exact"
    std::size_t draws = 20000;
};

struct RecoveryBlock {
    Route route = Route::Scale;
    int max_order = 2;
    std::optional<std::vector<double>> scale;  // nullopt: take E[b11^M] from the beta block
    std::optional<double> abs_mean;            // nullopt: take |E[b11]| from the beta block
    std::optional<VDerivTable> v_derivs;       // nullopt: closed-form V of the model
    double tau_rel = kDefaultRelevance;
};

struct WelfareBlock {
    std::vector<std::vector<double>> points;
    Weighting weighting = Weighting::Unweighted;
    double trust_radius = kDefaultTrustRadius;
    bool path_integral = false;
    int nodes = kDefaultQuadratureNodes;
};

struct DiagnosticsBlock {
    bool cauchy_schwarz = true;
    bool symmetry = true;
};

struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 0;
    ModelSpec model;
    BetaDistribution beta;
    AsfBlock asf;
    FdScheme fd;
    RecoveryBlock recovery;
    WelfareBlock welfare;
    DiagnosticsBlock diagnostics;
};

/// Strict parse: unknown keys, wrong types and invalid values raise ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

/// Canonical echo with every default filled in; parses back to the same config.
nlohmann::json to_json(const ScenarioConfig& config);

struct WelfareRow {
    std::vector<double> x;
    Flagged<double> taylor;
    std::optional<double> path;
    double exact = 0.0;
};

struct RunReport {
    std::string name;
    std::string status = "ok";
    std::string failure;
    int failed_order = 0;
    std::vector<MomentTable> moments;
    std::vector<std::map<MomentIndex, double>> truth;
    VDerivTable v_derivs;
    std::optional<VDerivTable> v_true;
    std::vector<WelfareRow> welfare;
    std::optional<DiagnosticsReport> diagnostics;
    nlohmann::json config_echo;
    double elapsed_seconds = 0.0;

    int exit_code() const { return status == "ok" ? 0 : 2; }
};

RunReport run_scenario(const ScenarioConfig& config);

/// Writes moments_order<M>.csv, v_derivs.csv, diagnostics.csv, welfare.csv,
/// summary.json and run_metadata.json. Everything except run_metadata.json
/// is a pure function of the report.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// %.17g rendering used throughout the reports.
std::string format_number(double v);

} // namespace rcid

#endif // RCID_SCENARIO_HPP_
