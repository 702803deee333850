#include "rcid/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "rcid/errors.hpp"
#include "rcid/indirect_utility.hpp"
#include "rcid/version.hpp"

namespace rcid {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    expect_object(j, where);
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            throw ConfigError(where + ": unknown key '" + k + "'");
}

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

// ---- model ----------------------------------------------------------------

Bundle parse_bundle(const json& j) { return j.get<std::vector<double>>(); }

std::vector<Bundle> parse_bundles(const json& j) {
    std::vector<Bundle> out;
    for (const auto& b : j)
        out.push_back(parse_bundle(b));
    return out;
}

ModelSpec parse_model(const json& j) {
    const std::string where = "model";
    expect_object(j, where);
    const auto type = require(j, "type", where).get<std::string>();
    const auto dims = require(j, "dims", where).get<std::vector<int>>();
    const std::string index = value_or<std::string>(j, "index", "linear");
    IndexForm form;
    if (index == "linear")
        form = IndexForm::Linear;
    else if (index == "power")
        form = IndexForm::Power;
    else
        throw ConfigError("model: unknown index form '" + index + "'");
    std::vector<double> center = value_or<std::vector<double>>(j, "center", {});
    if (center.empty() && form == IndexForm::Power) {
        std::size_t n = 0;
        for (int d : dims)
            n += static_cast<std::size_t>(std::max(d, 0));
        center.assign(n, 1.0);
    }
    const bool nonneg = value_or<bool>(j, "nonnegative_domain", false);

    if (type == "logit") {
        allow_keys(j, {"type", "dims", "center", "index", "nonnegative_domain", "alphas",
                       "outside_good"},
                   where);
        AnalyticLogit v{require(j, "alphas", where).get<std::vector<double>>(),
                        value_or<bool>(j, "outside_good", false)};
        return ModelSpec(dims, v, center, form, nonneg);
    }
    if (type == "bundle") {
        allow_keys(j, {"type", "dims", "center", "index", "nonnegative_domain", "smoothing",
                       "lattice", "scenarios"},
                   where);
        FiniteBundle v;
        v.smoothing = value_or<double>(j, "smoothing", 0.0);
        if (j.contains("lattice"))
            v.lattice = parse_bundles(j.at("lattice"));
        for (const auto& s : require(j, "scenarios", where)) {
            allow_keys(s, {"weight", "intercepts", "pairwise", "consideration"},
                       "model.scenarios[]");
            BundleScenario b;
            b.weight = require(s, "weight", "model.scenarios[]").get<double>();
            b.intercepts = require(s, "intercepts", "model.scenarios[]").get<std::vector<double>>();
            if (s.contains("pairwise"))
                for (const auto& p : s.at("pairwise")) {
                    allow_keys(p, {"goods", "value"}, "model.scenarios[].pairwise[]");
                    const auto g = require(p, "goods", "pairwise").get<std::vector<int>>();
                    if (g.size() != 2)
                        throw ConfigError("pairwise term: 'goods' must name two goods");
                    b.pairwise.push_back({g[0], g[1], require(p, "value", "pairwise").get<double>()});
                }
            if (s.contains("consideration"))
                b.consideration = parse_bundles(s.at("consideration"));
            v.scenarios.push_back(std::move(b));
        }
        return ModelSpec(dims, v, center, form, nonneg);
    }
    if (type == "generic") {
        allow_keys(j, {"type", "dims", "center", "index", "nonnegative_domain", "smoothing",
                       "budget", "scenarios"},
                   where);
        GenericFiniteEps v;
        v.smoothing = value_or<double>(j, "smoothing", 0.0);
        v.budget = parse_bundles(require(j, "budget", where));
        for (const auto& s : require(j, "scenarios", where)) {
            allow_keys(s, {"weight", "disturbance"}, "model.scenarios[]");
            GenericScenario g;
            g.weight = require(s, "weight", "model.scenarios[]").get<double>();
            for (const auto& d : require(s, "disturbance", "model.scenarios[]")) {
                if (d.is_null())
                    g.disturbance.push_back(Utility::excluded());
                else
                    g.disturbance.emplace_back(d.get<double>());
            }
            v.scenarios.push_back(std::move(g));
        }
        return ModelSpec(dims, v, center, form, nonneg);
    }
    throw ConfigError("model: unknown type '" + type + "'");
}

json model_to_json(const ModelSpec& m) {
    json j;
    j["dims"] = m.dims();
    j["center"] = m.center();
    j["index"] = m.index_form() == IndexForm::Linear ? "linear" : "power";
    j["nonnegative_domain"] = m.nonnegative_domain();
    if (const auto* l = std::get_if<AnalyticLogit>(&m.variant())) {
        j["type"] = "logit";
        j["alphas"] = l->alphas;
        j["outside_good"] = l->outside_good;
    } else if (const auto* b = std::get_if<FiniteBundle>(&m.variant())) {
        j["type"] = "bundle";
        j["smoothing"] = b->smoothing;
        if (!b->lattice.empty())
            j["lattice"] = b->lattice;
        json scenarios = json::array();
        for (const auto& s : b->scenarios) {
            json e{{"weight", s.weight}, {"intercepts", s.intercepts}};
            json pairs = json::array();
            for (const auto& p : s.pairwise)
                pairs.push_back({{"goods", {p.first, p.second}}, {"value", p.value}});
            e["pairwise"] = pairs;
            if (s.consideration)
                e["consideration"] = *s.consideration;
            scenarios.push_back(e);
        }
        j["scenarios"] = scenarios;
    } else {
        const auto& g = std::get<GenericFiniteEps>(m.variant());
        j["type"] = "generic";
        j["smoothing"] = g.smoothing;
        j["budget"] = g.budget;
        json scenarios = json::array();
        for (const auto& s : g.scenarios) {
            json d = json::array();
            for (const auto& u : s.disturbance)
                d.push_back(u.is_excluded() ? json(nullptr) : json(u.value()));
            scenarios.push_back({{"weight", s.weight}, {"disturbance", d}});
        }
        j["scenarios"] = scenarios;
    }
    return j;
}

// ---- beta -----------------------------------------------------------------

BetaDistribution parse_beta(const json& j, const std::vector<int>& dims) {
    const std::string where = "beta";
    expect_object(j, where);
    const auto type = require(j, "type", where).get<std::string>();
    if (type == "discrete") {
        allow_keys(j, {"type", "points", "weights"}, where);
        return BetaDistribution::discrete(
            dims, require(j, "points", where).get<std::vector<std::vector<double>>>(),
            require(j, "weights", where).get<std::vector<double>>());
    }
    if (type == "product") {
        allow_keys(j, {"type", "factors"}, where);
        std::vector<UnivariateFinite> coords;
        for (const auto& f : require(j, "factors", where)) {
            allow_keys(f, {"values", "weights"}, "beta.factors[]");
            coords.push_back({require(f, "values", "beta.factors[]").get<std::vector<double>>(),
                              require(f, "weights", "beta.factors[]").get<std::vector<double>>()});
        }
        return BetaDistribution::product(dims, std::move(coords));
    }
    throw ConfigError("beta: unknown type '" + type + "'");
}

json beta_to_json(const BetaDistribution& b) {
    if (const auto* d = std::get_if<BetaDistribution::DiscretePoints>(&b.variant()))
        return {{"type", "discrete"}, {"points", d->points}, {"weights", d->weights}};
    const auto& p = std::get<BetaDistribution::ProductUnivariate>(b.variant());
    json factors = json::array();
    for (const auto& c : p.coords)
        factors.push_back({{"values", c.values}, {"weights", c.weights}});
    return {{"type", "product"}, {"factors", factors}};
}

// ---- blocks ---------------------------------------------------------------

AsfBlock parse_asf(const json& j, const ModelSpec& model) {
    AsfBlock a;
    a.strategy = model.is_logit() ? AsfStrategy::ClosedForm : AsfStrategy::Enumeration;
    if (j.is_null())
        return a;
    allow_keys(j, {"strategy", "draws"}, "asf");
    const auto s = value_or<std::string>(j, "strategy", "exact");
    if (s == "monte_carlo")
        a.strategy = AsfStrategy::MonteCarlo;
    else if (s != "exact")
        throw ConfigError("asf: unknown strategy '" + s + "'");
    a.draws = value_or<std::size_t>(j, "draws", a.draws);
    if (a.draws == 0)
        throw ConfigError("asf: draws must be positive");
    return a;
}

FdScheme parse_fd(const json& j) {
    FdScheme f;
    if (j.is_null())
        return f;
    allow_keys(j, {"scheme", "step", "richardson", "threads"}, "fd");
    const auto s = value_or<std::string>(j, "scheme", "central");
    if (s == "central")
        f = FdScheme::central();
    else if (s == "forward")
        f = FdScheme::forward();
    else
        throw ConfigError("fd: unknown scheme '" + s + "'");
    if (j.contains("step") && !j.at("step").is_null())
        f.base_step = j.at("step").get<double>();
    f.richardson_levels = value_or<int>(j, "richardson", f.richardson_levels);
    f.threads = value_or<int>(j, "threads", f.threads);
    return f;
}

RecoveryBlock parse_recovery(const json& j) {
    RecoveryBlock r;
    if (j.is_null())
        return r;
    allow_keys(j, {"route", "max_order", "scale", "abs_mean", "v_derivs", "tau_rel"}, "recovery");
    r.route = parse_route(value_or<std::string>(j, "route", "scale"));
    r.max_order = value_or<int>(j, "max_order", r.max_order);
    if (r.max_order < 1 || r.max_order > 6)
        throw ConfigError("recovery: max_order must lie in 1..6");
    if (j.contains("scale")) {
        const auto& s = j.at("scale");
        if (s.is_string()) {
            if (s.get<std::string>() != "oracle")
                throw ConfigError("recovery: scale must be a list or \"oracle\"");
        } else {
            r.scale = s.get<std::vector<double>>();
        }
    }
    if (j.contains("abs_mean")) {
        const auto& a = j.at("abs_mean");
        if (a.is_string()) {
            if (a.get<std::string>() != "oracle")
                throw ConfigError("recovery: abs_mean must be a number or \"oracle\"");
        } else {
            r.abs_mean = a.get<double>();
        }
    }
    if (j.contains("v_derivs")) {
        const auto& v = j.at("v_derivs");
        if (v.is_string()) {
            if (v.get<std::string>() != "analytic")
                throw ConfigError("recovery: v_derivs must be a list or \"analytic\"");
        } else {
            VDerivTable t;
            for (const auto& e : v) {
                allow_keys(e, {"key", "value"}, "recovery.v_derivs[]");
                t.set(require(e, "key", "v_derivs").get<GoodTuple>(),
                      require(e, "value", "v_derivs").get<double>());
            }
            r.v_derivs = std::move(t);
        }
    }
    r.tau_rel = value_or<double>(j, "tau_rel", r.tau_rel);
    if (!(std::isfinite(r.tau_rel) && r.tau_rel > 0.0))
        throw ConfigError("recovery: tau_rel must be positive");
    if (r.scale) {
        if (static_cast<int>(r.scale->size()) < r.max_order)
            throw ConfigError("recovery: scale needs one value per order up to max_order");
        for (double s : *r.scale)
            if (!(std::isfinite(s) && s != 0.0))
                throw ConfigError("recovery: scale values must be finite and nonzero");
    }
    if (r.abs_mean && !(std::isfinite(*r.abs_mean) && *r.abs_mean > 0.0))
        throw ConfigError("recovery: abs_mean must be positive");
    return r;
}

WelfareBlock parse_welfare(const json& j, const ModelSpec& model) {
    WelfareBlock w;
    if (j.is_null())
        return w;
    allow_keys(j, {"points", "weighting", "trust_radius", "path_integral", "nodes"}, "welfare");
    w.points = value_or<std::vector<std::vector<double>>>(j, "points", {});
    for (const auto& p : w.points)
        if (p.size() != model.covariate_dim())
            throw ConfigError("welfare: evaluation point dimension differs from the model");
    w.weighting = parse_weighting(value_or<std::string>(j, "weighting", "unweighted"));
    w.trust_radius = value_or<double>(j, "trust_radius", w.trust_radius);
    if (!(std::isfinite(w.trust_radius) && w.trust_radius > 0.0))
        throw ConfigError("welfare: trust_radius must be positive");
    w.path_integral = value_or<bool>(j, "path_integral", false);
    w.nodes = value_or<int>(j, "nodes", w.nodes);
    if (w.nodes < 1)
        throw ConfigError("welfare: nodes must be positive");
    return w;
}

DiagnosticsBlock parse_diagnostics(const json& j) {
    DiagnosticsBlock d;
    if (j.is_null())
        return d;
    allow_keys(j, {"cauchy_schwarz", "symmetry"}, "diagnostics");
    d.cauchy_schwarz = value_or<bool>(j, "cauchy_schwarz", true);
    d.symmetry = value_or<bool>(j, "symmetry", true);
    return d;
}

const json& block(const json& j, const char* key) {
    static const json null;
    return j.contains(key) ? j.at(key) : null;
}

// ---- reports --------------------------------------------------------------

std::string csv_number(double v) { return format_number(v); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
}

std::string goods_label(const GoodTuple& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += (i ? " " : "") + std::to_string(g[i]);
    return s;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ScenarioConfig parse_config(const json& j) {
    try {
        allow_keys(j, {"name", "seed", "model", "beta", "asf", "fd", "recovery", "welfare",
                       "diagnostics"},
                   "config");
        const auto name = value_or<std::string>(j, "name", "scenario");
        const auto seed = value_or<std::uint64_t>(j, "seed", 0);
        auto model = parse_model(require(j, "model", "config"));
        auto beta = parse_beta(require(j, "beta", "config"), model.dims());
        auto asf = parse_asf(block(j, "asf"), model);
        auto fd = parse_fd(block(j, "fd"));
        fd.validate(model);
        auto recovery = parse_recovery(block(j, "recovery"));
        auto welfare = parse_welfare(block(j, "welfare"), model);
        auto diagnostics = parse_diagnostics(block(j, "diagnostics"));
        return ScenarioConfig{name, seed, std::move(model), std::move(beta), asf, fd,
                              std::move(recovery), std::move(welfare), diagnostics};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    return parse_config(load_json(path));
}

json to_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["model"] = model_to_json(c.model);
    j["beta"] = beta_to_json(c.beta);
    j["asf"] = {{"strategy", c.asf.strategy == AsfStrategy::MonteCarlo ? "monte_carlo" : "exact"},
                {"draws", c.asf.draws}};
    j["fd"] = {{"scheme", to_string(c.fd.kind)},
               {"step", c.fd.base_step ? json(*c.fd.base_step) : json(nullptr)},
               {"richardson", c.fd.richardson_levels},
               {"threads", c.fd.threads}};
    json r;
    r["route"] = to_string(c.recovery.route);
    r["max_order"] = c.recovery.max_order;
    r["scale"] = c.recovery.scale ? json(*c.recovery.scale) : json("oracle");
    r["abs_mean"] = c.recovery.abs_mean ? json(*c.recovery.abs_mean) : json("oracle");
    if (c.recovery.v_derivs) {
        json v = json::array();
        for (const auto& [key, e] : c.recovery.v_derivs->entries())
            v.push_back({{"key", key}, {"value", e.value}});
        r["v_derivs"] = v;
    } else {
        r["v_derivs"] = "analytic";
    }
    r["tau_rel"] = c.recovery.tau_rel;
    j["recovery"] = r;
    j["welfare"] = {{"points", c.welfare.points},
                    {"weighting", to_string(c.welfare.weighting)},
                    {"trust_radius", c.welfare.trust_radius},
                    {"path_integral", c.welfare.path_integral},
                    {"nodes", c.welfare.nodes}};
    j["diagnostics"] = {{"cauchy_schwarz", c.diagnostics.cauchy_schwarz},
                        {"symmetry", c.diagnostics.symmetry}};
    return j;
}

RunReport run_scenario(const ScenarioConfig& c) {
    const auto started = std::chrono::steady_clock::now();
    RunReport rep;
    rep.name = c.name;
    rep.config_echo = to_json(c);
    const auto& rc = c.recovery;
    const int M = rc.max_order;

    auto fail = [&rep](const char* status, const std::exception& e, int order) {
        rep.status = status;
        rep.failure = e.what();
        rep.failed_order = order;
    };

    std::optional<MonteCarloOptions> mc;
    if (c.asf.strategy == AsfStrategy::MonteCarlo)
        mc = MonteCarloOptions{c.seed, c.asf.draws};
    const AsfEvaluator evaluator(c.model, c.beta, c.asf.strategy, mc);

    std::optional<DerivativeTable> table;
    try {
        table = derivative_table(evaluator, M, c.fd);
    } catch (const Error& e) {
        fail("evaluation_failure", e, 0);
    }

    if (table) {
        int order = 1;
        try {
            std::optional<VDerivTable> vk;
            if (rc.route == Route::VKnown)
                vk = rc.v_derivs ? *rc.v_derivs : analytic_v_derivatives(c.model, M + 1);
            for (; order <= M; ++order) {
                switch (rc.route) {
                case Route::Scale: {
                    const double s =
                        rc.scale ? (*rc.scale)[order - 1]
                                 : true_moment(c.beta, MomentIndex::power({1, 1}, order));
                    rep.moments.push_back(recover_moments_scale(*table, order, s, rc.tau_rel));
                    break;
                }
                case Route::Independence:
                    if (order == 1) {
                        const double a = rc.abs_mean
                                             ? *rc.abs_mean
                                             : std::abs(true_moment(c.beta, MomentIndex::power({1, 1}, 1)));
                        rep.moments.push_back(independence_first_order(*table, a, rc.tau_rel));
                    } else {
                        const double m1 = rep.moments.front().at(MomentIndex::power({1, 1}, 1));
                        rep.moments.push_back(
                            independence_next_order(*table, rep.moments.back(), m1, rc.tau_rel));
                    }
                    break;
                case Route::VKnown:
                    rep.moments.push_back(recover_moments_vknown(*table, order, *vk));
                    break;
                }
            }
        } catch (const RelevanceError& e) {
            fail("relevance_failure", e, e.order() ? e.order() : order);
        } catch (const PreconditionError& e) {
            fail("precondition_failure", e, order);
        }

        for (const auto& t : rep.moments) {
            std::map<MomentIndex, double> truth;
            for (const auto& [idx, e] : t.entries())
                truth[idx] = true_moment(c.beta, idx);
            rep.truth.push_back(std::move(truth));
        }

        rep.v_derivs = v_gradient_at_center(*table);
        for (const auto& t : rep.moments) {
            try {
                rep.v_derivs.merge(recover_v_derivatives(*table, t, rc.tau_rel));
            } catch (const RelevanceError& e) {
                if (rep.status == "ok")
                    fail("relevance_failure", e, t.order() + 1);
                break;
            }
        }
        if (c.model.smoothing() > 0.0 && c.model.index_form() == IndexForm::Linear)
            rep.v_true = analytic_v_derivatives(c.model, static_cast<int>(rep.moments.size()) + 1);

        const auto lookup = lookup_in(rep.moments);
        DiagnosticsReport d = run_diagnostics(*table, rep.v_derivs, lookup, rc.tau_rel);
        if (!c.diagnostics.cauchy_schwarz) {
            d.cauchy_schwarz_stat.reset();
            d.cauchy_schwarz_note = "disabled";
        }
        if (!c.diagnostics.symmetry)
            d.symmetry = SymmetryResult{};
        rep.diagnostics = std::move(d);
    }

    if (!c.welfare.points.empty() && rep.v_derivs.size() > 0) {
        const VModel taylor = TaylorV{rep.v_derivs, c.welfare.trust_radius};
        std::optional<VModel> path;
        if (c.welfare.path_integral) {
            auto ev = std::make_shared<const AsfEvaluator>(
                c.model, BetaDistribution::point_mass(c.model.dims(), [&] {
                    std::vector<double> b(c.model.covariate_dim(), 0.0);
                    for (int k = 1; k <= c.model.goods(); ++k)
                        b[c.model.flat({k, 1})] = 1.0;
                    return b;
                }()));
            path = PathIntegralV{ev, c.welfare.nodes};
        }
        for (const auto& x : c.welfare.points) {
            WelfareRow row;
            row.x = x;
            try {
                row.taylor = average_indirect_utility(taylor, c.model, c.beta, x, c.welfare.weighting);
                if (path)
                    row.path = average_indirect_utility(*path, c.model, c.beta, x,
                                                        c.welfare.weighting)
                                   .value;
                row.exact = average_indirect_utility_exact(c.model, c.beta, x, c.welfare.weighting);
            } catch (const Error& e) {
                if (rep.status == "ok")
                    fail("precondition_failure", e, 0);
                break;
            }
            rep.welfare.push_back(std::move(row));
        }
    }

    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

void write_report(const RunReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json orders = json::array();
    for (std::size_t i = 0; i < rep.moments.size(); ++i) {
        const auto& t = rep.moments[i];
        std::ostringstream csv;
        csv << "index,recovered,true,abs_err,rel_err,route\n";
        double max_abs = 0.0, max_rel = 0.0;
        for (const auto& [idx, e] : t.entries()) {
            const double truth = rep.truth[i].at(idx);
            const double abs_err = std::abs(e.value - truth);
            const double rel_err = truth != 0.0 ? abs_err / std::abs(truth) : abs_err;
            max_abs = std::max(max_abs, abs_err);
            max_rel = std::max(max_rel, rel_err);
            csv << idx.to_string() << ',' << csv_number(e.value) << ',' << csv_number(truth) << ','
                << csv_number(abs_err) << ',' << csv_number(rel_err) << ',' << e.route << '\n';
        }
        write_text(dir / ("moments_order" + std::to_string(t.order()) + ".csv"), csv.str());
        orders.push_back({{"order", t.order()},
                          {"entries", t.size()},
                          {"max_abs_err", max_abs},
                          {"max_rel_err", max_rel}});
    }

    {
        std::ostringstream csv;
        csv << "key,recovered,true,abs_err,discrepancy,candidates\n";
        for (const auto& [key, e] : rep.v_derivs.entries()) {
            csv << v_key_string(key) << ',' << csv_number(e.value) << ',';
            if (rep.v_true && rep.v_true->contains(key)) {
                const double truth = rep.v_true->at(key);
                csv << csv_number(truth) << ',' << csv_number(std::abs(e.value - truth));
            } else {
                csv << ',';
            }
            csv << ',' << csv_number(e.discrepancy) << ',' << e.candidates << '\n';
        }
        write_text(dir / "v_derivs.csv", csv.str());
    }

    json diag = nullptr;
    {
        std::ostringstream csv;
        csv << "statistic,value,note\n";
        if (rep.diagnostics) {
            const auto& d = *rep.diagnostics;
            diag = json::object();
            csv << "cauchy_schwarz,"
                << (d.cauchy_schwarz_stat ? csv_number(*d.cauchy_schwarz_stat) : "") << ','
                << d.cauchy_schwarz_note << '\n';
            diag["cauchy_schwarz"] = d.cauchy_schwarz_stat ? json(*d.cauchy_schwarz_stat) : json(nullptr);
            csv << "symmetry_residual," << csv_number(d.symmetry.residual) << ','
                << (d.symmetry.applicable ? "worst V[" + goods_label(d.symmetry.worst) + "]"
                                          : std::string("not applicable"))
                << '\n';
            csv << "symmetry_comparisons," << d.symmetry.comparisons << ",\n";
            diag["symmetry"] = {{"residual", d.symmetry.residual},
                                {"applicable", d.symmetry.applicable},
                                {"comparisons", d.symmetry.comparisons}};
            csv << "sign_beta11,," << to_string(d.sign_beta11) << '\n';
            diag["sign_beta11"] = to_string(d.sign_beta11);
            csv << "min_v_diagonal," << csv_number(d.min_v_diagonal) << ",\n";
            diag["min_v_diagonal"] = number_or_null(d.min_v_diagonal);
            json comp = json::array();
            for (std::size_t j = 0; j < d.complementarity.size(); ++j) {
                json row = json::array();
                for (std::size_t k = 0; k < d.complementarity[j].size(); ++k) {
                    csv << "complementarity_" << j + 1 << '_' << k + 1 << ",,"
                        << to_string(d.complementarity[j][k]) << '\n';
                    row.push_back(to_string(d.complementarity[j][k]));
                }
                comp.push_back(row);
            }
            diag["complementarity"] = comp;
            json rel = json::array();
            for (const auto& e : d.relevance) {
                csv << "relevance (" << goods_label(e.goods) << ")," << csv_number(e.magnitude)
                    << ",d" << e.selected.to_string() << " Ybar_" << e.target << '\n';
                rel.push_back({{"goods", e.goods},
                               {"selected", e.selected.to_string()},
                               {"target", e.target},
                               {"magnitude", e.magnitude}});
            }
            diag["relevance"] = rel;
        }
        write_text(dir / "diagnostics.csv", csv.str());
    }

    json welfare = json::array();
    {
        std::ostringstream csv;
        csv << "x,taylor,path_integral,exact,taylor_abs_err,extrapolated\n";
        for (const auto& w : rep.welfare) {
            std::string xs;
            for (std::size_t i = 0; i < w.x.size(); ++i)
                xs += (i ? " " : "") + csv_number(w.x[i]);
            csv << xs << ',' << csv_number(w.taylor.value) << ','
                << (w.path ? csv_number(*w.path) : "") << ',' << csv_number(w.exact) << ','
                << csv_number(std::abs(w.taylor.value - w.exact)) << ','
                << (w.taylor.extrapolated ? "true" : "false") << '\n';
            welfare.push_back({{"x", w.x},
                               {"taylor", w.taylor.value},
                               {"extrapolated", w.taylor.extrapolated},
                               {"path_integral", w.path ? json(*w.path) : json(nullptr)},
                               {"exact", w.exact}});
        }
        write_text(dir / "welfare.csv", csv.str());
    }

    json v = json::array();
    for (const auto& [key, e] : rep.v_derivs.entries())
        v.push_back({{"key", key},
                     {"value", e.value},
                     {"discrepancy", e.discrepancy},
                     {"candidates", e.candidates}});

    json summary;
    summary["toolkit"] = {{"name", kToolkitName}, {"version", kToolkitVersion}};
    summary["scenario"] = rep.name;
    summary["status"] = rep.status;
    summary["exit_code"] = rep.exit_code();
    summary["failure"] = rep.status == "ok"
                             ? json(nullptr)
                             : json{{"order", rep.failed_order}, {"message", rep.failure}};
    summary["orders"] = orders;
    summary["v_derivs"] = v;
    summary["welfare"] = welfare;
    summary["diagnostics"] = diag;
    summary["config"] = rep.config_echo;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json meta{{"elapsed_seconds", rep.elapsed_seconds}, {"written_utc", stamp}};
    write_text(dir / "run_metadata.json", meta.dump(2) + "\n");
}

} // namespace rcid
