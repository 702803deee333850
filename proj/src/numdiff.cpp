#include "rcid/numdiff.hpp"

#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "rcid/errors.hpp"
#include "rcid/indexing.hpp"

namespace rcid {

namespace {

using Node = std::vector<double>;
// Linear functional sum_node coef * Ybar(node); the map keeps nodes sorted so
// accumulation order is fixed.
using Plan = std::map<Node, double>;

constexpr double kWeightFloor = 1e-13;

std::string node_string(const Node& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i)
        os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

// Coefficients c_l with R = sum_l c_l * est(h / 2^l) after `levels`
// elimination steps of error terms h^q, h^2q, ...
std::vector<double> richardson_coefficients(int levels, int q) {
    const int n = levels + 1;
    std::vector<std::vector<double>> col(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        col[i][i] = 1.0;
    for (int j = 1; j < n; ++j) {
        const double factor = std::pow(2.0, q * j) - 1.0;
        for (int i = n - 1; i >= j; --i)
            for (int l = 0; l < n; ++l)
                col[i][l] = col[i][l] + (col[i][l] - col[i - 1][l]) / factor;
    }
    return col[n - 1];
}

void add_stencil(Plan& plan, const std::vector<double>& center, const ModelSpec& model,
                 const MomentIndex& idx, FdKind kind, double h, double scale) {
    std::vector<std::size_t> coord;
    std::vector<int> mult;
    for (const auto& p : idx.pairs()) {
        const auto c = model.flat(p);
        if (!coord.empty() && coord.back() == c) {
            ++mult.back();
        } else {
            coord.push_back(c);
            mult.push_back(1);
        }
    }
    std::vector<std::vector<int>> offs;
    std::vector<std::vector<double>> wts;
    for (int m : mult) {
        offs.push_back(stencil_offsets(kind, m));
        std::vector<double> o(offs.back().begin(), offs.back().end());
        wts.push_back(stencil_weights(o, m));
    }
    const double denom = std::pow(h, static_cast<double>(idx.order()));

    std::vector<std::size_t> pos(coord.size(), 0);
    while (true) {
        double w = scale / denom;
        Node x = center;
        for (std::size_t v = 0; v < coord.size(); ++v) {
            w *= wts[v][pos[v]];
            x[coord[v]] = center[coord[v]] + static_cast<double>(offs[v][pos[v]]) * h;
        }
        if (w != 0.0)
            plan[x] += w;
        std::size_t v = 0;
        while (v < coord.size() && ++pos[v] == offs[v].size())
            pos[v++] = 0;
        if (v == coord.size())
            break;
    }
}

Plan make_plan(const AsfEvaluator& evaluator, const MomentIndex& idx, const FdScheme& scheme) {
    const auto& model = evaluator.model();
    const int n = static_cast<int>(idx.order());
    const double h = scheme.step_for_order(n);
    const int q = scheme.kind == FdKind::Central ? 2 : 1;
    const auto coef = richardson_coefficients(scheme.richardson_levels, q);
    Plan plan;
    for (std::size_t l = 0; l < coef.size(); ++l)
        add_stencil(plan, model.center(), model, idx, scheme.kind, h / std::pow(2.0, l), coef[l]);
    return plan;
}

void evaluate_nodes(const AsfEvaluator& evaluator, std::map<Node, std::vector<double>>& values,
                    int threads) {
    std::vector<const Node*> nodes;
    for (const auto& [x, v] : values)
        nodes.push_back(&x);
    std::vector<std::vector<double>> out(nodes.size());

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < nodes.size(); i += stride) {
            out[i] = evaluator(*nodes[i]);
            for (double y : out[i])
                if (!std::isfinite(y))
                    throw EvaluationError("non-finite ASF value at node " + node_string(*nodes[i]));
        }
    };

    const std::size_t t = static_cast<std::size_t>(std::max(threads, 1));
    if (t == 1 || nodes.size() < 2) {
        work(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(t);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < t; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(w, t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& th : pool)
            th.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }
    std::size_t i = 0;
    for (auto& [x, v] : values)
        v = std::move(out[i++]);
}

// Stencil weights of a derivative sum to zero, so differences against the
// center value can be accumulated instead; a flat ASF then gives exactly 0.
double apply(const Plan& plan, const std::map<Node, std::vector<double>>& values,
             const Node& center, int good) {
    const auto k = static_cast<std::size_t>(good - 1);
    const double base = values.at(center)[k];
    double acc = 0.0;
    for (const auto& [x, c] : plan)
        acc += c * (values.at(x)[k] - base);
    return acc;
}

void check_target(const ModelSpec& model, int good, const MomentIndex& idx) {
    if (good < 1 || good > model.goods())
        throw PreconditionError("target good " + std::to_string(good) + " out of range");
    if (idx.order() == 0)
        throw PreconditionError("derivative index must have order >= 1");
    for (const auto& p : idx.pairs())
        model.slot(p.good, p.ch);
}

} // namespace

double FdScheme::step_for_order(int order) const {
    if (base_step)
        return *base_step;
    if (order <= 2)
        return 6e-3;
    if (order == 3)
        return 2e-2;
    return 4e-2;
}

void FdScheme::validate(const ModelSpec& model) const {
    if (base_step && !(std::isfinite(*base_step) && *base_step > 0.0))
        throw ConfigError("finite-difference step must be positive");
    if (richardson_levels < 0)
        throw ConfigError("Richardson levels must be >= 0");
    if (threads < 1)
        throw ConfigError("thread count must be >= 1");
    if (model.nonnegative_domain() && kind != FdKind::Forward)
        throw ConfigError("nonnegative covariate domain requires the forward scheme");
}

const char* to_string(FdKind kind) {
    return kind == FdKind::Central ? "central" : "forward";
}

std::vector<double> stencil_weights(const std::vector<double>& offsets, int deriv) {
    const int n = static_cast<int>(offsets.size());
    if (deriv < 0 || deriv >= n)
        throw PreconditionError("stencil needs more points than the derivative order");
    // c[j][k]: weight of node j for the k-th derivative.
    std::vector<std::vector<double>> c(n, std::vector<double>(deriv + 1, 0.0));
    double c1 = 1.0;
    double c4 = offsets[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, deriv);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    double peak = 0.0;
    for (int j = 0; j < n; ++j) {
        w[j] = c[j][deriv];
        peak = std::max(peak, std::abs(w[j]));
    }
    for (double& v : w)
        if (std::abs(v) < kWeightFloor * peak)
            v = 0.0;
    return w;
}

std::vector<int> stencil_offsets(FdKind kind, int deriv) {
    if (deriv < 1)
        throw PreconditionError("stencil derivative order must be >= 1");
    std::vector<int> out;
    if (kind == FdKind::Central) {
        const int p = (deriv + 1) / 2;
        for (int i = -p; i <= p; ++i)
            out.push_back(i);
    } else {
        for (int i = 0; i <= deriv; ++i)
            out.push_back(i);
    }
    return out;
}

DerivativeTable::DerivativeTable(int order, FdScheme scheme, std::vector<double> center,
                                 std::vector<int> dims)
    : order_(order), dims_(std::move(dims)), scheme_(scheme), center_(std::move(center)) {}

void DerivativeTable::set(int good, const MomentIndex& idx, double value) {
    if (!std::isfinite(value))
        throw EvaluationError("non-finite derivative for good " + std::to_string(good) + " wrt " +
                              idx.to_string());
    entries_[{good, idx}] = value;
}

bool DerivativeTable::contains(int good, const MomentIndex& idx) const {
    return entries_.count({good, idx}) > 0;
}

double DerivativeTable::at(int good, const MomentIndex& idx) const {
    auto it = entries_.find({good, idx});
    if (it == entries_.end())
        throw PreconditionError("derivative of good " + std::to_string(good) + " wrt " +
                                idx.to_string() + " is not in the table");
    return it->second;
}

double mixed_partial(const AsfEvaluator& evaluator, int good, const MomentIndex& idx,
                     const FdScheme& scheme) {
    scheme.validate(evaluator.model());
    check_target(evaluator.model(), good, idx);
    const auto plan = make_plan(evaluator, idx, scheme);
    std::map<Node, std::vector<double>> values{{evaluator.model().center(), {}}};
    for (const auto& [x, c] : plan)
        values.emplace(x, std::vector<double>{});
    evaluate_nodes(evaluator, values, scheme.threads);
    return apply(plan, values, evaluator.model().center(), good);
}

DerivativeTable derivative_table(const AsfEvaluator& evaluator, int max_order,
                                 const FdScheme& scheme) {
    const auto& model = evaluator.model();
    scheme.validate(model);
    if (max_order < 1)
        throw PreconditionError("derivative table order must be >= 1");

    std::vector<std::pair<MomentIndex, Plan>> plans;
    std::map<Node, std::vector<double>> values;
    values.emplace(model.center(), std::vector<double>{});
    for (int n = 1; n <= max_order; ++n) {
        for (const auto& idx : moment_indices(model.dims(), n)) {
            auto plan = make_plan(evaluator, idx, scheme);
            for (const auto& [x, c] : plan)
                values.emplace(x, std::vector<double>{});
            plans.emplace_back(idx, std::move(plan));
        }
    }
    evaluate_nodes(evaluator, values, scheme.threads);

    DerivativeTable table(max_order, scheme, model.center(), model.dims());
    table.set_level(values.at(model.center()));
    for (const auto& [idx, plan] : plans)
        for (int k = 1; k <= model.goods(); ++k)
            table.set(k, idx, apply(plan, values, model.center(), k));
    return table;
}

} // namespace rcid
