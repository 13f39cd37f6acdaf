#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pctl/checker.hpp"
#include "pctl/config.hpp"
#include "pctl/formula.hpp"
#include "pctl/simulate.hpp"

namespace pctl::cli {

/// Process exit status of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,
    kConfigError = 2,
    kSyntaxError = 3,
    kUnboundAtom = 4,
    kNonConvergence = 5,
};

struct CheckOptions {
    std::string config_path;
    std::string formula;
    std::string out_csv;
    std::string report_path;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
};

struct SimulateOptions {
    std::string config_path;
    std::optional<double> x0;
    std::optional<std::size_t> n;
    std::optional<std::size_t> horizon;
    std::optional<std::uint64_t> seed;
};

/// Decimal with 12 significant digits.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// One row per cell: cell_index, cell_center, value, satisfied.
inline std::string render_csv(const Grid& grid, const Evaluation& ev) {
    std::string out = "cell_index,cell_center,value,satisfied\n";
    for (std::size_t i = 0; i < grid.cells(); ++i) {
        double value = ev.values ? (*ev.values)[i] : (ev.sat.mask[i] ? 1.0 : 0.0);
        out += std::to_string(i) + "," + format_number(grid.center(i)) + "," + format_number(value) + "," +
               (ev.sat.mask[i] ? "1" : "0") + "\n";
    }
    return out;
}

namespace detail {

using nlohmann::ordered_json;

inline ordered_json tail_json(std::optional<bool> t) { return t ? ordered_json(*t) : ordered_json(nullptr); }

inline ordered_json fixpoint_json(const OperatorReport& r) {
    return ordered_json{{"operator", r.kind},
                        {"path_formula", r.formula},
                        {"iterations", r.fixpoint.iterations},
                        {"final_residual", r.fixpoint.final_residual},
                        {"contraction_factor", r.fixpoint.alpha},
                        {"converged", r.fixpoint.converged}};
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace detail

inline std::string render_report(const RunConfig& cfg, const std::string& formula_text, const StatePtr& formula,
                                 const SolverOptions& solver, const Evaluation& ev) {
    using detail::ordered_json;
    const Grid& grid = cfg.model.grid();
    ordered_json intervals = ordered_json::array();
    for (const auto& iv : ev.sat.intervals(grid)) intervals.push_back({iv.lo, iv.hi});

    ordered_json report;
    report["formula"] = formula_text;
    report["canonical_formula"] = to_string(*formula);
    report["config"] = cfg.document;
    report["grid"] = {{"lo", grid.lo()}, {"hi", grid.hi()}, {"cells", grid.cells()}, {"cell_width", grid.width()}};
    report["solver"] = {{"tol", solver.tol}, {"max_iter", solver.max_iter}};
    report["satisfaction"] = {{"intervals", intervals},
                              {"cells_satisfied", ev.sat.count()},
                              {"lower_tail", detail::tail_json(ev.sat.lower_tail)},
                              {"upper_tail", detail::tail_json(ev.sat.upper_tail)}};
    if (ev.top) {
        report["fixpoint"] = detail::fixpoint_json(*ev.top);
        report["contraction_factor"] = ev.top->fixpoint.alpha;
    } else {
        report["fixpoint"] = nullptr;
        report["contraction_factor"] = nullptr;
    }
    ordered_json ops = ordered_json::array();
    for (const auto& op : ev.operators) ops.push_back(detail::fixpoint_json(op));
    report["operators"] = ops;
    report["converged"] = ev.converged;
    return report.dump(2) + "\n";
}

/// `check` subcommand. Diagnostics go to `err`; files are written only once
/// evaluation has finished (including the non-convergence case).
inline int run_check(const CheckOptions& opt, std::ostream& err) {
    std::optional<RunConfig> cfg;
    try {
        cfg.emplace(load_config(opt.config_path));
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    StatePtr formula;
    try {
        formula = parse(opt.formula);
    } catch (const ParseError& e) {
        err << "formula error: " << e.what() << "\n";
        return kSyntaxError;
    }

    SolverOptions solver = cfg->solver;
    if (opt.tol) solver.tol = *opt.tol;
    if (opt.max_iter) solver.max_iter = *opt.max_iter;
    if (!(solver.tol > 0.0) || solver.max_iter < 1) {
        err << "config error: tolerance must be positive and max-iter at least 1\n";
        return kConfigError;
    }

    Evaluation ev;
    try {
        ev = evaluate(cfg->model, formula, solver);
    } catch (const UnboundAtom& e) {
        err << "error: " << e.what() << "\n";
        return kUnboundAtom;
    } catch (const Error& e) {
        err << "model error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        detail::write_file(opt.out_csv, render_csv(cfg->model.grid(), ev));
        detail::write_file(opt.report_path, render_report(*cfg, opt.formula, formula, solver, ev));
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    if (!ev.converged) {
        for (const auto& op : ev.operators) {
            if (!op.fixpoint.converged) err << "error: " << NonConvergence(op).what() << "\n";
        }
        return kNonConvergence;
    }
    return kOk;
}

/// `simulate` subcommand: Monte Carlo estimate of P(phi U<=horizon psi) from
/// each x0, next to the dynamic-programming value, as JSON on `out`.
inline int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    std::optional<RunConfig> cfg;
    try {
        cfg.emplace(load_config(opt.config_path));
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    SimulationSpec spec = cfg->simulation.value_or(SimulationSpec{});
    if (opt.x0) spec.x0 = {*opt.x0};
    if (opt.n) spec.n = *opt.n;
    if (opt.horizon) spec.horizon = *opt.horizon;
    if (opt.seed) spec.seed = *opt.seed;
    if (spec.x0.empty()) {
        err << "config error: no initial state given (--x0 or simulation.x0)\n";
        return kConfigError;
    }
    if (spec.n == 0) {
        err << "config error: simulation needs n >= 1\n";
        return kConfigError;
    }

    StatePtr phi_f, psi_f;
    try {
        phi_f = parse(spec.phi);
        psi_f = parse(spec.psi);
    } catch (const ParseError& e) {
        err << "formula error: " << e.what() << "\n";
        return kSyntaxError;
    }

    using detail::ordered_json;
    ordered_json results = ordered_json::array();
    try {
        const Model& model = cfg->model;
        SatSet phi = check(model, phi_f, cfg->solver);
        SatSet psi = check(model, psi_f, cfg->solver);
        auto seq = bounded_until(model, phi, psi, static_cast<unsigned>(spec.horizon));
        const ValueFunction& v = seq.back();
        for (double x0 : spec.x0) {
            auto mc = simulate_until(model, x0, phi, psi, spec.horizon, spec.n, spec.seed);
            ordered_json dp = nullptr;
            if (auto cell = model.grid().locate(x0)) {
                dp = v[*cell];
            } else {
                auto tail = x0 < model.grid().lo() ? v.lower_tail_value : v.upper_tail_value;
                if (tail) dp = *tail;
            }
            results.push_back({{"x0", x0},
                               {"estimate", mc.estimate},
                               {"half_width", mc.half_width},
                               {"hits", mc.hits},
                               {"dp_value", dp}});
        }
    } catch (const UnboundAtom& e) {
        err << "error: " << e.what() << "\n";
        return kUnboundAtom;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const Error& e) {
        err << "model error: " << e.what() << "\n";
        return kConfigError;
    }

    ordered_json doc{{"phi", spec.phi},
                     {"psi", spec.psi},
                     {"horizon", spec.horizon},
                     {"n", spec.n},
                     {"seed", spec.seed},
                     {"results", results}};
    out << doc.dump(2) << "\n";
    return kOk;
}

}  // namespace pctl::cli
