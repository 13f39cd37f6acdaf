#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pctl/errors.hpp"
#include "pctl/formula.hpp"
#include "pctl/kernel.hpp"
#include "pctl/model.hpp"

namespace pctl {

/// Probabilities over grid cells plus the two tail pseudo-states.
struct ValueFunction {
    std::vector<double> values;
    std::optional<double> lower_tail_value;
    std::optional<double> upper_tail_value;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

/// Sup-norm distance over cells and (known) tails.
inline double sup_distance(const ValueFunction& a, const ValueFunction& b) {
    if (a.size() != b.size()) throw InvalidArgument("value functions have different sizes");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    if (a.lower_tail_value && b.lower_tail_value) d = std::max(d, std::abs(*a.lower_tail_value - *b.lower_tail_value));
    if (a.upper_tail_value && b.upper_tail_value) d = std::max(d, std::abs(*a.upper_tail_value - *b.upper_tail_value));
    return d;
}

struct FixpointReport {
    std::size_t iterations = 0;   // applications of L performed
    double final_residual = 0.0;  // sup-norm of the last update
    double alpha = 0.0;           // contraction factor estimate
    bool converged = true;
    std::vector<double> residuals;  // residual after each application
};

struct SolverOptions {
    double tol = 1e-9;
    std::size_t max_iter = 1'000'000;
};

namespace detail {

// Value attributed to a grid tail by the until operator: 1 inside psi, 0
// outside phi | psi. A reachable tail inside phi \ psi would need values beyond
// the grid; an unreachable one (no row sends mass there) is left undetermined.
inline std::optional<double> until_tail_value(std::optional<bool> phi, std::optional<bool> psi, bool reachable,
                                              const char* which) {
    if (psi == true) return 1.0;
    if (psi == false && phi == false) return 0.0;
    if (!reachable) return std::nullopt;
    if (psi == false && phi == true)
        throw InvalidArgument(std::string(which) + " grid tail lies in phi \\ psi; the grid must cover phi \\ psi");
    throw InvalidArgument(std::string(which) + " grid tail has undetermined membership");
}

inline bool any_positive(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
}

// L[W](x) = 1_psi(x) + 1_{phi \ psi}(x) * sum_j Q(x, cell_j) W(c_j) + tail terms,
// with the row data and tail contribution prepared once per (phi, psi).
class UntilOperator {
public:
    UntilOperator(const DiscretizedKernel& dk, const SatSet& phi, const SatSet& psi) : dk_(dk), psi_(psi.mask) {
        if (phi.size() != dk.cells() || psi.size() != dk.cells())
            throw InvalidArgument("satisfaction set size does not match the grid");
        lower_ = until_tail_value(phi.lower_tail, psi.lower_tail, any_positive(dk.lower_tail), "lower");
        upper_ = until_tail_value(phi.upper_tail, psi.upper_tail, any_positive(dk.upper_tail), "upper");
        tail_term_.assign(dk.cells(), 0.0);
        for (std::size_t i = 0; i < dk.cells(); ++i) {
            if (phi.mask[i] && !psi.mask[i]) {
                transient_.push_back(i);
                tail_term_[i] = dk.lower_tail[i] * lower_.value_or(0.0) + dk.upper_tail[i] * upper_.value_or(0.0);
            }
        }
    }

    std::size_t cells() const noexcept { return dk_.cells(); }
    const std::vector<std::size_t>& transient() const noexcept { return transient_; }

    ValueFunction indicator() const {
        ValueFunction v{std::vector<double>(cells(), 0.0), lower_, upper_};
        for (std::size_t i = 0; i < cells(); ++i) v.values[i] = psi_[i] ? 1.0 : 0.0;
        return v;
    }

    /// One Jacobi sweep: every row reads only `w`.
    ValueFunction apply(const ValueFunction& w) const {
        if (w.size() != cells()) throw InvalidArgument("value function size does not match the grid");
        ValueFunction out = indicator();
        const double* wv = w.values.data();
        for (std::size_t i : transient_) {
            const double* row = dk_.row(i);
            double acc = tail_term_[i];
            for (std::size_t j = 0; j < cells(); ++j) acc += row[j] * wv[j];
            out.values[i] = std::clamp(acc, 0.0, 1.0);
        }
        return out;
    }

    /// sup over phi \ psi cells of the one-step mass staying in phi \ psi.
    double contraction_factor() const {
        double alpha = 0.0;
        for (std::size_t i : transient_) {
            const double* row = dk_.row(i);
            double stay = 0.0;
            for (std::size_t j : transient_) stay += row[j];
            alpha = std::max(alpha, stay);
        }
        return std::min(alpha, 1.0);
    }

private:
    const DiscretizedKernel& dk_;
    std::vector<bool> psi_;
    std::vector<std::size_t> transient_;
    std::vector<double> tail_term_;
    std::optional<double> lower_;
    std::optional<double> upper_;
};

}  // namespace detail

/// One application of the until operator L for the pair (phi, psi).
inline ValueFunction apply_L(const DiscretizedKernel& dk, const SatSet& phi, const SatSet& psi, const ValueFunction& w) {
    return detail::UntilOperator(dk, phi, psi).apply(w);
}

/// The indicator of psi, with tails attributed as L would.
inline ValueFunction until_indicator(const DiscretizedKernel& dk, const SatSet& phi, const SatSet& psi) {
    return detail::UntilOperator(dk, phi, psi).indicator();
}

inline double contraction_factor(const DiscretizedKernel& dk, const SatSet& phi, const SatSet& psi) {
    return detail::UntilOperator(dk, phi, psi).contraction_factor();
}

inline double contraction_factor(const Model& model, const SatSet& phi, const SatSet& psi) {
    return contraction_factor(model.dk(), phi, psi);
}

/// V_0 = 1_psi, V_{i+1} = L[V_i] for i < k. Element i is P_x(phi U<=i psi).
inline std::vector<ValueFunction> bounded_until(const Model& model, const SatSet& phi, const SatSet& psi, unsigned k) {
    detail::UntilOperator op(model.dk(), phi, psi);
    std::vector<ValueFunction> seq;
    seq.reserve(k + 1);
    seq.push_back(op.indicator());
    for (unsigned i = 0; i < k; ++i) seq.push_back(op.apply(seq.back()));
    return seq;
}

struct UntilSolution {
    ValueFunction values;
    FixpointReport report;
};

/// Iterates L from 1_psi until the sup-norm update drops below tol. Starting
/// from the indicator selects the least nonnegative fixed point.
inline UntilSolution unbounded_until(const Model& model, const SatSet& phi, const SatSet& psi,
                                     const SolverOptions& options = {}) {
    if (!(options.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (options.max_iter < 1) throw InvalidArgument("solver max_iter must be at least 1");
    detail::UntilOperator op(model.dk(), phi, psi);
    UntilSolution sol{op.indicator(), {}};
    sol.report.alpha = op.contraction_factor();
    sol.report.converged = false;
    while (sol.report.iterations < options.max_iter) {
        ValueFunction next = op.apply(sol.values);
        double r = sup_distance(next, sol.values);
        sol.values = std::move(next);
        ++sol.report.iterations;
        sol.report.final_residual = r;
        sol.report.residuals.push_back(r);
        if (r < options.tol) {
            sol.report.converged = true;
            break;
        }
    }
    return sol;
}

/// P_x(X phi) = Q(x, phi) at every cell. Tail values are left undetermined.
inline ValueFunction next_values(const Model& model, const SatSet& phi) {
    const auto& dk = model.dk();
    if (phi.size() != dk.cells()) throw InvalidArgument("satisfaction set size does not match the grid");
    ValueFunction out{std::vector<double>(dk.cells(), 0.0), std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < dk.cells(); ++i) {
        const double* row = dk.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < dk.cells(); ++j) {
            if (phi.mask[j]) acc += row[j];
        }
        for (auto [tail, m, which] : {std::tuple{phi.lower_tail, dk.lower_tail[i], "lower"},
                                      std::tuple{phi.upper_tail, dk.upper_tail[i], "upper"}}) {
            if (m == 0.0) continue;
            if (!tail) throw InvalidArgument(std::string(which) + " grid tail has undetermined membership");
            if (*tail) acc += m;
        }
        out.values[i] = std::clamp(acc, 0.0, 1.0);
    }
    return out;
}

inline SatSet threshold_set(const ValueFunction& v, Relation rel, double p) {
    SatSet out{std::vector<bool>(v.size()), std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < v.size(); ++i) out.mask[i] = compare(rel, v[i], p);
    if (v.lower_tail_value) out.lower_tail = compare(rel, *v.lower_tail_value, p);
    if (v.upper_tail_value) out.upper_tail = compare(rel, *v.upper_tail_value, p);
    return out;
}

/// Diagnostics of one probability-operator evaluation.
struct OperatorReport {
    std::string formula;  // canonical text of the path formula
    std::string kind;     // "next", "bounded_until" or "until"
    FixpointReport fixpoint;
};

struct Evaluation {
    SatSet sat;
    std::optional<ValueFunction> values;      // when the formula is a probability operator
    std::optional<OperatorReport> top;        // report of that operator
    std::vector<OperatorReport> operators;    // every probability operator, innermost first
    bool converged = true;
};

/// Raised by check() when an unbounded until fails to reach tolerance.
class NonConvergence : public Error {
public:
    explicit NonConvergence(OperatorReport report)
        : Error("until iteration for '" + report.formula + "' did not converge: residual " +
                std::to_string(report.fixpoint.final_residual) + " after " +
                std::to_string(report.fixpoint.iterations) + " iterations"),
          report_(std::move(report)) {}

    const OperatorReport& report() const noexcept { return report_; }

private:
    OperatorReport report_;
};

namespace detail {

class Evaluator {
public:
    Evaluator(const Model& model, const SolverOptions& options) : model_(model), options_(options) {}

    Evaluation run(const StatePtr& f) {
        Evaluation ev;
        ev.sat = state(*f, &ev);
        ev.operators = std::move(operators_);
        ev.converged = converged_;
        return ev;
    }

private:
    SatSet state(const StateFormula& f, Evaluation* top = nullptr) {
        const std::size_t n = model_.grid().cells();
        return std::visit(
            overloaded{
                [&](const state::True&) { return SatSet::all(n); },
                [&](const state::False&) { return SatSet::none(n); },
                [&](const state::Atom& a) { return model_.region_set(a.name); },
                [&](const state::Not& x) { return complement(state(*x.arg)); },
                [&](const state::And& x) { return intersection(state(*x.lhs), state(*x.rhs)); },
                [&](const state::Or& x) { return union_of(state(*x.lhs), state(*x.rhs)); },
                [&](const state::Implies& x) { return union_of(complement(state(*x.lhs)), state(*x.rhs)); },
                [&](const state::Prob& x) {
                    auto [values, report] = path(*x.path);
                    SatSet sat = threshold_set(values, x.rel, x.bound);
                    if (top) {
                        top->values = std::move(values);
                        top->top = report;
                    }
                    return sat;
                },
            },
            f.node);
    }

    std::pair<ValueFunction, OperatorReport> path(const PathFormula& f) {
        OperatorReport report{to_string(f), {}, {}};
        ValueFunction values;
        std::visit(overloaded{
                       [&](const path::Next& x) {
                           report.kind = "next";
                           values = next_values(model_, state(*x.arg));
                           report.fixpoint.iterations = 1;
                       },
                       [&](const path::BoundedUntil& x) {
                           report.kind = "bounded_until";
                           SatSet phi = state(*x.lhs), psi = state(*x.rhs);
                           auto seq = bounded_until(model_, phi, psi, x.steps);
                           report.fixpoint.iterations = x.steps;
                           report.fixpoint.alpha = contraction_factor(model_, phi, psi);
                           for (std::size_t i = 1; i < seq.size(); ++i)
                               report.fixpoint.residuals.push_back(sup_distance(seq[i], seq[i - 1]));
                           if (!report.fixpoint.residuals.empty())
                               report.fixpoint.final_residual = report.fixpoint.residuals.back();
                           values = std::move(seq.back());
                       },
                       [&](const path::Until& x) {
                           report.kind = "until";
                           auto sol = unbounded_until(model_, state(*x.lhs), state(*x.rhs), options_);
                           report.fixpoint = std::move(sol.report);
                           converged_ = converged_ && report.fixpoint.converged;
                           values = std::move(sol.values);
                       },
                       [&](const auto&) { throw InvalidArgument("formula must be desugared before evaluation"); },
                   },
                   f.node);
        operators_.push_back(report);
        return {std::move(values), std::move(report)};
    }

    const Model& model_;
    SolverOptions options_;
    std::vector<OperatorReport> operators_;
    bool converged_ = true;
};

}  // namespace detail

/// Evaluates f at every grid state, collecting value functions and solver
/// diagnostics. Non-convergence is reported in the result, not thrown.
inline Evaluation evaluate(const Model& model, const StatePtr& f, const SolverOptions& options = {}) {
    StatePtr g = desugar(f);
    for (const auto& name : atom_names(*g)) model.region_set(name);
    return detail::Evaluator(model, options).run(g);
}

/// Satisfaction set of f. Throws UnboundAtom or NonConvergence.
inline SatSet check(const Model& model, const StatePtr& f, const SolverOptions& options = {}) {
    Evaluation ev = evaluate(model, f, options);
    if (!ev.converged) {
        for (const auto& op : ev.operators) {
            if (!op.fixpoint.converged) throw NonConvergence(op);
        }
    }
    return std::move(ev.sat);
}

}  // namespace pctl
