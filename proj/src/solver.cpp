#include "qls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qls {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_same_width(const StateVector& a, const StateVector& b, const char* who) {
    if (a.n != b.n) throw std::invalid_argument(std::string(who) + ": register widths differ");
}

/// Shared shadow-evaluation core so estimate_cost and solve() agree on the
/// budget, batching, and estimator-path selection.
CostValue shadow_cost(const CostTermTable& table, const std::vector<PauliString>& observables,
                      const StateVector& state, double eps, double constant, const Rng& key) {
    uint64_t budget = shadow_size(observables.size(), table.max_locality, eps, constant);
    uint32_t batches = default_batches(observables.size());
    if (uint64_t(batches) > budget) batches = uint32_t(budget);
    if (state.n <= 10) {
        std::vector<double> estimates =
            estimate_paulis_binned(state, observables, budget, batches, key);
        return assemble_cost(table, observables, estimates);
    }
    if (budget > 100'000'000)
        throw std::runtime_error("shadow cost: budget too large to materialize above 10 qubits");
    ClassicalShadow shadow = collect(state, budget, key);
    std::vector<double> estimates(observables.size());
    for (std::size_t i = 0; i < observables.size(); ++i)
        estimates[i] = estimate_pauli(shadow, observables[i], batches);
    return assemble_cost(table, observables, estimates);
}

}  // namespace

double trace_distance(const StateVector& a, const StateVector& b) {
    check_same_width(a, b, "trace_distance");
    double overlap = std::norm(inner(a, b));
    return std::sqrt(std::max(0.0, 1.0 - overlap));
}

double fidelity(const StateVector& a, const StateVector& b) {
    check_same_width(a, b, "fidelity");
    return std::norm(inner(a, b));
}

CostValue estimate_cost(const CostTermTable& table, const AnsatzCircuit& circuit,
                        const std::vector<double>& params, const CostEstimator& est,
                        const Rng& key) {
    StateVector x = circuit.prepare(params);
    if (est.exact) return evaluate_exact(table, x);
    return shadow_cost(table, distinct_observables(table), x, est.eps, est.constant, key);
}

std::vector<double> gradient(const CostTermTable& table, const AnsatzCircuit& circuit,
                             const std::vector<double>& params, const CostEstimator& est,
                             const Rng& key, const CostValue* base) {
    CostValue at_base = base ? *base : estimate_cost(table, circuit, params, est, key.derive(~0ull));
    const double n = double(table.n);
    std::vector<double> grad(params.size());
    std::vector<double> shifted = params;
    for (std::size_t j = 0; j < params.size(); ++j) {
        shifted[j] = params[j] + kPi / 2.0;
        CostValue plus = estimate_cost(table, circuit, shifted, est, key.derive(2 * j));
        shifted[j] = params[j] - kPi / 2.0;
        CostValue minus = estimate_cost(table, circuit, shifted, est, key.derive(2 * j + 1));
        shifted[j] = params[j];
        double dmu = (plus.mu - minus.mu) / 2.0;
        double domega = (plus.omega - minus.omega) / 2.0;
        grad[j] = -(dmu * at_base.omega - at_base.mu * domega) /
                  (2.0 * n * at_base.omega * at_base.omega);
    }
    return grad;
}

std::vector<double> adam_step(AdamState& state, const std::vector<double>& params,
                              const std::vector<double>& grad, double lr) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || grad.size() != params.size())
        throw std::invalid_argument("adam_step: size mismatch");
    state.t += 1;
    const double corr1 = 1.0 - std::pow(kBeta1, double(state.t));
    const double corr2 = 1.0 - std::pow(kBeta2, double(state.t));
    std::vector<double> next(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        state.m[j] = kBeta1 * state.m[j] + (1.0 - kBeta1) * grad[j];
        state.v[j] = kBeta2 * state.v[j] + (1.0 - kBeta2) * grad[j] * grad[j];
        double mhat = state.m[j] / corr1;
        double vhat = state.v[j] / corr2;
        next[j] = params[j] - lr * mhat / (std::sqrt(vhat) + kEps);
    }
    return next;
}

namespace {

/// Internal control-flow signal: the evaluation budget ran out mid-search.
struct BudgetHit {};

/// Brent line minimization of g on a bracketing triple (a < b < c with
/// g(b) below both ends).  Returns (alpha, g(alpha)).
std::pair<double, double> brent_minimize(const std::function<double(double)>& g, double ax,
                                         double bx, double cx, double fbx, double tol,
                                         uint32_t maxiter) {
    constexpr double kGold = 0.3819660112501051;
    double a = std::min(ax, cx), b = std::max(ax, cx);
    double x = bx, w = bx, v = bx;
    double fx = fbx, fw = fbx, fv = fbx;
    double d = 0.0, e = 0.0;
    for (uint32_t iter = 0; iter < maxiter; ++iter) {
        double xm = 0.5 * (a + b);
        double tol1 = tol * std::abs(x) + 1e-12;
        double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::abs(e) > tol1) {
            // Parabolic fit through (x, w, v).
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
                golden = false;
            }
        }
        if (golden) {
            e = (x >= xm) ? a - x : b - x;
            d = kGold * e;
        }
        double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
        double fu = g(u);
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w; w = x; x = u;
            fv = fw; fw = fx; fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

/// Golden-ratio downhill bracketing from (0, step).  Returns a triple
/// (a, b, c) with g(b) below both ends, plus g(b).
struct Bracket {
    double a, b, c, fb;
};

Bracket bracket_minimum(const std::function<double(double)>& g, double step, double f0) {
    constexpr double kGoldExpand = 1.618033988749895;
    constexpr double kLimit = 64.0;
    double ax = 0.0, fa = f0;
    double bx = step, fb = g(bx);
    if (fb > fa) {
        std::swap(ax, bx);
        std::swap(fa, fb);
    }
    double cx = bx + kGoldExpand * (bx - ax);
    double fc = g(cx);
    while (fb > fc) {
        double span = cx - bx;
        if (std::abs(span) > kLimit * std::max(std::abs(step), 1.0)) break;
        ax = bx; fa = fb;
        bx = cx; fb = fc;
        cx = bx + kGoldExpand * span;
        fc = g(cx);
    }
    (void)fa;
    return {ax, bx, cx, fb};
}

}  // namespace

std::vector<double> powell_search(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> params0, const PowellConfig& config) {
    const std::size_t dim = params0.size();
    if (dim == 0) return params0;

    uint64_t evals = 0;
    auto counted = [&](const std::vector<double>& p) {
        if (evals >= config.max_evaluations) throw BudgetHit{};
        ++evals;
        return f(p);
    };

    std::vector<std::vector<double>> directions(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) directions[i][i] = 1.0;

    // Per-direction bracketing steps, remembered between sweeps (slot dim is
    // the sweep direction).  Narrow valleys call for short probes; starting
    // each bracket near the last accepted move saves most of the narrowing.
    std::vector<double> steps(dim + 1, config.bracket_step);

    std::vector<double> point = params0;
    std::vector<double> scratch(dim);
    double fpoint;
    try {
        fpoint = counted(point);

        auto line_minimize = [&](std::vector<double>& at, double fat,
                                 const std::vector<double>& dir, std::size_t slot) {
            auto g = [&](double alpha) {
                for (std::size_t j = 0; j < dim; ++j) scratch[j] = at[j] + alpha * dir[j];
                return counted(scratch);
            };
            Bracket br = bracket_minimum(g, steps[slot], fat);
            auto [alpha, falpha] =
                brent_minimize(g, br.a, br.b, br.c, br.fb, config.line_tol, config.line_maxiter);
            if (falpha < fat) {
                for (std::size_t j = 0; j < dim; ++j) at[j] += alpha * dir[j];
                steps[slot] = std::clamp(1.5 * std::abs(alpha), 1e-4, config.bracket_step);
                return falpha;
            }
            steps[slot] = std::max(0.5 * steps[slot], 1e-4);
            return fat;
        };

        for (;;) {
            const double fstart = fpoint;
            const std::vector<double> start = point;
            std::size_t biggest_dir = 0;
            double biggest_drop = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                double before = fpoint;
                fpoint = line_minimize(point, fpoint, directions[i], i);
                if (before - fpoint > biggest_drop) {
                    biggest_drop = before - fpoint;
                    biggest_dir = i;
                }
            }
            if (2.0 * (fstart - fpoint) <=
                config.ftol * (std::abs(fstart) + std::abs(fpoint)) + 1e-20)
                break;

            // Extrapolated point and the direction-replacement test.
            std::vector<double> extrapolated(dim), sweep_dir(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                extrapolated[j] = 2.0 * point[j] - start[j];
                sweep_dir[j] = point[j] - start[j];
            }
            double fext = counted(extrapolated);
            if (fext < fstart) {
                double t = 2.0 * (fstart - 2.0 * fpoint + fext) *
                               (fstart - fpoint - biggest_drop) * (fstart - fpoint - biggest_drop) -
                           biggest_drop * (fstart - fext) * (fstart - fext);
                if (t < 0.0) {
                    steps[dim] = config.bracket_step;
                    fpoint = line_minimize(point, fpoint, sweep_dir, dim);
                    directions[biggest_dir] = directions[dim - 1];
                    directions[dim - 1] = sweep_dir;
                    steps[biggest_dir] = steps[dim - 1];
                    steps[dim - 1] = config.bracket_step;
                }
            }
        }
    } catch (const BudgetHit&) {
        // Budget exhausted mid-search: the best accepted point stands.
    }
    return point;
}

namespace {

/// Internal control-flow signal: a candidate state met the terminator.
struct Converged {};

struct Evaluator {
    const LinearProblem& problem;
    const AnsatzCircuit& circuit;
    const SolverConfig& config;
    CostTermTable table;
    std::vector<PauliString> observables;
    Rng shadow_root;

    double eps_now = 0.1;
    uint64_t cost_evaluations = 0;
    uint64_t gradient_evaluations = 0;
    uint64_t circuits_cumulative = 0;
    double gamma = 0.0;

    // Last candidate snapshot (feeds the per-iteration trace and the
    // converged-exit path).
    double last_cost = 1.0;
    double last_td = 1.0;
    std::vector<double> last_candidate_params;

    Evaluator(const LinearProblem& p, const AnsatzCircuit& c, const SolverConfig& cfg)
        : problem(p), circuit(c), config(cfg), shadow_root(Rng(cfg.seed).derive(0x5348414457)) {
        table = build_terms(p.a, p.u);
        if (cfg.preprocess) preprocess(table);
        observables = distinct_observables(table);
        gamma = termination_gamma(p.n, p.kappa, cfg.term_eps);
    }

    uint64_t budget_now() const {
        if (config.exact_cost) return 0;
        return shadow_size(observables.size(), table.max_locality, eps_now,
                           config.shadow_constant);
    }

    /// One evaluation.  Candidate evaluations check the terminator and are
    /// charged to the cost-evaluation ledger; probe evaluations (gradient
    /// shifts) are charged separately and never terminate the run.
    CostValue evaluate(const std::vector<double>& params, bool candidate) {
        StateVector x = circuit.prepare(params);
        CostValue value;
        if (config.exact_cost) {
            value = evaluate_exact(table, x);
        } else {
            uint64_t serial = cost_evaluations + gradient_evaluations;
            value = shadow_cost(table, observables, x, eps_now, config.shadow_constant,
                                shadow_root.derive(serial));
            circuits_cumulative += budget_now();
        }
        if (candidate) {
            ++cost_evaluations;
            last_cost = value.cost;
            last_td = trace_distance(x, problem.exact_solution);
            last_candidate_params = params;
            switch (config.terminator) {
                case Terminator::TraceDistance:
                    if (last_td <= config.term_eps) throw Converged{};
                    break;
                case Terminator::Gamma:
                    if (value.cost <= gamma) throw Converged{};
                    break;
                case Terminator::CostPlateau:
                    break;  // handled by the iteration loop
            }
        } else {
            ++gradient_evaluations;
        }
        return value;
    }
};

}  // namespace

SolveResult solve(const LinearProblem& problem, const AnsatzCircuit& circuit,
                  const SolverConfig& config) {
    if (circuit.n != problem.n) throw std::invalid_argument("solve: ansatz width mismatch");
    if (config.eps_schedule.empty())
        throw std::invalid_argument("solve: empty accuracy schedule");
    for (const ScheduleStage& s : config.eps_schedule)
        if (!(s.eps > 0.0) || s.eps > 1.0)
            throw std::invalid_argument("solve: schedule eps must lie in (0, 1]");
    if (!(config.term_eps > 0.0) || config.term_eps > 1.0)
        throw std::invalid_argument("solve: terminator eps must lie in (0, 1]");
    if (config.learning_rate_floor > config.learning_rate)
        throw std::invalid_argument("solve: learning-rate floor above the initial rate");

    if (!config.init_start.empty() && config.init_start.size() != circuit.param_count)
        throw std::invalid_argument("solve: init_start length must match the ansatz");

    Evaluator ev(problem, circuit, config);
    Rng root(config.seed);
    Rng init_rng = root.derive(0x494e4954);
    std::vector<double> params = init_params(circuit, config.init_sigma, init_rng);
    for (std::size_t j = 0; j < config.init_start.size(); ++j) params[j] += config.init_start[j];

    SolveResult result;
    auto eps_at = [&](uint64_t iteration) {
        double eps = config.eps_schedule.front().eps;
        for (const ScheduleStage& s : config.eps_schedule)
            if (iteration >= s.iteration) eps = s.eps;
        return eps;
    };
    auto record = [&](uint64_t iteration) {
        result.cost_trace.push_back({iteration, ev.last_cost, ev.eps_now, ev.budget_now(),
                                     ev.circuits_cumulative, ev.last_td});
    };

    try {
        if (config.optimizer == Optimizer::Powell) {
            // Every Powell evaluation is a candidate; iterations are
            // candidate evaluations.
            PowellConfig pc;
            pc.max_evaluations = config.max_evaluations;
            pc.line_tol = config.powell_line_tol;
            pc.line_maxiter = config.powell_line_maxiter;
            auto cb = [&](const std::vector<double>& p) {
                ev.eps_now = eps_at(ev.cost_evaluations);
                double c = ev.evaluate(p, true).cost;
                record(ev.cost_evaluations);
                return c;
            };
            params = powell_search(cb, std::move(params), pc);
        } else {
            AdamState adam;
            double lr = config.learning_rate;
            double window_best = 2.0, previous_window_best = 2.0;
            CostEstimator grad_est{config.exact_gradient || config.exact_cost, 0.1,
                                   config.shadow_constant};
            for (uint64_t iter = 0; iter < config.max_iterations; ++iter) {
                ev.eps_now = eps_at(iter);
                grad_est.eps = ev.eps_now;
                CostValue value = ev.evaluate(params, true);
                record(iter);
                result.iterations = iter + 1;

                window_best = std::min(window_best, value.cost);
                if ((iter + 1) % config.plateau_window == 0) {
                    bool improved =
                        window_best < previous_window_best * (1.0 - config.plateau_rel);
                    if (!improved) {
                        if (config.terminator == Terminator::CostPlateau &&
                            previous_window_best < 2.0)
                            break;
                        lr = std::max(lr / 10.0, config.learning_rate_floor);
                    }
                    previous_window_best = window_best;
                    window_best = 2.0;
                }

                // Parameter-shift gradient, reusing the candidate value at
                // the base point.  Shadow-mode shifts route through the
                // evaluator so their circuits and evaluations are charged.
                std::vector<double> grad;
                if (grad_est.exact) {
                    CostValue base =
                        config.exact_cost ? value : evaluate_exact(ev.table, circuit.prepare(params));
                    grad = gradient(ev.table, circuit, params, grad_est, Rng(0), &base);
                    ev.gradient_evaluations += 2 * circuit.param_count;
                } else {
                    grad.assign(circuit.param_count, 0.0);
                    std::vector<double> shifted = params;
                    const double n = double(ev.table.n);
                    for (std::size_t j = 0; j < params.size(); ++j) {
                        shifted[j] = params[j] + kPi / 2.0;
                        CostValue plus = ev.evaluate(shifted, false);
                        shifted[j] = params[j] - kPi / 2.0;
                        CostValue minus = ev.evaluate(shifted, false);
                        shifted[j] = params[j];
                        double dmu = (plus.mu - minus.mu) / 2.0;
                        double domega = (plus.omega - minus.omega) / 2.0;
                        grad[j] = -(dmu * value.omega - value.mu * domega) /
                                  (2.0 * n * value.omega * value.omega);
                    }
                }
                params = adam_step(adam, params, grad, lr);
            }
        }
    } catch (const Converged&) {
        result.converged = true;
        params = ev.last_candidate_params;  // the candidate that fired
    }

    if (result.cost_trace.empty()) {
        // No candidate was ever evaluated (zero budget): evaluate once so
        // the trace and metrics are well-defined.
        try {
            ev.eps_now = eps_at(0);
            ev.evaluate(params, true);
        } catch (const Converged&) {
            result.converged = true;
        }
        record(0);
    }

    result.params_opt = params;
    result.state = circuit.prepare(params);
    result.trace_distance_final = trace_distance(result.state, problem.exact_solution);
    result.fidelity_final = fidelity(result.state, problem.exact_solution);
    if (config.optimizer == Optimizer::Powell) result.iterations = ev.cost_evaluations;
    result.cost_evaluations = ev.cost_evaluations;
    result.gradient_evaluations = ev.gradient_evaluations;
    return result;
}

}  // namespace qls
