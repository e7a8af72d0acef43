#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qls/ansatz.hpp"
#include "qls/cost.hpp"
#include "qls/problems.hpp"
#include "qls/rng.hpp"
#include "qls/statevector.hpp"

namespace qls {

enum class Optimizer { Adam, Powell };

/// Stop rules: Gamma compares the running cost against eps^2/(n kappa^2);
/// TraceDistance compares each candidate state against the dense solution;
/// CostPlateau fires when the best cost stops improving.
enum class Terminator { Gamma, TraceDistance, CostPlateau };

/// One stage of the accuracy schedule: from `iteration` on, use `eps`.
struct ScheduleStage {
    uint64_t iteration = 0;
    double eps = 0.1;
};

struct SolverConfig {
    Optimizer optimizer = Optimizer::Adam;
    /// Shadow accuracy schedule, sorted by iteration; first stage starts at 0.
    std::vector<ScheduleStage> eps_schedule{{0, 0.1}};
    double shadow_constant = 1.0;
    bool exact_cost = false;      ///< oracle cost evaluations (no sampling)
    bool exact_gradient = false;  ///< oracle gradients (Adam only)
    bool preprocess = true;       ///< run the term-table contraction pass
    double learning_rate = 0.1;
    double learning_rate_floor = 0.001;
    uint64_t max_iterations = 1000;
    uint64_t max_evaluations = 5000;   ///< candidate-evaluation budget (Powell)
    double powell_line_tol = 1e-4;     ///< Brent tolerance inside Powell lines
    uint32_t powell_line_maxiter = 40; ///< Brent iteration cap per line
    Terminator terminator = Terminator::TraceDistance;
    double term_eps = 0.01;
    uint64_t plateau_window = 50;  ///< iterations per decay/plateau review
    double plateau_rel = 0.01;     ///< relative improvement below which lr decays
    double init_sigma = 0.01;      ///< stddev of the initial parameters
    /// Optional explicit starting point (e.g. the ansatz's plus-state
    /// parameters, the natural first guess when b is a uniform
    /// superposition).  The Gaussian init_sigma jitter is added on top;
    /// empty means a pure Gaussian start around zero.
    std::vector<double> init_start;
    uint64_t seed = 1;
};

struct TraceRow {
    uint64_t iteration = 0;
    double cost = 0.0;
    double eps_shadow = 0.0;
    uint64_t shadow_budget = 0;
    uint64_t circuits_cumulative = 0;
    double trace_distance = 1.0;
};

struct SolveResult {
    std::vector<double> params_opt;
    StateVector state;
    std::vector<TraceRow> cost_trace;
    double trace_distance_final = 1.0;
    double fidelity_final = 0.0;
    uint64_t iterations = 0;
    uint64_t cost_evaluations = 0;
    /// Parameter-shift evaluations consumed by gradients (2 per parameter
    /// per gradient), reported separately from plain cost evaluations.
    uint64_t gradient_evaluations = 0;
    bool converged = false;
};

/// Pure-state trace distance sqrt(1 - |<a|b>|^2).
double trace_distance(const StateVector& a, const StateVector& b);
/// Pure-state fidelity |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

/// How a single cost evaluation is produced: an exact oracle, or a fresh
/// shadow sized for `eps` at the given budget constant.
struct CostEstimator {
    bool exact = false;
    double eps = 0.1;
    double constant = 1.0;
};

/// One cost evaluation of the circuit at `params` (fresh shadow keyed by
/// `key` in sampling mode).
CostValue estimate_cost(const CostTermTable& table, const AnsatzCircuit& circuit,
                        const std::vector<double>& params, const CostEstimator& est,
                        const Rng& key);

/// Parameter-shift gradient: mu and omega are evaluated at theta_j +- pi/2
/// (fresh shadows per evaluation in sampling mode) and combined through
/// the quotient rule dC = -(mu' omega - mu omega') / (2 n omega^2).
/// `base` supplies the evaluation at theta when the caller already has it;
/// otherwise one extra evaluation is made.
std::vector<double> gradient(const CostTermTable& table, const AnsatzCircuit& circuit,
                             const std::vector<double>& params, const CostEstimator& est,
                             const Rng& key, const CostValue* base = nullptr);

struct AdamState {
    std::vector<double> m, v;
    uint64_t t = 0;
};

/// Canonical Adam update (beta1 0.9, beta2 0.999, eps 1e-8); returns the
/// new parameter vector.
std::vector<double> adam_step(AdamState& state, const std::vector<double>& params,
                              const std::vector<double>& grad, double lr);

struct PowellConfig {
    uint64_t max_evaluations = 5000;
    double ftol = 1e-10;        ///< relative sweep-decrease stop
    double line_tol = 1e-4;     ///< Brent line-search tolerance
    uint32_t line_maxiter = 40;
    double bracket_step = 0.25; ///< initial (and maximum) bracketing step
};

/// Direction-set minimization with Brent line searches (no gradients).
/// Returns the best point found; stops on ftol or the evaluation budget.
std::vector<double> powell_search(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> params0, const PowellConfig& config);

SolveResult solve(const LinearProblem& problem, const AnsatzCircuit& circuit,
                  const SolverConfig& config);

}  // namespace qls
