#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qls/solver.hpp"

using namespace qls;

namespace {

StateVector basis_state(uint32_t n, uint64_t index) {
    std::vector<cplx> amps(uint64_t(1) << n, 0.0);
    amps[index] = 1.0;
    return StateVector::from_amplitudes(n, std::move(amps));
}

StateVector random_state(uint32_t n, Rng& rng) {
    std::vector<cplx> amps(uint64_t(1) << n);
    for (cplx& a : amps) a = cplx(rng.normal(), rng.normal());
    StateVector s = StateVector::from_amplitudes(n, std::move(amps));
    s.normalize();
    return s;
}

PauliSum random_sum(uint32_t n, uint32_t terms, Rng& rng, bool with_identity = true) {
    PauliSum s(n);
    for (uint32_t t = 0; t < terms; ++t) {
        PauliString p = PauliString::identity(n);
        do {
            for (uint32_t q = 0; q < n; ++q) p.set_letter(q, "IXYZ"[rng.below(4)]);
        } while (p.is_identity());
        s.add_term(cplx(rng.normal(), rng.normal()), p);
    }
    if (with_identity) s.add_term(cplx(rng.normal(), 0.0), PauliString::identity(n));
    return s;
}

/// Norm-1-scaled sum usable as the preparation operand (keeps the cost in
/// its certified range).
PauliSum contraction_sum(uint32_t n, uint32_t terms, Rng& rng) {
    PauliSum s = random_sum(n, terms, rng);
    double scale = s.coeff_norm1();
    for (auto& [c, p] : s.terms) c /= scale;
    return s;
}

/// Identity system on `n` qubits: A = U = I, b = solution = |0...0>.
LinearProblem identity_problem(uint32_t n) {
    LinearProblem p;
    p.n = n;
    p.a = PauliSum::identity(n);
    p.u = PauliSum::identity(n);
    p.b = basis_state(n, 0);
    p.exact_solution = basis_state(n, 0);
    p.kappa = 1.0;
    p.label = "identity";
    p.metadata["solution_scale"] = 1.0;
    return p;
}

}  // namespace

TEST_CASE("trace distance and fidelity on pure states") {
    StateVector zero = basis_state(1, 0);
    StateVector one = basis_state(1, 1);
    StateVector plus = StateVector::from_amplitudes(
        1, {cplx(1.0 / std::sqrt(2.0), 0.0), cplx(1.0 / std::sqrt(2.0), 0.0)});

    CHECK(trace_distance(zero, zero) == doctest::Approx(0.0));
    CHECK(fidelity(zero, zero) == doctest::Approx(1.0));
    CHECK(trace_distance(zero, one) == doctest::Approx(1.0));
    CHECK(fidelity(zero, one) == doctest::Approx(0.0));
    CHECK(trace_distance(zero, plus) == doctest::Approx(0.70710678).epsilon(1e-7));
    CHECK(fidelity(zero, plus) == doctest::Approx(0.5));

    StateVector wide = basis_state(2, 0);
    CHECK_THROWS_AS(trace_distance(zero, wide), std::invalid_argument);
    CHECK_THROWS_AS(fidelity(zero, wide), std::invalid_argument);

    // TD^2 == 1 - F on random pairs.
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        StateVector a = random_state(3, rng), b = random_state(3, rng);
        double td = trace_distance(a, b), f = fidelity(a, b);
        CHECK(std::abs(td * td - (1.0 - f)) < 1e-10);
        CHECK(td >= 0.0);
        CHECK(td <= 1.0);
    }
}

TEST_CASE("exact parameter-shift gradient matches finite differences") {
    Rng rng(404);
    CostEstimator exact{true, 0.1, 1.0};
    for (int trial = 0; trial < 8; ++trial) {
        uint32_t n = 3;
        PauliSum a = random_sum(n, 3, rng);
        PauliSum u = contraction_sum(n, 2, rng);
        CostTermTable table = build_terms(a, u);
        preprocess(table);
        AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(n, 2);
        std::vector<double> params(circuit.param_count);
        for (double& v : params) v = rng.normal();

        std::vector<double> grad = gradient(table, circuit, params, exact, Rng(0));

        const double h = 1e-5;
        std::vector<double> probe = params;
        for (std::size_t j = 0; j < params.size(); ++j) {
            probe[j] = params[j] + h;
            double up = evaluate_exact(table, circuit.prepare(probe)).cost;
            probe[j] = params[j] - h;
            double down = evaluate_exact(table, circuit.prepare(probe)).cost;
            probe[j] = params[j];
            CHECK(std::abs(grad[j] - (up - down) / (2.0 * h)) < 1e-6);
        }
    }
}

TEST_CASE("gradient vanishes at an exact minimum") {
    // Identity system: theta = 0 prepares |0...0> = the solution, so the
    // cost sits at its zero minimum and every shift derivative vanishes.
    LinearProblem p = identity_problem(3);
    CostTermTable table = build_terms(p.a, p.u);
    AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(3, 2);
    std::vector<double> params(circuit.param_count, 0.0);
    std::vector<double> grad =
        gradient(table, circuit, params, CostEstimator{true, 0.1, 1.0}, Rng(0));
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    CHECK(std::sqrt(norm) < 1e-6);
}

namespace {

/// Average `reps` independent shadow gradients and require the mean to sit
/// within three standard errors of the exact gradient: the error-vector norm
/// against the aggregated per-coordinate standard error.
void check_gradient_consistency(const CostTermTable& table, const AnsatzCircuit& circuit,
                                const std::vector<double>& params, double eps,
                                uint64_t seed) {
    std::vector<double> exact =
        gradient(table, circuit, params, CostEstimator{true, 0.1, 1.0}, Rng(0));
    const int reps = 100;
    CostEstimator noisy{false, eps, 1.0};
    std::vector<std::vector<double>> draws(reps);
    Rng key(seed);
    for (int r = 0; r < reps; ++r)
        draws[r] = gradient(table, circuit, params, noisy, key.derive(r));
    double err2 = 0.0, se2 = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j) {
        double mean = 0.0, var = 0.0;
        for (int r = 0; r < reps; ++r) mean += draws[r][j];
        mean /= reps;
        for (int r = 0; r < reps; ++r) var += (draws[r][j] - mean) * (draws[r][j] - mean);
        err2 += (mean - exact[j]) * (mean - exact[j]);
        se2 += var / (reps - 1) / reps;
    }
    CHECK(std::sqrt(err2) <= 3.0 * std::sqrt(se2) + 1e-12);
}

}  // namespace

TEST_CASE("shadow gradient is a consistent estimate of the exact one") {
    // Identity system: A'A = I makes the cost denominator exact (a shadow
    // estimates the identity word without error), so the shadow gradient is
    // an unbiased average of per-word estimates and the plain three-sigma
    // band applies even at coarse accuracy.
    LinearProblem idp = identity_problem(3);
    CostTermTable id_table = build_terms(idp.a, idp.u);
    preprocess(id_table);
    AnsatzCircuit id_circuit = AnsatzCircuit::hardware_efficient(3, 1);
    Rng rng(77);
    std::vector<double> id_params(id_circuit.param_count);
    for (double& v : id_params) v = rng.normal();
    check_gradient_consistency(id_table, id_circuit, id_params, 0.2, 505);

    // Generic benchmark instance: the estimate divides two noisy sums, which
    // carries an O(eps^2) ratio bias that no amount of averaging removes.
    // At eps = 0.05 that bias sits well inside the statistical band.
    LinearProblem p = random_fixture_1();
    CostTermTable table = build_terms(p.a, p.u);
    preprocess(table);
    AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(4, 1);
    std::vector<double> params(circuit.param_count, 0.1);
    check_gradient_consistency(table, circuit, params, 0.05, 909);
}

TEST_CASE("Adam update: fixed points and the first-step magnitude") {
    std::vector<double> params{0.5, -1.25, 2.0};

    AdamState idle;
    std::vector<double> unchanged = adam_step(idle, params, {0.0, 0.0, 0.0}, 0.1);
    CHECK(unchanged == params);

    // One step under a constant gradient moves each coordinate by
    // almost exactly -lr * sign(g).
    AdamState fresh;
    std::vector<double> g{0.3, -0.02, 4.0};
    std::vector<double> stepped = adam_step(fresh, params, g, 0.05);
    for (std::size_t j = 0; j < params.size(); ++j) {
        double step = stepped[j] - params[j];
        CHECK(step == doctest::Approx(-0.05 * (g[j] > 0 ? 1.0 : -1.0)).epsilon(1e-5));
    }
    CHECK(fresh.t == 1);

    // Deterministic: replaying the same inputs gives the same outputs.
    AdamState replay;
    CHECK(adam_step(replay, params, g, 0.05) == stepped);

    AdamState bad;
    CHECK_THROWS_AS(adam_step(bad, params, {1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("Powell direction-set search on a quadratic bowl") {
    uint64_t evals = 0;
    auto bowl = [&](const std::vector<double>& p) {
        ++evals;
        double dx = p[0] - 1.0, dy = p[1] + 0.5;
        return dx * dx + 2.0 * dy * dy;
    };
    PowellConfig config;
    config.line_tol = 1e-8;
    config.ftol = 1e-14;
    config.max_evaluations = 200;
    std::vector<double> best = powell_search(bowl, {3.0, 2.0}, config);
    CHECK(std::abs(best[0] - 1.0) < 1e-6);
    CHECK(std::abs(best[1] + 0.5) < 1e-6);
    CHECK(evals <= 200);

    // Already-optimal start comes straight back.
    std::vector<double> stay = powell_search(bowl, {1.0, -0.5}, config);
    CHECK(std::abs(stay[0] - 1.0) < 1e-6);
    CHECK(std::abs(stay[1] + 0.5) < 1e-6);

    // A tiny budget stops the search gracefully instead of throwing.
    evals = 0;
    PowellConfig tight = config;
    tight.max_evaluations = 10;
    std::vector<double> partial = powell_search(bowl, {3.0, 2.0}, tight);
    CHECK(evals <= 10);
    CHECK(partial.size() == 2);
}

TEST_CASE("solve: identity system converges under the gamma rule") {
    LinearProblem p = identity_problem(2);
    AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(2, 1);
    SolverConfig config;
    config.optimizer = Optimizer::Adam;
    config.exact_cost = true;
    config.terminator = Terminator::Gamma;
    config.term_eps = 0.1;  // gamma = 0.01 / 2
    config.max_iterations = 50;
    config.init_sigma = 0.01;
    config.seed = 11;

    SolveResult r = solve(p, circuit, config);
    CHECK(r.converged);
    CHECK(r.iterations <= 50);
    REQUIRE(!r.cost_trace.empty());
    CHECK(r.cost_trace.back().cost <= termination_gamma(2, 1.0, 0.1));
    CHECK(fidelity(r.state, p.exact_solution) > 0.99);
}

TEST_CASE("solve: shadow-mode run is deterministic and accounts circuits") {
    LinearProblem p = random_fixture_1();
    AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(4, 1);
    SolverConfig config;
    config.optimizer = Optimizer::Adam;
    config.eps_schedule = {{0, 0.3}};
    config.terminator = Terminator::TraceDistance;
    config.term_eps = 0.01;  // unlikely to fire in 8 iterations
    config.max_iterations = 8;
    config.seed = 3;

    SolveResult r = solve(p, circuit, config);
    REQUIRE(!r.cost_trace.empty());
    CHECK(r.iterations <= 8);
    CHECK(r.cost_evaluations == r.cost_trace.size());
    CHECK(r.gradient_evaluations == r.iterations * 2 * circuit.param_count);

    // Budget column matches the sizing rule; circuit totals never move
    // backwards.
    CostTermTable table = build_terms(p.a, p.u);
    preprocess(table);
    uint64_t per_eval =
        shadow_size(distinct_observables(table).size(), table.max_locality, 0.3, 1.0);
    uint64_t previous = 0;
    for (const TraceRow& row : r.cost_trace) {
        CHECK(row.shadow_budget == per_eval);
        CHECK(row.circuits_cumulative >= previous);
        previous = row.circuits_cumulative;
        CHECK(row.eps_shadow == 0.3);
        CHECK(row.cost >= 0.0);
        CHECK(row.cost <= 1.0);
    }
    // Every candidate and every gradient shift consumed one budget each.
    // Rows are recorded right after the iteration's candidate, so the last
    // row predates the final iteration's gradient shifts.
    CHECK(r.cost_trace.back().circuits_cumulative ==
          per_eval * (r.cost_evaluations + r.gradient_evaluations -
                      2 * circuit.param_count));

    SolveResult again = solve(p, circuit, config);
    REQUIRE(again.cost_trace.size() == r.cost_trace.size());
    for (std::size_t i = 0; i < r.cost_trace.size(); ++i)
        CHECK(again.cost_trace[i].cost == r.cost_trace[i].cost);
    CHECK(again.params_opt == r.params_opt);

    SolverConfig other = config;
    other.seed = 4;
    SolveResult different = solve(p, circuit, other);
    bool same = different.cost_trace.size() == r.cost_trace.size();
    if (same)
        same = different.cost_trace.front().cost == r.cost_trace.front().cost;
    CHECK(!same);
}

TEST_CASE("solve: Powell with exact cost drives the cost down") {
    LinearProblem p = ising_problem();
    AnsatzCircuit circuit = AnsatzCircuit::real_amplitude(4, 2);
    SolverConfig config;
    config.optimizer = Optimizer::Powell;
    config.exact_cost = true;
    config.terminator = Terminator::TraceDistance;
    config.term_eps = 0.05;
    config.max_evaluations = 2000;
    config.seed = 21;

    SolveResult r = solve(p, circuit, config);
    REQUIRE(!r.cost_trace.empty());
    CHECK(r.iterations == r.cost_evaluations);
    CHECK(r.gradient_evaluations == 0);
    double final_cost = evaluate_exact(build_terms(p.a, p.u), r.state).cost;
    CHECK(final_cost <= r.cost_trace.front().cost);
    if (r.converged) CHECK(r.trace_distance_final <= 0.05 + 1e-9);
}

TEST_CASE("solve: configuration validation") {
    LinearProblem p = identity_problem(2);
    AnsatzCircuit circuit = AnsatzCircuit::hardware_efficient(2, 1);
    SolverConfig config;
    config.eps_schedule = {{0, 1.5}};
    CHECK_THROWS_AS(solve(p, circuit, config), std::invalid_argument);
    config.eps_schedule = {{0, 0.1}};
    config.term_eps = 0.0;
    CHECK_THROWS_AS(solve(p, circuit, config), std::invalid_argument);
    config.term_eps = 0.01;
    config.learning_rate = 0.001;
    config.learning_rate_floor = 0.1;
    CHECK_THROWS_AS(solve(p, circuit, config), std::invalid_argument);
    AnsatzCircuit wrong = AnsatzCircuit::hardware_efficient(3, 1);
    SolverConfig ok;
    CHECK_THROWS_AS(solve(p, wrong, ok), std::invalid_argument);
}
