// Command-line front end: solve benchmark systems, tabulate circuit-count
// models, calibrate the shadow estimator, and decompose dense matrices.
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qls/io.hpp"
#include "qls/problems.hpp"
#include "qls/solver.hpp"
#include "qls/vqls.hpp"

namespace fs = std::filesystem;
using namespace qls;

namespace {

struct GlobalOpts {
    uint64_t seed = 1;
    unsigned jobs = 0;  // 0 = all hardware threads
    std::string out = ".";
    bool no_preprocess = false;
    bool exact = false;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
    std::vector<T> values;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::istringstream field(item);
        T value{};
        char extra = 0;
        if (!(field >> value) || field.get(extra))
            throw CLI::ValidationError(flag, "bad list entry '" + item + "'");
        values.push_back(value);
    }
    if (values.empty()) throw CLI::ValidationError(flag, "empty list");
    return values;
}

std::vector<ScheduleStage> parse_schedule(const std::string& text) {
    std::vector<ScheduleStage> stages;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--schedule", "expected iter:eps, got '" + item + "'");
        ScheduleStage stage;
        try {
            stage.iteration = std::stoull(item.substr(0, colon));
            stage.eps = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--schedule", "bad stage '" + item + "'");
        }
        if (!stages.empty() && stage.iteration <= stages.back().iteration)
            throw CLI::ValidationError("--schedule", "stages must be strictly increasing");
        stages.push_back(stage);
    }
    if (stages.empty() || stages.front().iteration != 0)
        throw CLI::ValidationError("--schedule", "first stage must start at iteration 0");
    return stages;
}

/// Named benchmark systems plus `random:<n>,<terms>,<k>,<kappa>`.
LinearProblem make_problem(const std::string& selector, uint64_t seed) {
    if (selector == "iqlsp") return ising_problem();
    if (selector == "rqlsp1") return random_fixture_1();
    if (selector == "rqlsp2") return random_fixture_2();
    if (selector == "pgls") return potential_grid_4x4();
    if (selector == "laplace4") return laplace_grid(4);
    if (selector == "laplace16") return laplace_grid(16);
    if (selector.rfind("random:", 0) == 0) {
        auto spec = parse_list<double>(selector.substr(7), "--problem");
        if (spec.size() != 4)
            throw CLI::ValidationError("--problem", "random:<n>,<terms>,<k>,<kappa>");
        Rng rng = Rng(seed).derive(0x50524f42ull);  // problem-draw stream
        return random_problem(uint32_t(spec[0]), uint64_t(spec[1]), uint32_t(spec[2]),
                              spec[3], rng);
    }
    throw CLI::ValidationError("--problem", "unknown system '" + selector + "'");
}

/// Runs fn(0..count-1) on `jobs` workers (0 = hardware concurrency).
void run_pool(unsigned jobs, uint32_t count, const std::function<void(uint32_t)>& fn) {
    unsigned workers = jobs ? jobs : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1, count ? count : 1);
    if (workers == 1) {
        for (uint32_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<uint32_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                uint32_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (std::thread& t : pool) t.join();
}

StateVector random_state(uint32_t n, Rng& rng) {
    std::vector<cplx> amps(uint64_t(1) << n);
    for (cplx& a : amps) a = cplx(rng.normal(), rng.normal());
    StateVector s = StateVector::from_amplitudes(n, std::move(amps));
    s.normalize();
    return s;
}

PauliString random_local_word(uint32_t n, uint32_t k, Rng& rng) {
    std::vector<uint32_t> qubits(n);
    for (uint32_t q = 0; q < n; ++q) qubits[q] = q;
    PauliString word = PauliString::identity(n);
    for (uint32_t pick = 0; pick < k; ++pick) {
        uint32_t j = pick + uint32_t(rng.below(n - pick));
        std::swap(qubits[pick], qubits[j]);
        word.set_letter(qubits[pick], "XYZ"[rng.below(3)]);
    }
    return word;
}

// ---------------------------------------------------------------- solve ---

struct SolveOpts {
    std::string problem;
    uint32_t reps = 1;
    std::string optimizer = "adam";
    double eps = 0.1;
    std::string schedule;
    std::string ansatz = "hwe";
    uint32_t layers = 4;
    double lr = 0.1;
    double lr_floor = 0.001;
    uint64_t max_iter = 1000;
    uint64_t max_evals = 5000;
    std::string term = "td";
    double term_eps = 0.01;
    double init_sigma = 0.01;
    bool warm_start = false;
    bool exact_gradient = false;
};

int run_solve(const GlobalOpts& g, const SolveOpts& o) {
    LinearProblem problem = make_problem(o.problem, g.seed);
    AnsatzCircuit circuit = o.ansatz == "realamp"
                                ? AnsatzCircuit::real_amplitude(problem.n, o.layers)
                                : AnsatzCircuit::hardware_efficient(problem.n, o.layers);
    SolverConfig base;
    base.optimizer = o.optimizer == "powell" ? Optimizer::Powell : Optimizer::Adam;
    base.eps_schedule =
        o.schedule.empty() ? std::vector<ScheduleStage>{{0, o.eps}} : parse_schedule(o.schedule);
    base.exact_cost = g.exact;
    base.exact_gradient = g.exact || o.exact_gradient;
    base.preprocess = !g.no_preprocess;
    base.learning_rate = o.lr;
    base.learning_rate_floor = o.lr_floor;
    base.max_iterations = o.max_iter;
    base.max_evaluations = o.max_evals;
    base.terminator = o.term == "gamma"     ? Terminator::Gamma
                      : o.term == "plateau" ? Terminator::CostPlateau
                                            : Terminator::TraceDistance;
    base.term_eps = o.term_eps;
    base.init_sigma = o.init_sigma;

    fs::create_directories(g.out);
    Rng root(g.seed);
    std::vector<SolverConfig> configs(o.reps, base);
    for (uint32_t i = 0; i < o.reps; ++i) {
        Rng stream = root.derive(i + 1);
        configs[i].seed = stream();
    }

    std::vector<SolveResult> results(o.reps);
    std::vector<std::exception_ptr> errors(o.reps);
    run_pool(g.jobs, o.reps, [&](uint32_t i) {
        try {
            results[i] = solve(problem, circuit, configs[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<SummaryRow> summary(o.reps);
    std::string optimizer_name = base.optimizer == Optimizer::Powell ? "powell" : "adam";
    for (uint32_t i = 0; i < o.reps; ++i) {
        const SolveResult& r = results[i];
        fs::path run_dir = fs::path(g.out) / ("run-" + std::to_string(i + 1));
        fs::create_directories(run_dir);
        write_trace_csv(r.cost_trace, run_dir / "trace.csv");
        write_solution_csv(r.state, run_dir / "solution.csv");
        write_result_json(r, problem, optimizer_name, run_dir / "result.json");
        summary[i] = {i + 1, r.cost_evaluations, r.converged, r.trace_distance_final,
                      r.fidelity_final};
        std::cout << problem.label << " run " << (i + 1) << ": converged="
                  << (r.converged ? 1 : 0) << " evaluations=" << r.cost_evaluations
                  << " trace_distance=" << format_real(r.trace_distance_final)
                  << " fidelity=" << format_real(r.fidelity_final) << "\n";
    }
    write_summary_csv(summary, fs::path(g.out) / "summary.csv");
    std::cout << "wrote " << (fs::path(g.out) / "summary.csv").string() << "\n";
    return 0;
}

// ----------------------------------------------------------- resources ---

struct ResourceOpts {
    uint64_t n = 50;
    std::string k_list = "2,3,5,7";
    std::string l_list = "4,10,25,63,158,398,1000,2500";
    double eps = 0.01;
    uint64_t shots = 10000;
    uint32_t random_systems = 0;
    uint64_t l_min = 4;
    uint64_t l_max = 100;
    double kappa = 10.0;
};

int run_resources(const GlobalOpts& g, const ResourceOpts& o) {
    fs::create_directories(g.out);
    fs::path csv_path = fs::path(g.out) / "resources.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error(csv_path.string() + ": cannot open");

    if (o.random_systems == 0) {
        // Closed-form per-step counts for an L-term, k-local decomposition.
        csv << "L,k,vqls,sqls\n";
        auto ls = parse_list<uint64_t>(o.l_list, "--L");
        auto ks = parse_list<uint32_t>(o.k_list, "--k");
        for (uint64_t l : ls)
            for (uint32_t k : ks)
                csv << l << ',' << k << ',' << circuits_per_step_vqls(l, o.n, o.shots)
                    << ',' << circuits_per_step_sqls(l, o.n, k, o.eps) << "\n";
        std::cout << "wrote " << csv_path.string() << "\n";
        return 0;
    }

    // Empirical sweep: random systems spread over [l_min, l_max] terms,
    // counting the term table before and after the contraction pass.
    csv << "system,L,k,n_raw,n_pp,vqls,sqls,vqls_pp,sqls_pp\n";
    uint32_t k = parse_list<uint32_t>(o.k_list, "--k").front();
    Rng root = Rng(g.seed).derive(0x53574545ull);  // sweep stream
    for (uint32_t s = 0; s < o.random_systems; ++s) {
        uint64_t l = o.random_systems == 1
                         ? o.l_min
                         : o.l_min + (o.l_max - o.l_min) * s / (o.random_systems - 1);
        Rng draw = root.derive(s);
        // `l` counts every string in A, identity included.
        LinearProblem p = random_problem(uint32_t(o.n), l - 1, k, o.kappa, draw);
        uint64_t l_actual = p.a.size();
        CostTermTable table = build_terms(p.a, p.u);
        uint64_t n_raw = distinct_observables(table).size();
        preprocess(table);
        uint64_t n_pp = distinct_observables(table).size();
        csv << s << ',' << l_actual << ',' << k << ',' << n_raw << ',' << n_pp << ','
            << circuits_per_step_vqls(l_actual, o.n, o.shots) << ','
            << circuits_per_step_sqls(l_actual, o.n, k, o.eps) << ','
            << circuits_per_step_hadamard_preprocessed(n_pp, o.shots) << ','
            << circuits_per_step_shadow_preprocessed(n_pp, k, o.eps) << "\n";
    }
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

// --------------------------------------------------------- shadow-bench ---

struct ShadowBenchOpts {
    uint32_t n = 4;
    uint32_t k = 2;
    std::string eps_list = "0.2,0.1,0.05";
    uint32_t trials = 50;
};

int run_shadow_bench(const GlobalOpts& g, const ShadowBenchOpts& o) {
    if (o.k > o.n) throw CLI::ValidationError("--k", "locality exceeds register width");
    fs::create_directories(g.out);
    fs::path csv_path = fs::path(g.out) / "shadow_bench.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error(csv_path.string() + ": cannot open");
    csv << "label,eps,budget,batches,trials,within_frac,mean_abs_err,max_abs_err\n";

    auto eps_values = parse_list<double>(o.eps_list, "--eps");
    Rng root = Rng(g.seed).derive(0x5342454eull);  // bench stream

    // The sizing rule budgets a family of M observables at once (its log M
    // factor and the median-of-means batches are what buy the
    // high-probability guarantee), so each row uses the budget for a
    // `trials`-observable family.
    uint32_t batches = default_batches(o.trials);

    // Identity sanity row: the estimator returns the identity expectation
    // without error at any budget.
    {
        Rng key = root.derive(0);
        StateVector state = random_state(o.n, key);
        std::vector<PauliString> obs{PauliString::identity(o.n)};
        uint64_t budget = shadow_size(o.trials, o.k, eps_values.front());
        double est = estimate_paulis_binned(state, obs, budget, batches,
                                            key.derive(1))[0];
        double err = std::abs(est - 1.0);
        csv << "identity," << format_real(eps_values.front()) << ',' << budget << ','
            << batches << ",1," << (err == 0.0 ? 1 : 0) << ',' << format_real(err)
            << ',' << format_real(err) << "\n";
    }

    for (std::size_t e = 0; e < eps_values.size(); ++e) {
        double eps = eps_values[e];
        uint64_t budget = shadow_size(o.trials, o.k, eps);
        uint64_t within = 0;
        double mean_err = 0.0, max_err = 0.0;
        for (uint32_t t = 0; t < o.trials; ++t) {
            Rng key = root.derive(1000 * (e + 1) + t);
            StateVector state = random_state(o.n, key);
            PauliString word = random_local_word(o.n, o.k, key);
            double exact = expectation(state, word);
            double est = estimate_paulis_binned(state, {word}, budget, batches,
                                                key.derive(7))[0];
            double err = std::abs(est - exact);
            within += err <= eps;
            mean_err += err;
            max_err = std::max(max_err, err);
        }
        mean_err /= o.trials;
        csv << "random-k" << o.k << ',' << format_real(eps) << ',' << budget << ','
            << batches << ',' << o.trials << ','
            << format_real(double(within) / o.trials) << ',' << format_real(mean_err)
            << ',' << format_real(max_err) << "\n";
    }
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

// ------------------------------------------------------------ decompose ---

int run_decompose(const GlobalOpts& g, const std::string& input) {
    Dense m = load_dense_matrix(input);
    PauliSum direct = decompose_dense(m);
    UnitarySplit split = unitary_split(m);

    fs::create_directories(g.out);
    fs::path out(g.out);
    save_pauli_sum(direct, out / "a.pauli");
    save_pauli_sum(decompose_dense(split.u_b), out / "u_b.pauli");
    save_pauli_sum(decompose_dense(split.v_b), out / "v_b.pauli");
    save_pauli_sum(decompose_dense(split.u_c), out / "u_c.pauli");
    save_pauli_sum(decompose_dense(split.v_c), out / "v_c.pauli");

    double residual_direct = (to_dense(direct) - m).norm();
    Dense rebuilt = 0.5 * (split.u_b + split.v_b) + cplx(0.0, 0.5) * (split.u_c + split.v_c);
    double residual_split = (rebuilt - m).norm();

    std::ostringstream report;
    report << "dimension: " << m.rows() << "\n"
           << "terms: " << direct.size() << "\n"
           << "residual_direct: " << format_real(residual_direct) << "\n"
           << "residual_split: " << format_real(residual_split) << "\n";
    std::ofstream report_file(out / "report.txt");
    report_file << report.str();
    if (!report_file) throw std::runtime_error("cannot write report");
    std::cout << report.str() << "wrote " << (out / "a.pauli").string()
              << " and split factors\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational linear-system workbench with shadow-estimated costs"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "base seed for every random stream");
    app.add_option("--jobs", g.jobs, "worker threads for repetitions (0 = all)");
    app.add_option("--out", g.out, "output directory");
    app.add_flag("--no-preprocess", g.no_preprocess, "skip the term-contraction pass");
    app.add_flag("--exact", g.exact, "oracle cost mode (no shadow sampling)");

    SolveOpts so;
    CLI::App* solve_cmd = app.add_subcommand("solve", "run seeded variational solves");
    solve_cmd->fallthrough();
    solve_cmd->add_option("--problem", so.problem,
                          "iqlsp|rqlsp1|rqlsp2|pgls|laplace4|laplace16|"
                          "random:<n>,<terms>,<k>,<kappa>")
        ->required();
    solve_cmd->add_option("--reps", so.reps, "independent repetitions");
    solve_cmd->add_option("--optimizer", so.optimizer, "adam|powell");
    solve_cmd->add_option("--eps", so.eps, "shadow accuracy target");
    solve_cmd->add_option("--schedule", so.schedule, "staged accuracy, e.g. 0:0.1,250:0.01");
    solve_cmd->add_option("--ansatz", so.ansatz, "hwe|realamp");
    solve_cmd->add_option("--layers", so.layers, "ansatz layers");
    solve_cmd->add_option("--lr", so.lr, "Adam learning rate");
    solve_cmd->add_option("--lr-floor", so.lr_floor, "learning-rate decay floor");
    solve_cmd->add_option("--max-iter", so.max_iter, "Adam iteration cap");
    solve_cmd->add_option("--max-evals", so.max_evals, "cost-evaluation budget");
    solve_cmd->add_option("--term", so.term, "terminator: td|gamma|plateau");
    solve_cmd->add_option("--term-eps", so.term_eps, "termination accuracy");
    solve_cmd->add_option("--init-sigma", so.init_sigma, "initial parameter spread");
    solve_cmd->add_flag("--exact-gradient", so.exact_gradient,
                        "oracle gradients with sampled costs");

    ResourceOpts ro;
    CLI::App* res_cmd = app.add_subcommand("resources", "circuit-count models as CSV");
    res_cmd->fallthrough();
    res_cmd->add_option("--n", ro.n, "register width");
    res_cmd->add_option("--k", ro.k_list, "locality list, e.g. 2,3,5,7");
    res_cmd->add_option("--L", ro.l_list, "term-count list");
    res_cmd->add_option("--eps", ro.eps, "shadow accuracy target");
    res_cmd->add_option("--shots", ro.shots, "Hadamard-test shots");
    res_cmd->add_option("--random-systems", ro.random_systems,
                        "empirical sweep over this many random systems");
    res_cmd->add_option("--L-min", ro.l_min, "sweep lower bound");
    res_cmd->add_option("--L-max", ro.l_max, "sweep upper bound");
    res_cmd->add_option("--kappa", ro.kappa, "condition target for random systems");

    ShadowBenchOpts bo;
    CLI::App* bench_cmd =
        app.add_subcommand("shadow-bench", "empirical estimator error vs budget");
    bench_cmd->fallthrough();
    bench_cmd->add_option("--n", bo.n, "register width");
    bench_cmd->add_option("--k", bo.k, "observable locality");
    bench_cmd->add_option("--eps", bo.eps_list, "accuracy list, e.g. 0.2,0.1,0.05");
    bench_cmd->add_option("--trials", bo.trials, "random (state, word) pairs per row");

    std::string decompose_input;
    CLI::App* dec_cmd =
        app.add_subcommand("decompose", "dense matrix to Pauli sums and unitary factors");
    dec_cmd->fallthrough();
    dec_cmd->add_option("matrix", decompose_input, "dense matrix file (dim, then re im pairs)")
        ->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (solve_cmd->parsed()) return run_solve(g, so);
        if (res_cmd->parsed()) return run_resources(g, ro);
        if (bench_cmd->parsed()) return run_shadow_bench(g, bo);
        if (dec_cmd->parsed()) return run_decompose(g, decompose_input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
