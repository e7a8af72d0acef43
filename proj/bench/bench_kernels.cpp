// Kernel benchmark: the OpenMP-parallel hot paths against their serial
// reference implementations, with an agreement check on every pair.  Run
// from the build tree:  ./bench/bench_kernels [reps]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "qls/cost.hpp"
#include "qls/pauli.hpp"
#include "qls/problems.hpp"
#include "qls/rng.hpp"
#include "qls/shadow.hpp"
#include "qls/statevector.hpp"

using namespace qls;

namespace {

double time_of(const std::function<void()>& f, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms, double dev) {
    std::printf("%-24s %10.3f ms %10.3f ms   x%-5.2f   max dev %.1e\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, dev);
}

StateVector random_state(uint32_t n, Rng& rng) {
    StateVector s(n);
    for (auto& a : s.amps) a = cplx(rng.normal(), rng.normal());
    s.normalize();
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
    Rng rng(12);
    std::printf("%-24s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

    {
        // Pauli-word expectation on a 14-qubit register.
        StateVector s = random_state(14, rng);
        PauliString p = PauliString::parse("XZIYXIZIIXZIIY");
        double a = 0.0, b = 0.0;
        double ts = time_of([&] { a = expectation_serial(s, p); }, reps * 10);
        double tp = time_of([&] { b = expectation(s, p); }, reps * 10);
        row("expectation n=14", ts, tp, std::abs(a - b));
    }
    {
        // Full cost table evaluation on the 256-dimensional grid system.
        LinearProblem prob = laplace_grid(16);
        CostTermTable t = preprocess(build_terms(prob.a, prob.u));
        StateVector s = random_state(prob.n, rng);
        CostValue a, b;
        double ts = time_of([&] { a = evaluate_exact_serial(t, s); }, reps);
        double tp = time_of([&] { b = evaluate_exact(t, s); }, reps);
        row("cost table n=8", ts, tp, std::abs(a.cost - b.cost));
    }
    {
        // Shadow collection: 100k randomized-basis snapshots at n=8.
        StateVector s = random_state(8, rng);
        ClassicalShadow sa, sb;
        double ts = time_of([&] { sa = collect_serial(s, 100000, Rng(7)); }, std::max(1, reps / 4));
        double tp = time_of([&] { sb = collect(s, 100000, Rng(7)); }, std::max(1, reps / 4));
        // The parallel collector must reproduce the serial snapshots exactly:
        // each snapshot derives its own counter-keyed stream.
        double dev = 0.0;
        if (sa.snapshots.size() != sb.snapshots.size()) dev = 1.0;
        for (std::size_t i = 0; dev == 0.0 && i < sa.snapshots.size(); ++i)
            if (sa.snapshots[i].bases != sb.snapshots[i].bases ||
                sa.snapshots[i].outcomes != sb.snapshots[i].outcomes)
                dev = 1.0;
        row("collect 100k n=8", ts, tp, dev);
    }
    {
        // Dense-to-Pauli decomposition of a 64 x 64 operator.
        StateVector s = random_state(6, rng);
        Dense m = Dense::Zero(64, 64);
        for (Eigen::Index r = 0; r < 64; ++r)
            for (Eigen::Index c = 0; c < 64; ++c) m(r, c) = cplx(rng.normal(), rng.normal());
        PauliSum pa, pb;
        double ts = time_of([&] { pa = decompose_dense_serial(m); }, std::max(1, reps / 4));
        double tp = time_of([&] { pb = decompose_dense(m); }, std::max(1, reps / 4));
        double dev = 0.0;
        for (std::size_t i = 0; i < pa.terms.size(); ++i)
            dev = std::max(dev, std::abs(pa.terms[i].first - pb.terms[i].first));
        if (pa.terms.size() != pb.terms.size()) dev = 1.0;
        row("decompose 64x64", ts, tp, dev);
    }
    return 0;
}
