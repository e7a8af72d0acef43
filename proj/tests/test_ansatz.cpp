#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qls/ansatz.hpp"

using namespace qls;

namespace {

double observable(const AnsatzCircuit& c, const std::vector<double>& params,
                  const PauliString& p) {
    StateVector s = c.prepare(params);
    return expectation_serial(s, p);
}

}  // namespace

TEST_CASE("parameter counts per layer") {
    CHECK(AnsatzCircuit::hardware_efficient(4, 1).param_count == 12);
    CHECK(AnsatzCircuit::hardware_efficient(4, 5).param_count == 60);
    CHECK(AnsatzCircuit::hardware_efficient(3, 2).param_count == 18);
    CHECK(AnsatzCircuit::real_amplitude(4, 1).param_count == 6);
    CHECK(AnsatzCircuit::real_amplitude(4, 4).param_count == 24);
    CHECK(AnsatzCircuit::real_amplitude(8, 1).param_count == 14);
    CHECK(AnsatzCircuit::real_amplitude(2, 3).param_count == 6);
    CHECK_THROWS(AnsatzCircuit::real_amplitude(3, 1));
}

TEST_CASE("zero parameters prepare the zero state") {
    for (auto c : {AnsatzCircuit::hardware_efficient(4, 3),
                   AnsatzCircuit::real_amplitude(4, 3),
                   AnsatzCircuit::real_amplitude(8, 2)}) {
        std::vector<double> zeros(c.param_count, 0.0);
        StateVector s = c.prepare(zeros);
        CHECK(std::abs(s.amps[0] - cplx(1, 0)) < 1e-14);
        for (uint64_t i = 1; i < s.dim(); ++i) CHECK(std::abs(s.amps[i]) < 1e-14);
    }
}

TEST_CASE("prepared states are normalised and deterministic") {
    Rng rng(5);
    for (auto c : {AnsatzCircuit::hardware_efficient(4, 2),
                   AnsatzCircuit::real_amplitude(4, 2)}) {
        auto params = init_params(c, 0.5, rng);
        StateVector a = c.prepare(params), b = c.prepare(params);
        CHECK(std::abs(a.norm() - 1.0) < 1e-12);
        for (uint64_t i = 0; i < a.dim(); ++i) CHECK(a.amps[i] == b.amps[i]);
    }
}

TEST_CASE("real-amplitude states have real amplitudes") {
    Rng rng(7);
    auto c = AnsatzCircuit::real_amplitude(4, 3);
    auto params = init_params(c, 1.0, rng);
    StateVector s = c.prepare(params);
    for (const cplx& a : s.amps) CHECK(std::abs(a.imag()) < 1e-14);
}

TEST_CASE("hardware-efficient layer structure") {
    auto c = AnsatzCircuit::hardware_efficient(4, 1);
    REQUIRE(c.program.size() == 16);  // 12 rotations + 4 ring CNOTs
    CHECK(c.program[0].kind == GateKind::RX);
    CHECK(c.program[4].kind == GateKind::RY);
    CHECK(c.program[8].kind == GateKind::RZ);
    CHECK(c.program[12].kind == GateKind::CNOT);
    CHECK(c.program[12].q0 == 0);
    CHECK(c.program[12].q1 == 1);
    CHECK(c.program[15].q0 == 3);  // ring closes last -> first
    CHECK(c.program[15].q1 == 0);
}

TEST_CASE("real-amplitude layer structure at n=4") {
    auto c = AnsatzCircuit::real_amplitude(4, 1);
    REQUIRE(c.program.size() == 9);  // CNOT(0,1) CNOT(2,3) RYx4 CNOT(1,2) RYx2
    CHECK(c.program[0].kind == GateKind::CNOT);
    CHECK(c.program[0].q0 == 0);
    CHECK(c.program[1].q0 == 2);
    CHECK(c.program[2].kind == GateKind::RY);
    CHECK(c.program[6].kind == GateKind::CNOT);
    CHECK(c.program[6].q0 == 1);
    CHECK(c.program[6].q1 == 2);
    CHECK(c.program[7].kind == GateKind::RY);
    CHECK(c.program[7].q0 == 1);
    CHECK(c.program[8].q0 == 2);
}

TEST_CASE("parameter-shift rule matches finite differences") {
    Rng rng(11);
    for (auto c : {AnsatzCircuit::hardware_efficient(3, 2),
                   AnsatzCircuit::real_amplitude(4, 2)}) {
        auto params = init_params(c, 0.4, rng);
        PauliString obs = PauliString::parse(c.n == 3 ? "ZXY" : "ZXYI");
        for (uint32_t j = 0; j < c.param_count; j += 3) {
            const double half_pi = 1.5707963267948966;
            auto plus = params, minus = params;
            plus[j] += half_pi;
            minus[j] -= half_pi;
            double shift = (observable(c, plus, obs) - observable(c, minus, obs)) / 2.0;

            const double h = 1e-5;
            auto fplus = params, fminus = params;
            fplus[j] += h;
            fminus[j] -= h;
            double fd = (observable(c, fplus, obs) - observable(c, fminus, obs)) / (2 * h);
            CHECK(shift == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("offset application embeds the circuit in a larger register") {
    Rng rng(13);
    auto c = AnsatzCircuit::real_amplitude(2, 1);
    auto params = init_params(c, 0.8, rng);
    StateVector small = c.prepare(params);

    StateVector big = StateVector::zero_state(3);
    c.apply(big, params, 1);  // act on qubits 1..2; qubit 0 stays |0>
    for (uint64_t i = 0; i < 4; ++i) CHECK(std::abs(big.amps[i] - small.amps[i]) < 1e-14);
    for (uint64_t i = 4; i < 8; ++i) CHECK(std::abs(big.amps[i]) < 1e-14);
}

TEST_CASE("init_params spread follows sigma") {
    Rng rng(17);
    auto c = AnsatzCircuit::hardware_efficient(4, 40);  // 480 samples
    auto params = init_params(c, 0.01, rng);
    double mean = 0, var = 0;
    for (double v : params) mean += v;
    mean /= double(params.size());
    for (double v : params) var += (v - mean) * (v - mean);
    var /= double(params.size() - 1);
    CHECK(std::abs(mean) < 0.002);
    CHECK(std::sqrt(var) == doctest::Approx(0.01).epsilon(0.25));
}
