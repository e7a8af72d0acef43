#include "qls/ansatz.hpp"

#include <stdexcept>

namespace qls {

AnsatzCircuit AnsatzCircuit::hardware_efficient(uint32_t n, uint32_t layers) {
    if (n == 0 || n > 26) throw std::invalid_argument("ansatz: width must be in [1, 26]");
    if (layers == 0) throw std::invalid_argument("ansatz: need at least one layer");
    AnsatzCircuit c;
    c.n = n;
    c.layers = layers;
    c.family = AnsatzFamily::HardwareEfficient;
    int32_t slot = 0;
    for (uint32_t l = 0; l < layers; ++l) {
        for (GateKind kind : {GateKind::RX, GateKind::RY, GateKind::RZ})
            for (uint32_t q = 0; q < n; ++q)
                c.program.push_back({kind, uint8_t(q), 0, slot++});
        if (n >= 2) {
            for (uint32_t q = 0; q + 1 < n; ++q)
                c.program.push_back({GateKind::CNOT, uint8_t(q), uint8_t(q + 1), -1});
            c.program.push_back({GateKind::CNOT, uint8_t(n - 1), 0, -1});
        }
    }
    c.param_count = uint32_t(slot);
    return c;
}

AnsatzCircuit AnsatzCircuit::real_amplitude(uint32_t n, uint32_t layers) {
    if (n == 0 || n > 26) throw std::invalid_argument("ansatz: width must be in [1, 26]");
    if (n % 2 != 0)
        throw std::invalid_argument("ansatz: real-amplitude layers need an even width");
    if (layers == 0) throw std::invalid_argument("ansatz: need at least one layer");
    AnsatzCircuit c;
    c.n = n;
    c.layers = layers;
    c.family = AnsatzFamily::RealAmplitude;
    int32_t slot = 0;
    for (uint32_t l = 0; l < layers; ++l) {
        for (uint32_t q = 0; q + 1 < n; q += 2)
            c.program.push_back({GateKind::CNOT, uint8_t(q), uint8_t(q + 1), -1});
        for (uint32_t q = 0; q < n; ++q)
            c.program.push_back({GateKind::RY, uint8_t(q), 0, slot++});
        for (uint32_t q = 1; q + 1 < n; q += 2)
            c.program.push_back({GateKind::CNOT, uint8_t(q), uint8_t(q + 1), -1});
        for (uint32_t q = 1; q + 1 < n; ++q)
            c.program.push_back({GateKind::RY, uint8_t(q), 0, slot++});
    }
    c.param_count = uint32_t(slot);
    return c;
}

void AnsatzCircuit::apply(StateVector& s, const std::vector<double>& params,
                          uint32_t offset) const {
    if (params.size() != param_count)
        throw std::invalid_argument("ansatz: parameter count mismatch");
    if (offset + n > s.n) throw std::invalid_argument("ansatz: register too small");
    for (const GateOp& g : program) {
        uint32_t q0 = offset + g.q0, q1 = offset + g.q1;
        switch (g.kind) {
            case GateKind::RX: apply_rx(s, q0, params[std::size_t(g.slot)]); break;
            case GateKind::RY: apply_ry(s, q0, params[std::size_t(g.slot)]); break;
            case GateKind::RZ: apply_rz(s, q0, params[std::size_t(g.slot)]); break;
            case GateKind::CNOT: apply_cnot(s, q0, q1); break;
        }
    }
}

StateVector AnsatzCircuit::prepare(const std::vector<double>& params) const {
    StateVector s = StateVector::zero_state(n);
    apply(s, params);
    return s;
}

std::vector<double> AnsatzCircuit::plus_state_params() const {
    if (family != AnsatzFamily::RealAmplitude)
        throw std::invalid_argument("ansatz: plus start needs the real-amplitude family");
    std::vector<double> p(param_count, 0.0);
    constexpr double kHalfPi = 1.5707963267948966;
    uint32_t base = (layers - 1) * (2 * n - 2);
    for (uint32_t q = 0; q < n; ++q) p[base + q] = kHalfPi;
    return p;
}

std::vector<double> init_params(const AnsatzCircuit& circuit, double sigma, Rng& rng) {
    std::vector<double> p(circuit.param_count);
    for (double& v : p) v = sigma * rng.normal();
    return p;
}

}  // namespace qls
