#pragma once

#include <cstdint>
#include <vector>

#include "qls/statevector.hpp"

namespace qls {

enum class GateKind : uint8_t { RX, RY, RZ, CNOT };

/// One gate of an ansatz program.  Rotations read their angle from
/// `slot`; CNOT uses q0 as control and q1 as target.
struct GateOp {
    GateKind kind;
    uint8_t q0 = 0;
    uint8_t q1 = 0;
    int32_t slot = -1;
};

enum class AnsatzFamily : uint8_t { HardwareEfficient, RealAmplitude };

/// A layered variational circuit with a flat parameter vector.
///
/// Hardware-efficient layer: an RX, RY and RZ column (3n angles) followed by
/// a CNOT ring 0->1, 1->2, ..., n-1->0.
///
/// Real-amplitude layer (even n): CNOTs on pairs (0,1),(2,3),... then an RY
/// column on every qubit, then CNOTs on pairs (1,2),(3,4),... then an RY
/// column on qubits 1..n-2; 2n-2 angles per layer and only real amplitudes
/// are ever produced.  With every angle at zero each layer is the identity
/// on |0...0>.
struct AnsatzCircuit {
    uint32_t n = 0;
    uint32_t layers = 0;
    AnsatzFamily family = AnsatzFamily::HardwareEfficient;
    std::vector<GateOp> program;
    uint32_t param_count = 0;

    static AnsatzCircuit hardware_efficient(uint32_t n, uint32_t layers);
    static AnsatzCircuit real_amplitude(uint32_t n, uint32_t layers);

    /// Applies the circuit to `s`, acting on qubits offset..offset+n-1.
    void apply(StateVector& s, const std::vector<double>& params,
               uint32_t offset = 0) const;

    /// V(params)|0...0> on a fresh register.
    StateVector prepare(const std::vector<double>& params) const;

    /// Parameters preparing the uniform superposition |+...+>: all zero
    /// except the last full rotation column at pi/2.  Every CNOT before that
    /// column sees |0...0> and every one after sees |+...+>, and both are
    /// fixed points, so the preparation is exact.  Real-amplitude family
    /// only (the hardware-efficient ring entangles the plus state).
    std::vector<double> plus_state_params() const;
};

/// Gaussian start parameters (mean 0, standard deviation sigma).
std::vector<double> init_params(const AnsatzCircuit& circuit, double sigma, Rng& rng);

}  // namespace qls
