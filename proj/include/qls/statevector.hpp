#pragma once

#include <cstdint>
#include <vector>

#include "qls/pauli.hpp"
#include "qls/rng.hpp"

namespace qls {

/// Dense amplitude vector over n qubits (n <= 26 to keep memory sane).
/// Index bit layout matches PauliString: qubit q lives at bit n-1-q, so
/// qubit 0 is the most significant bit of a basis-state index.
struct StateVector {
    uint32_t n = 0;
    std::vector<cplx> amps;

    StateVector() = default;
    explicit StateVector(uint32_t n);

    static StateVector zero_state(uint32_t n);
    /// Builds a state from exactly 2^n explicit amplitudes, as given — the
    /// caller normalises when a unit vector is required.
    static StateVector from_amplitudes(uint32_t n, std::vector<cplx> amps);

    uint64_t dim() const { return uint64_t(1) << n; }
    uint64_t qubit_bit(uint32_t q) const { return uint64_t(1) << (n - 1 - q); }

    double norm() const;
    void normalize();
};

/// <a|b>.
cplx inner(const StateVector& a, const StateVector& b);

// --- gate kernels (all in place) ---

/// Arbitrary single-qubit unitary u = [[u00, u01], [u10, u11]].
void apply_1q(StateVector& s, uint32_t qubit, const cplx u[4]);

void apply_h(StateVector& s, uint32_t qubit);
void apply_s(StateVector& s, uint32_t qubit);
void apply_sdg(StateVector& s, uint32_t qubit);
/// Rotation exp(-i theta P / 2) for the single-qubit letters.
void apply_rx(StateVector& s, uint32_t qubit, double theta);
void apply_ry(StateVector& s, uint32_t qubit, double theta);
void apply_rz(StateVector& s, uint32_t qubit, double theta);
void apply_cnot(StateVector& s, uint32_t control, uint32_t target);

/// Multiplies by a Pauli word (must match the register width).
void apply_pauli(StateVector& s, const PauliString& p);

/// Controlled phase * word: applies `phase * p` (phase in {1,i,-1,-i}) to the
/// branch where `control` is |1>.  The word must act as identity on `control`.
/// `p.n` equals the register width; embed the word before calling.
void apply_controlled_pauli(StateVector& s, uint32_t control, cplx phase,
                            const PauliString& p);

/// Dense matrix application (register width <= 12).
void apply_matrix(StateVector& s, const Dense& m);

// --- measurements ---

/// <s|P|s>; exactly real for any Pauli word.
double expectation(const StateVector& s, const PauliString& p);
/// Serial reference for the OpenMP expectation kernel.
double expectation_serial(const StateVector& s, const PauliString& p);
/// <s|A|s> for a weighted sum (complex when coefficients are complex).
cplx expectation(const StateVector& s, const PauliSum& a);

/// Probability of measuring `outcome` (basis index).
double probability(const StateVector& s, uint64_t outcome);

/// One computational-basis sample from |amps|^2; O(2^n) CDF walk.
uint64_t sample(const StateVector& s, Rng& rng);

/// Reusable sampler: builds the CDF once, then draws in O(log dim).
class Sampler {
public:
    explicit Sampler(const StateVector& s);
    uint64_t draw(Rng& rng) const;

private:
    std::vector<double> cdf_;
};

}  // namespace qls
