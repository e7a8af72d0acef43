#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qls/pauli.hpp"
#include "qls/shadow.hpp"
#include "qls/statevector.hpp"

namespace qls {

/// Term tables of the local cost
///
///   C = 1/2 - mu / (2 n omega),
///   mu    = sum_r <x| A^dag W_r A |x>,   W_r = U Z_r U^dag,
///   omega = <x| A^dag A |x>,
///
/// the normalized overlap cost of the linear system A|x> ~ U|0...0> with the
/// ancilla-free local projector: |0><0| on each qubit is expanded as
/// (I + Z)/2, whose identity halves are folded into the constant 1/2 above,
/// so every entry below is a plain Pauli expectation.
///
/// Both lists are built conjugate-pair folded: the (i, j) and (j, i) system
/// index pairs are combined into one entry with coefficient 2 Re(.), so all
/// coefficients are real by construction (stored complex for generality;
/// evaluation asserts the imaginary residue).  W_r is contracted through the
/// Pauli algebra before enumeration, so the stored entry count is far below
/// the four-index product count, which is kept formulaically in raw_*.
struct CostTermTable {
    uint32_t n = 0;
    std::vector<std::pair<cplx, PauliString>> mu_terms;
    std::vector<std::pair<cplx, PauliString>> omega_terms;
    bool preprocessed = false;        ///< merge-and-drop pass has run
    uint64_t distinct_strings = 0;    ///< distinct non-identity words in both
                                      ///  lists = expectations one evaluation
                                      ///  must estimate
    uint64_t raw_mu_terms = 0;        ///< n * L_A^2 * L_U^2 unfolded products
    uint64_t raw_omega_terms = 0;     ///< L_A^2 unfolded products
    uint32_t max_locality = 0;        ///< largest support among stored words
};

/// One cost evaluation.  cost is in [0, 1]; omega > 0 for any admissible
/// system (a finite condition number means A|x> never vanishes).
struct CostValue {
    double cost = 0.0;
    double mu = 0.0;
    double omega = 0.0;
};

/// Builds the folded term tables from the system sum A and the right-hand
/// side preparation sum U (both on the same register; A must be non-empty).
CostTermTable build_terms(const PauliSum& a, const PauliSum& u);

/// Merges entries with equal words within each list, drops merged
/// coefficients below `tol`, and recomputes the table statistics.  The cost
/// function is unchanged; the pass is idempotent.
CostTermTable preprocess(const CostTermTable& t, double tol = kCoeffTol);

/// The distinct non-identity words of both lists, sorted; the observables a
/// shadow evaluation estimates (identity expectations are 1 and free).
std::vector<PauliString> distinct_observables(const CostTermTable& t);

/// Exact evaluation against a normalized state.  Words are grouped by their
/// X mask so one Walsh-Hadamard transform per group yields every Z variant
/// at once; evaluate_exact_serial is the plain per-term reference.
/// Throws when omega falls below 1e-14 (singular system / orthogonal state)
/// or when the cost leaves [0, 1] by more than 1e-9.
CostValue evaluate_exact(const CostTermTable& t, const StateVector& s);
CostValue evaluate_exact_serial(const CostTermTable& t, const StateVector& s);

/// Assembles mu, omega, and the cost from per-observable estimates aligned
/// with `observables` (use distinct_observables(t)).  Estimates are noisy,
/// so the cost is clamped to [0, 1]; omega <= 1e-14 throws an
/// unstable-denominator error (enlarge the shadow and retry).
CostValue assemble_cost(const CostTermTable& t,
                        const std::vector<PauliString>& observables,
                        const std::vector<double>& estimates);

/// Estimates every distinct word once from one shared shadow (median of
/// means over `batches`; 0 picks the default batch count for the table's
/// observable count) and assembles the cost as in assemble_cost.
CostValue evaluate_shadow(const CostTermTable& t, const ClassicalShadow& shadow,
                          uint32_t batches = 0);

/// Optimization termination threshold: eps^2 / (n kappa^2).  A cost below
/// this guarantees trace distance below eps to the true solution.
double termination_gamma(uint32_t n, double kappa, double eps);

}  // namespace qls
