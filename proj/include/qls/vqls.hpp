#pragma once

#include <cstdint>
#include <vector>

#include "qls/ansatz.hpp"
#include "qls/cost.hpp"
#include "qls/pauli.hpp"
#include "qls/rng.hpp"

namespace qls {

/// Which part of a complex overlap a Hadamard-test run estimates.
enum class HadamardPart { Real, Imag };

/// Ancilla-based Hadamard-test estimate of Re or Im <x| A_j^dag A_i |x>
/// for Pauli words A_i, A_j, where |x> is the ansatz state.  Simulates the
/// (n+1)-qubit circuit exactly — ancilla in |+> (Real) or S^dag|+> (Imag),
/// controlled-A_i then controlled-A_j^dag, H on the ancilla — then samples
/// the ancilla `shots` times and returns 2 P(0) - 1.
double hadamard_beta(const AnsatzCircuit& circuit, const std::vector<double>& params,
                     const PauliString& a_i, const PauliString& a_j, uint64_t shots,
                     const Rng& key, HadamardPart part);

/// Same protocol for the five-factor overlap
/// <x| A_j^dag U_p Z_r U_l^dag A_i |x> (controlled ops applied in the order
/// A_i, U_l^dag, Z_r, U_p, A_j^dag).
double hadamard_delta(const AnsatzCircuit& circuit, const std::vector<double>& params,
                      const PauliString& a_i, const PauliString& a_j,
                      const PauliString& u_l, const PauliString& u_p, uint32_t r,
                      uint64_t shots, const Rng& key, HadamardPart part);

/// One full Hadamard-test cost evaluation.  jobs_executed counts the test
/// runs actually simulated after the symmetry reductions (diagonal
/// normalization shortcut, conjugate-pair halving, imaginary parts skipped
/// when the combined coefficient is real); jobs_modeled is the idealized
/// per-step count (L(L-1) + n L^2) / 2 the resource model uses, which
/// assumes the single-decomposition system shape.
struct VqlsEvaluation {
    CostValue value;
    uint64_t jobs_executed = 0;
    uint64_t jobs_modeled = 0;
};

/// Evaluates the local cost entirely through Hadamard-test estimates with
/// `shots` ancilla samples per job.  `paranoid` re-enables the imaginary-
/// part jobs that symmetry proves unnecessary (their estimates still enter
/// the assembly, validating the cancellation).
VqlsEvaluation evaluate_cost_vqls(const PauliSum& a, const PauliSum& u,
                                  const AnsatzCircuit& circuit,
                                  const std::vector<double>& params, uint64_t shots,
                                  const Rng& key, bool paranoid = false);

/// Hadamard-test circuits per optimization step: ceil(shots/2 (L(L-1) + n L^2)).
uint64_t circuits_per_step_vqls(uint64_t l, uint64_t n, uint64_t shots);

/// Shadow circuits per optimization step at the worst-case product locality
/// 2k+1: ceil(log2(L(L-1) + n L^2) * 3^(2k+1) / eps^2).
uint64_t circuits_per_step_sqls(uint64_t l, uint64_t n, uint32_t k, double eps);

/// Per-step counts after the contraction pass, in terms of the retained
/// distinct-string count: Hadamard mode runs one job per string.
uint64_t circuits_per_step_hadamard_preprocessed(uint64_t distinct_strings,
                                                 uint64_t shots);

/// Shadow mode sizes one shadow for the retained strings at worst-case
/// locality 2k+1.
uint64_t circuits_per_step_shadow_preprocessed(uint64_t distinct_strings, uint32_t k,
                                               double eps);

}  // namespace qls
