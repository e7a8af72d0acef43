#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "qls/pauli.hpp"
#include "qls/rng.hpp"
#include "qls/statevector.hpp"

namespace qls {

/// A linear-system instance A|x> ~ |b>, bundled with everything the solver
/// and the reporting need: the Pauli form of A, the preparation sum U with
/// |b> = U|0...0>, the dense-solved normalized solution, and the condition
/// number from a dense SVD.  Invariants enforced at build time:
/// spectral norm of A at most 1, U unitary, b == dense(U)|0>.
struct LinearProblem {
    uint32_t n = 0;
    PauliSum a;
    PauliSum u;
    StateVector b;
    StateVector exact_solution;
    double kappa = 0.0;
    std::string label;
    std::map<std::string, double> metadata;  ///< raw scales, tuning values, seeds
};

/// Four-unitary additive decomposition of a contraction m (spectral norm
/// <= 1): with B = (m + m^dag)/2, C = (m - m^dag)/(2i),
///   u_b = B + i sqrt(I - B^2),  v_b = B - i sqrt(I - B^2),
/// likewise u_c, v_c from C, and
///   m == (u_b + v_b)/2 + i (u_c + v_c)/2.
/// For (real or complex) symmetric m the conjugate relations v_b ==
/// conj(u_b), v_c == conj(u_c) hold as well.
struct UnitarySplit {
    Dense u_b, v_b, u_c, v_c;
};

/// H on the trailing `tail` qubits and identity elsewhere, as a Pauli sum
/// of 2^tail words with coefficient (1/sqrt 2)^tail each.
PauliSum hadamard_tail_sum(uint32_t n, uint32_t tail);

/// The four-qubit transverse-field Ising chain benchmark:
/// A = 0.0123 (ZZII - IZZI - IIZZ) + 0.123 (XIII + IXII + IIXI + IIIX)
///     + 0.508 IIII, U = H^x4; condition number ~ 60.
LinearProblem ising_problem();

/// The generic Ising-chain family (uniform signs):
/// A = (sum_j X_j + J sum_j Z_j Z_{j+1} + eta I) / zeta, U = H^xn.
LinearProblem ising_family(uint32_t n, double j, double eta, double zeta);

/// Pinned four-qubit random-system fixtures (2-local terms, H^x4
/// preparation), with their verbatim coefficients.
LinearProblem random_fixture_1();
LinearProblem random_fixture_2();

/// Fresh random instance: `l` distinct uniformly drawn exactly-k-local
/// words with coefficients uniform in [-1, 1], shifted by eta I and scaled
/// by zeta (found by tune_kappa) so the condition number hits
/// `kappa_target` and the spectral norm is 1.  U = H^xn.
LinearProblem random_problem(uint32_t n, uint32_t l, uint32_t k, double kappa_target,
                             Rng& rng);

/// 16x16 pentadiagonal Toeplitz system (diagonal 0.22941573, off-diagonal
/// -0.05735393 at |i-j| in {1, 4}), right-hand side 0.5 on the first four
/// entries; U = I^x2 (x) H^x2.
LinearProblem potential_grid_4x4();

/// Square-grid Dirichlet boundary-value system on side^2 points
/// (side in {4, 16}): pentadiagonal Toeplitz with the 4 / -1 stencil
/// scaled to a fixed normalization (side 16: diagonal 0.0562544,
/// off-diagonal -0.0140636; side 4: the potential-grid constants), boundary
/// value V0 = 0.25 * spectral norm of A on the first `side` entries, and
/// U = I^x(n/2) (x) H^x(n/2).  The Pauli form of A is assembled through
/// the four-unitary split at side 16.
LinearProblem laplace_grid(uint32_t side);

/// Four-unitary split of a contraction; throws if the spectral norm
/// exceeds 1 (beyond rounding).  sqrt eigenvalues are clamped at zero.
UnitarySplit unitary_split(const Dense& m);

/// sigma_max / sigma_min from a dense SVD; throws on singular input.
double condition_number(const Dense& m);

/// Finds (eta, zeta) such that (base + eta I)/zeta has condition number
/// `target` (within bisection precision) and spectral norm exactly 1.
/// `base` must be Hermitian; target must exceed 1 and be reachable.
std::pair<double, double> tune_kappa(const PauliSum& base, double target);

}  // namespace qls
