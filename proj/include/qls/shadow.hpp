#pragma once

#include <cstdint>
#include <vector>

#include "qls/pauli.hpp"
#include "qls/rng.hpp"
#include "qls/statevector.hpp"

namespace qls {

/// One random-Pauli-basis measurement record, bit-packed per qubit:
/// a 2-bit basis field (0 = X, 1 = Y, 2 = Z) and one outcome bit.
/// Qubit q owns basis bits 2q..2q+1 of `bases` and outcome bit q.
struct Snapshot {
    uint64_t bases = 0;
    uint32_t outcomes = 0;

    uint32_t basis(uint32_t q) const { return uint32_t(bases >> (2 * q)) & 3u; }
    uint32_t outcome(uint32_t q) const { return (outcomes >> q) & 1u; }
};

/// A stack of snapshots taken from one prepared state.
struct ClassicalShadow {
    uint32_t n = 0;
    std::vector<Snapshot> snapshots;
};

/// Measurement budget needed to estimate `m_observables` Pauli words of
/// locality <= `k` to additive error `eps`:
///   ceil(constant * log2(max(m, 2)) * 3^k / eps^2).
uint64_t shadow_size(uint64_t m_observables, uint32_t k, double eps,
                     double constant = 1.0);

/// Median-of-means batch count used by the estimators by default:
/// max(1, floor(2 * log2(2 * m_observables))).
uint32_t default_batches(uint64_t m_observables);

/// Draws `count` snapshots from `state`.  Each snapshot i uses its own
/// stream key.derive(i): a uniform basis letter per qubit, the basis
/// rotation (X: H, Y: S-dagger then H, Z: none), then one computational
/// sample.  Parallel over snapshots; output identical to collect_serial.
ClassicalShadow collect(const StateVector& state, uint64_t count, const Rng& key);
ClassicalShadow collect_serial(const StateVector& state, uint64_t count, const Rng& key);

/// Single-snapshot estimator of a word: 0 on any basis mismatch inside the
/// support, otherwise prod over the support of 3 * (+1 for outcome 0, -1
/// for outcome 1); always one of 0, +-3^locality.
double snapshot_estimate(const Snapshot& snap, const PauliString& p);

/// Median-of-means estimate of <P>: snapshots are split in order into
/// `batches` nearly equal chunks (the first N mod B chunks get one extra),
/// chunk means are medianed, and the result is clamped to [-1, 1].
/// batches = 1 degenerates to the plain mean.
double estimate_pauli(const ClassicalShadow& shadow, const PauliString& p,
                      uint32_t batches = 1);

/// Dense inverse-channel state reconstruction (n <= 6):
/// the average over snapshots of tensor_q (3 U_q^dag |o_q><o_q| U_q - I).
Dense reconstruct_density(const ClassicalShadow& shadow);

/// Per-batch (basis-combination x outcome) count tables: the sufficient
/// statistic of a shadow.  counts[combo * batches + b] is the number of
/// batch-b snapshots that drew basis combination `combo` (a base-3 word,
/// qubit 0 most significant) and, nested inside estimate_paulis_binned,
/// each such cell carries a full outcome histogram.
struct BinnedLayout {
    uint32_t n = 0;
    uint64_t combos = 0;           // 3^n
    std::vector<uint64_t> batch_sizes;
};

BinnedLayout binned_layout(uint32_t n, uint64_t budget, uint32_t batches);

/// Large-budget estimator with the exact same sampling distribution as
/// collect + estimate_pauli: per batch, the snapshot count of every basis
/// combination is multinomial-uniform, and each cell's outcome histogram is
/// multinomial over the rotated Born distribution.  Estimates for all
/// `observables` are folded out of the histograms with a Walsh-Hadamard
/// transform, then median-of-means'd and clamped exactly like the
/// snapshot path.  Runtime scales with 3^n * batches * 2^n, independent of
/// the budget.  Requires n <= 10.
std::vector<double> estimate_paulis_binned(const StateVector& state,
                                           const std::vector<PauliString>& observables,
                                           uint64_t budget, uint32_t batches,
                                           const Rng& key);

/// Deterministic reduction used by estimate_paulis_binned once counts exist.
/// outcome_counts[(combo * batches + b) * dim + v] may be huge; this entry
/// point exists so tests can drive the reduction with hand-built tables.
std::vector<double> estimate_paulis_from_counts(
    uint32_t n, const std::vector<PauliString>& observables,
    const std::vector<uint32_t>& outcome_counts, const std::vector<uint64_t>& batch_sizes);

}  // namespace qls
