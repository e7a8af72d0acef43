#include "qls/shadow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qls {

namespace {

constexpr uint32_t kBasisX = 0, kBasisY = 1, kBasisZ = 2;
constexpr uint64_t kStreamSnapshots = 0x5348u;   // snapshot draw phase
constexpr uint64_t kStreamBatchSplit = 0x4253u;  // binned phase A
constexpr uint64_t kStreamOutcomes = 0x4f43u;    // binned phase B

double pow3(uint32_t w) {
    double v = 1.0;
    while (w--) v *= 3.0;
    return v;
}

/// Basis letter of a word on qubit q (word must be non-identity there).
uint32_t letter_code(const PauliString& p, uint32_t q) {
    char c = p.letter(q);
    return c == 'X' ? kBasisX : c == 'Y' ? kBasisY : kBasisZ;
}

std::vector<uint64_t> split_batches(uint64_t total, uint32_t batches) {
    if (batches == 0) throw std::invalid_argument("shadow: batch count must be positive");
    std::vector<uint64_t> sizes(batches, total / batches);
    for (uint32_t b = 0; b < total % batches; ++b) ++sizes[b];
    return sizes;
}

double median_clamped(std::vector<double>& means) {
    std::sort(means.begin(), means.end());
    std::size_t m = means.size();
    double med = (m % 2 == 1) ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
    return std::clamp(med, -1.0, 1.0);
}

void rotate_into_basis(StateVector& s, uint32_t q, uint32_t basis) {
    if (basis == kBasisX) {
        apply_h(s, q);
    } else if (basis == kBasisY) {
        apply_sdg(s, q);
        apply_h(s, q);
    }
}

Snapshot draw_snapshot(const StateVector& state, Rng rng) {
    Snapshot snap;
    StateVector rotated = state;
    for (uint32_t q = 0; q < state.n; ++q) {
        uint32_t basis = uint32_t(rng.below(3));
        snap.bases |= uint64_t(basis) << (2 * q);
        rotate_into_basis(rotated, q, basis);
    }
    uint64_t v = sample(rotated, rng);
    for (uint32_t q = 0; q < state.n; ++q)
        snap.outcomes |= uint32_t((v >> (state.n - 1 - q)) & 1u) << q;
    return snap;
}

ClassicalShadow collect_impl(const StateVector& state, uint64_t count, const Rng& key,
                             bool parallel) {
    if (state.n > 26) throw std::invalid_argument("collect: register too wide");
    ClassicalShadow shadow;
    shadow.n = state.n;
    shadow.snapshots.resize(count);
    Rng base = key.derive(kStreamSnapshots);
    if (parallel) {
#pragma omp parallel for schedule(static, 1024)
        for (int64_t i = 0; i < int64_t(count); ++i)
            shadow.snapshots[std::size_t(i)] = draw_snapshot(state, base.derive(uint64_t(i)));
    } else {
        for (uint64_t i = 0; i < count; ++i)
            shadow.snapshots[std::size_t(i)] = draw_snapshot(state, base.derive(i));
    }
    return shadow;
}

}  // namespace

uint64_t shadow_size(uint64_t m_observables, uint32_t k, double eps, double constant) {
    if (!(eps > 0.0)) throw std::invalid_argument("shadow_size: eps must be positive");
    if (!(constant > 0.0)) throw std::invalid_argument("shadow_size: constant must be positive");
    if (k > 20) throw std::invalid_argument("shadow_size: locality too large");
    double m = double(std::max<uint64_t>(m_observables, 2));
    double v = std::ceil(constant * std::log2(m) * pow3(k) / (eps * eps));
    if (!(v < 9.0e18)) throw std::domain_error("shadow_size: budget overflows");
    return uint64_t(v);
}

uint32_t default_batches(uint64_t m_observables) {
    double b = std::floor(2.0 * std::log2(2.0 * double(std::max<uint64_t>(m_observables, 1))));
    return b < 1.0 ? 1u : uint32_t(b);
}

ClassicalShadow collect(const StateVector& state, uint64_t count, const Rng& key) {
    return collect_impl(state, count, key, true);
}

ClassicalShadow collect_serial(const StateVector& state, uint64_t count, const Rng& key) {
    return collect_impl(state, count, key, false);
}

double snapshot_estimate(const Snapshot& snap, const PauliString& p) {
    uint64_t want = 0, care = 0;
    uint32_t suppbits = 0;
    for (uint32_t q = 0; q < p.n; ++q) {
        if (p.letter(q) == 'I') continue;
        want |= uint64_t(letter_code(p, q)) << (2 * q);
        care |= uint64_t(3) << (2 * q);
        suppbits |= 1u << q;
    }
    if ((snap.bases ^ want) & care) return 0.0;
    double v = pow3(p.locality());
    return (std::popcount(snap.outcomes & suppbits) & 1u) ? -v : v;
}

double estimate_pauli(const ClassicalShadow& shadow, const PauliString& p,
                      uint32_t batches) {
    if (p.n != shadow.n) throw std::invalid_argument("estimate_pauli: width mismatch");
    const uint64_t count = shadow.snapshots.size();
    if (count == 0 || batches > count)
        throw std::invalid_argument("estimate_pauli: need at least one snapshot per batch");

    // Precompute the mask form of the word once (snapshot_estimate's logic).
    uint64_t want = 0, care = 0;
    uint32_t suppbits = 0;
    for (uint32_t q = 0; q < p.n; ++q) {
        if (p.letter(q) == 'I') continue;
        want |= uint64_t(letter_code(p, q)) << (2 * q);
        care |= uint64_t(3) << (2 * q);
        suppbits |= 1u << q;
    }
    const double factor = pow3(p.locality());

    std::vector<uint64_t> sizes = split_batches(count, batches);
    std::vector<double> means(batches);
    uint64_t at = 0;
    for (uint32_t b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (uint64_t i = 0; i < sizes[b]; ++i) {
            const Snapshot& snap = shadow.snapshots[std::size_t(at + i)];
            if ((snap.bases ^ want) & care) continue;
            acc += (std::popcount(snap.outcomes & suppbits) & 1u) ? -factor : factor;
        }
        means[b] = acc / double(sizes[b]);
        at += sizes[b];
    }
    return median_clamped(means);
}

Dense reconstruct_density(const ClassicalShadow& shadow) {
    if (shadow.n > 6) throw std::invalid_argument("reconstruct_density: n <= 6 only");
    if (shadow.snapshots.empty())
        throw std::invalid_argument("reconstruct_density: empty shadow");
    const uint64_t dim = uint64_t(1) << shadow.n;

    // 3 U^dag |o><o| U - I for each (basis, outcome).
    Dense inv[3][2];
    const cplx h = 0.5, ih = cplx(0, 0.5);
    for (int o = 0; o < 2; ++o) {
        double s = o ? -1.0 : 1.0;
        Dense m(2, 2);
        m << h, s * h, s * h, h;  // |+><+| or |-><-|
        inv[kBasisX][o] = 3.0 * m - Dense::Identity(2, 2);
        Dense my(2, 2);
        my << h, s * -ih, s * ih, h;  // |+i><+i| or |-i><-i|
        inv[kBasisY][o] = 3.0 * my - Dense::Identity(2, 2);
        Dense mz = Dense::Zero(2, 2);
        mz(o, o) = 1.0;
        inv[kBasisZ][o] = 3.0 * mz - Dense::Identity(2, 2);
    }

    Dense acc = Dense::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (const Snapshot& snap : shadow.snapshots) {
        Dense rho = Dense::Identity(1, 1);
        for (uint32_t q = 0; q < shadow.n; ++q) {
            const Dense& f = inv[snap.basis(q)][snap.outcome(q)];
            Dense next(rho.rows() * 2, rho.cols() * 2);
            for (Eigen::Index r = 0; r < rho.rows(); ++r)
                for (Eigen::Index c = 0; c < rho.cols(); ++c)
                    next.block(2 * r, 2 * c, 2, 2) = rho(r, c) * f;
            rho = std::move(next);
        }
        acc += rho;
    }
    return acc / double(shadow.snapshots.size());
}

BinnedLayout binned_layout(uint32_t n, uint64_t budget, uint32_t batches) {
    if (n == 0 || n > 10) throw std::invalid_argument("binned shadow: width must be in [1, 10]");
    if (budget == 0) throw std::invalid_argument("binned shadow: empty budget");
    if (batches == 0 || batches > budget)
        throw std::invalid_argument("binned shadow: need at least one snapshot per batch");
    BinnedLayout layout;
    layout.n = n;
    layout.combos = 1;
    for (uint32_t q = 0; q < n; ++q) layout.combos *= 3;
    layout.batch_sizes = split_batches(budget, batches);
    return layout;
}

namespace {

/// In-place Walsh-Hadamard transform: a[mask] <- sum_v a[v] (-1)^pc(v&mask).
void wht_inplace(double* a, uint64_t dim) {
    for (uint64_t h = 1; h < dim; h <<= 1)
        for (uint64_t base = 0; base < dim; base += h << 1)
            for (uint64_t i = base; i < base + h; ++i) {
                double u = a[i], v = a[i + h];
                a[i] = u + v;
                a[i + h] = u - v;
            }
}

struct ComboRef {
    uint32_t obs;
    uint32_t mask;
    float weight;  // 3^locality fits exactly for locality <= 10
};

/// CSR adjacency: for each basis combination, the observables it can serve.
struct ComboIndex {
    std::vector<uint64_t> offsets;  // combos + 1
    std::vector<ComboRef> refs;
};

ComboIndex build_combo_index(uint32_t n, uint64_t combos,
                             const std::vector<PauliString>& observables) {
    std::vector<uint64_t> pow3n(n + 1);
    pow3n[0] = 1;
    for (uint32_t q = 1; q <= n; ++q) pow3n[q] = pow3n[q - 1] * 3;

    std::vector<std::pair<uint64_t, ComboRef>> pairs;
    for (uint32_t o = 0; o < observables.size(); ++o) {
        const PauliString& p = observables[o];
        if (p.n != n) throw std::invalid_argument("binned shadow: width mismatch");
        std::vector<uint32_t> free_qubits;
        uint64_t base_combo = 0;
        for (uint32_t q = 0; q < n; ++q) {
            if (p.letter(q) == 'I')
                free_qubits.push_back(q);
            else
                base_combo += uint64_t(letter_code(p, q)) * pow3n[n - 1 - q];
        }
        ComboRef ref{o, uint32_t(p.support()), float(pow3(p.locality()))};
        uint64_t variants = pow3n[free_qubits.size()];
        for (uint64_t v = 0; v < variants; ++v) {
            uint64_t combo = base_combo, rest = v;
            for (uint32_t q : free_qubits) {
                combo += (rest % 3) * pow3n[n - 1 - q];
                rest /= 3;
            }
            pairs.emplace_back(combo, ref);
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) {
                  return a.first != b.first ? a.first < b.first : a.second.obs < b.second.obs;
              });

    ComboIndex index;
    index.offsets.assign(combos + 1, 0);
    index.refs.reserve(pairs.size());
    for (const auto& [combo, ref] : pairs) {
        ++index.offsets[combo + 1];
        index.refs.push_back(ref);
    }
    for (uint64_t c = 0; c < combos; ++c) index.offsets[c + 1] += index.offsets[c];
    return index;
}

/// Born probabilities of `state` rotated into basis combination `combo`.
void combo_probabilities(const StateVector& state, uint64_t combo, double* probs) {
    StateVector rotated = state;
    uint64_t rest = combo;
    // combo digits: qubit 0 is the most significant base-3 digit.
    std::vector<uint32_t> letters(state.n);
    for (uint32_t q = state.n; q-- > 0;) {
        letters[q] = uint32_t(rest % 3);
        rest /= 3;
    }
    for (uint32_t q = 0; q < state.n; ++q) rotate_into_basis(rotated, q, letters[q]);
    for (uint64_t v = 0; v < rotated.dim(); ++v) probs[v] = std::norm(rotated.amps[v]);
}

}  // namespace

std::vector<double> estimate_paulis_binned(const StateVector& state,
                                           const std::vector<PauliString>& observables,
                                           uint64_t budget, uint32_t batches,
                                           const Rng& key) {
    const BinnedLayout layout = binned_layout(state.n, budget, batches);
    const uint64_t combos = layout.combos;
    const uint64_t dim = state.dim();
    const uint32_t nb = batches;

    // Phase A: how many snapshots of each batch land on each basis combination.
    std::vector<uint32_t> cell_counts(combos * nb);  // [combo * nb + b]
    {
        std::vector<double> ones(combos, 1.0);
        std::vector<uint32_t> row(combos);
        Rng split_key = key.derive(kStreamBatchSplit);
        for (uint32_t b = 0; b < nb; ++b) {
            split_key.derive(b).multinomial(layout.batch_sizes[b], ones.data(), combos,
                                            row.data());
            for (uint64_t c = 0; c < combos; ++c) cell_counts[c * nb + b] = row[c];
        }
    }

    const ComboIndex index = build_combo_index(state.n, combos, observables);
    std::vector<double> batch_acc(observables.size() * nb, 0.0);

    // Phase B: per combo, sample outcome histograms, transform, accumulate.
    // Blocks keep the accumulation order fixed so results do not depend on
    // the worker count.
    const uint64_t block = 64;
    std::vector<double> slab(block * nb * dim);
    Rng outcome_key = key.derive(kStreamOutcomes);
    std::vector<uint32_t> hist(dim);
    std::vector<double> probs(dim);

    for (uint64_t c0 = 0; c0 < combos; c0 += block) {
        const uint64_t cend = std::min(combos, c0 + block);
#pragma omp parallel for schedule(dynamic, 1) firstprivate(hist, probs)
        for (int64_t ci = int64_t(c0); ci < int64_t(cend); ++ci) {
            const uint64_t c = uint64_t(ci);
            double* rows = slab.data() + (c - c0) * nb * dim;
            uint64_t total = 0;
            for (uint32_t b = 0; b < nb; ++b) total += cell_counts[c * nb + b];
            if (total == 0 || index.offsets[c] == index.offsets[c + 1]) {
                std::fill(rows, rows + nb * dim, 0.0);
                continue;
            }
            combo_probabilities(state, c, probs.data());
            for (uint32_t b = 0; b < nb; ++b) {
                double* row = rows + uint64_t(b) * dim;
                uint32_t m = cell_counts[c * nb + b];
                if (m == 0) {
                    std::fill(row, row + dim, 0.0);
                    continue;
                }
                outcome_key.derive(c).derive(b).multinomial(m, probs.data(), dim,
                                                            hist.data());
                for (uint64_t v = 0; v < dim; ++v) row[v] = double(hist[v]);
                wht_inplace(row, dim);
            }
        }
        for (uint64_t c = c0; c < cend; ++c) {
            uint64_t total = 0;
            for (uint32_t b = 0; b < nb; ++b) total += cell_counts[c * nb + b];
            if (total == 0) continue;
            const double* rows = slab.data() + (c - c0) * nb * dim;
            for (uint64_t r = index.offsets[c]; r < index.offsets[c + 1]; ++r) {
                const ComboRef& ref = index.refs[r];
                double* acc = batch_acc.data() + uint64_t(ref.obs) * nb;
                for (uint32_t b = 0; b < nb; ++b)
                    acc[b] += double(ref.weight) * rows[uint64_t(b) * dim + ref.mask];
            }
        }
    }

    std::vector<double> out(observables.size());
    std::vector<double> means(nb);
    for (std::size_t o = 0; o < observables.size(); ++o) {
        for (uint32_t b = 0; b < nb; ++b)
            means[b] = batch_acc[o * nb + b] / double(layout.batch_sizes[b]);
        std::vector<double> tmp = means;
        out[o] = median_clamped(tmp);
    }
    return out;
}

std::vector<double> estimate_paulis_from_counts(
    uint32_t n, const std::vector<PauliString>& observables,
    const std::vector<uint32_t>& outcome_counts,
    const std::vector<uint64_t>& batch_sizes) {
    BinnedLayout layout = binned_layout(n, 1, 1);  // just for combos; sizes replaced
    const uint64_t combos = layout.combos;
    const uint64_t dim = uint64_t(1) << n;
    const uint32_t nb = uint32_t(batch_sizes.size());
    if (outcome_counts.size() != combos * nb * dim)
        throw std::invalid_argument("estimate_paulis_from_counts: table size mismatch");

    const ComboIndex index = build_combo_index(n, combos, observables);
    std::vector<double> batch_acc(observables.size() * nb, 0.0);
    std::vector<double> row(dim);
    for (uint64_t c = 0; c < combos; ++c) {
        if (index.offsets[c] == index.offsets[c + 1]) continue;
        for (uint32_t b = 0; b < nb; ++b) {
            const uint32_t* src = outcome_counts.data() + (c * nb + b) * dim;
            bool any = false;
            for (uint64_t v = 0; v < dim; ++v) {
                row[v] = double(src[v]);
                any |= src[v] != 0;
            }
            if (!any) continue;
            wht_inplace(row.data(), dim);
            for (uint64_t r = index.offsets[c]; r < index.offsets[c + 1]; ++r) {
                const ComboRef& ref = index.refs[r];
                batch_acc[uint64_t(ref.obs) * nb + b] +=
                    double(ref.weight) * row[ref.mask];
            }
        }
    }

    std::vector<double> out(observables.size());
    std::vector<double> means(nb);
    for (std::size_t o = 0; o < observables.size(); ++o) {
        for (uint32_t b = 0; b < nb; ++b)
            means[b] = batch_acc[o * nb + b] / double(batch_sizes[b]);
        std::vector<double> tmp = means;
        out[o] = median_clamped(tmp);
    }
    return out;
}

}  // namespace qls
