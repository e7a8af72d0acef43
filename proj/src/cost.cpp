#include "qls/cost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace qls {

namespace {

constexpr double kHermitianTol = 1e-9;

/// Key for grouping words; packs both masks (n <= 32).
uint64_t word_key(const PauliString& p) { return (uint64_t(p.z) << 32) | p.x; }

void refresh_stats(CostTermTable& t) {
    std::unordered_set<uint64_t> seen;
    t.max_locality = 0;
    for (const auto* list : {&t.mu_terms, &t.omega_terms})
        for (const auto& [c, p] : *list) {
            if (p.is_identity()) continue;
            seen.insert(word_key(p));
            t.max_locality = std::max(t.max_locality, p.locality());
        }
    t.distinct_strings = seen.size();
}

/// Folds the (i, j) x term*term product structure of sum^dag * middle * sum
/// into real-coefficient entries: the (j, i) entry is the conjugate of the
/// (i, j) one, so i < j pairs carry 2 Re(.) and the diagonal is real.
void emit_folded(const PauliSum& sum, cplx middle_coeff, const PauliString& middle,
                 std::vector<std::pair<cplx, PauliString>>& out) {
    const std::size_t l = sum.terms.size();
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = i; j < l; ++j) {
            const auto& [ci, si] = sum.terms[i];
            const auto& [cj, sj] = sum.terms[j];
            // sj^dag * middle * si; Hermitian-stored words are self-adjoint.
            PauliProduct left = multiply(sj, middle);
            PauliProduct full = multiply(left.string, si);
            cplx coeff = ci * std::conj(cj) * middle_coeff * left.phase * full.phase;
            double folded = (i == j) ? coeff.real() : 2.0 * coeff.real();
            if (i == j && std::abs(coeff.imag()) > kHermitianTol * (1.0 + std::abs(coeff)))
                throw std::logic_error("cost: diagonal term came out complex");
            if (folded != 0.0) out.emplace_back(cplx(folded, 0.0), full.string);
        }
}

struct CostAccum {
    cplx mu{0.0, 0.0};
    cplx omega{0.0, 0.0};
};

CostValue finish(const CostAccum& acc, uint32_t n, bool exact) {
    double scale = 1.0 + std::abs(acc.mu) + std::abs(acc.omega);
    if (std::abs(acc.mu.imag()) > kHermitianTol * scale ||
        std::abs(acc.omega.imag()) > kHermitianTol * scale)
        throw std::logic_error("cost: non-Hermitian term table (imaginary mu/omega)");
    CostValue v;
    v.mu = acc.mu.real();
    v.omega = acc.omega.real();
    if (v.omega <= 1e-14)
        throw std::runtime_error(exact ? "cost: singular system (omega ~ 0)"
                                       : "cost: unstable denominator (omega estimate ~ 0); "
                                         "enlarge the shadow");
    double cost = 0.5 - v.mu / (2.0 * double(n) * v.omega);
    if (exact && (cost < -kHermitianTol || cost > 1.0 + kHermitianTol))
        throw std::logic_error("cost: exact value left [0, 1]");
    v.cost = std::clamp(cost, 0.0, 1.0);
    return v;
}

void wht_inplace_cplx(cplx* a, uint64_t dim) {
    for (uint64_t h = 1; h < dim; h <<= 1)
        for (uint64_t base = 0; base < dim; base += h << 1)
            for (uint64_t i = base; i < base + h; ++i) {
                cplx u = a[i], v = a[i + h];
                a[i] = u + v;
                a[i + h] = u - v;
            }
}

/// Per-state evaluation cache: for every X mask in the table, the
/// Walsh-Hadamard transform over Z of t_c = conj(a[c^x]) a[c], so
/// <word(x, z)> = lead(x, z) * transform[x][z].
class GroupedExpectations {
public:
    GroupedExpectations(const CostTermTable& t, const StateVector& s) {
        std::vector<uint64_t> masks;
        for (const auto* list : {&t.mu_terms, &t.omega_terms})
            for (const auto& [c, p] : *list) masks.push_back(p.x);
        std::sort(masks.begin(), masks.end());
        masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
        const uint64_t dim = s.dim();
        for (uint64_t x : masks) {
            std::vector<cplx> t_vec(dim);
            for (uint64_t c = 0; c < dim; ++c)
                t_vec[c] = std::conj(s.amps[c ^ x]) * s.amps[c];
            wht_inplace_cplx(t_vec.data(), dim);
            groups_.emplace(x, std::move(t_vec));
        }
    }

    cplx value(const PauliString& p) const {
        static constexpr cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const auto& t_vec = groups_.at(p.x);
        cplx lead = kPhase[std::popcount(uint64_t(p.x) & p.z) & 3];
        return lead * t_vec[p.z];
    }

private:
    std::unordered_map<uint64_t, std::vector<cplx>> groups_;
};

}  // namespace

CostTermTable build_terms(const PauliSum& a, const PauliSum& u) {
    if (a.terms.empty()) throw std::invalid_argument("build_terms: empty system sum");
    if (a.n != u.n) throw std::invalid_argument("build_terms: register width mismatch");
    CostTermTable t;
    t.n = a.n;
    const uint64_t la = a.terms.size(), lu = u.terms.size();
    t.raw_omega_terms = la * la;
    t.raw_mu_terms = uint64_t(a.n) * la * la * lu * lu;

    emit_folded(a, cplx(1.0, 0.0), PauliString::identity(a.n), t.omega_terms);

    for (uint32_t r = 0; r < a.n; ++r) {
        // W_r = U Z_r U^dag, contracted by the Pauli algebra; Hermitian for
        // any sum U (M Z M^dag is Hermitian), so coefficients are real.
        PauliSum zr;
        zr.n = a.n;
        zr.add_term(1.0, PauliString::single(a.n, r, 'Z'));
        PauliSum w = (u * zr) * u.dagger();
        w.simplify();
        for (const auto& [wc, wp] : w.terms) {
            if (std::abs(wc.imag()) > kHermitianTol * (1.0 + std::abs(wc)))
                throw std::logic_error("build_terms: U Z U^dag came out non-Hermitian");
            emit_folded(a, cplx(wc.real(), 0.0), wp, t.mu_terms);
        }
    }
    refresh_stats(t);
    return t;
}

CostTermTable preprocess(const CostTermTable& t, double tol) {
    CostTermTable out;
    out.n = t.n;
    out.preprocessed = true;
    out.raw_mu_terms = t.raw_mu_terms;
    out.raw_omega_terms = t.raw_omega_terms;

    auto merge = [tol](const std::vector<std::pair<cplx, PauliString>>& in,
                       std::vector<std::pair<cplx, PauliString>>& dst) {
        std::unordered_map<uint64_t, std::size_t> at;
        std::vector<std::pair<cplx, PauliString>> merged;
        for (const auto& [c, p] : in) {
            auto [it, fresh] = at.try_emplace(word_key(p), merged.size());
            if (fresh)
                merged.emplace_back(c, p);
            else
                merged[it->second].first += c;
        }
        for (auto& [c, p] : merged)
            if (std::abs(c) >= tol) dst.emplace_back(c, p);
        std::sort(dst.begin(), dst.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
    };
    merge(t.mu_terms, out.mu_terms);
    merge(t.omega_terms, out.omega_terms);
    refresh_stats(out);
    return out;
}

std::vector<PauliString> distinct_observables(const CostTermTable& t) {
    std::vector<PauliString> words;
    for (const auto* list : {&t.mu_terms, &t.omega_terms})
        for (const auto& [c, p] : *list)
            if (!p.is_identity()) words.push_back(p);
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return words;
}

CostValue evaluate_exact(const CostTermTable& t, const StateVector& s) {
    if (s.n != t.n) throw std::invalid_argument("evaluate_exact: width mismatch");
    GroupedExpectations cache(t, s);
    CostAccum acc;
    for (const auto& [c, p] : t.mu_terms) acc.mu += c * cache.value(p);
    for (const auto& [c, p] : t.omega_terms) acc.omega += c * cache.value(p);
    return finish(acc, t.n, true);
}

CostValue evaluate_exact_serial(const CostTermTable& t, const StateVector& s) {
    if (s.n != t.n) throw std::invalid_argument("evaluate_exact_serial: width mismatch");
    CostAccum acc;
    for (const auto& [c, p] : t.mu_terms) acc.mu += c * expectation_serial(s, p);
    for (const auto& [c, p] : t.omega_terms) acc.omega += c * expectation_serial(s, p);
    return finish(acc, t.n, true);
}

CostValue assemble_cost(const CostTermTable& t,
                        const std::vector<PauliString>& observables,
                        const std::vector<double>& estimates) {
    if (observables.size() != estimates.size())
        throw std::invalid_argument("assemble_cost: estimate count mismatch");
    std::unordered_map<uint64_t, double> value;
    value.reserve(observables.size());
    for (std::size_t i = 0; i < observables.size(); ++i)
        value[word_key(observables[i])] = estimates[i];

    auto lookup = [&value](const PauliString& p) {
        if (p.is_identity()) return 1.0;
        auto it = value.find(word_key(p));
        if (it == value.end())
            throw std::invalid_argument("assemble_cost: missing estimate for a table word");
        return it->second;
    };
    CostAccum acc;
    for (const auto& [c, p] : t.mu_terms) acc.mu += c * lookup(p);
    for (const auto& [c, p] : t.omega_terms) acc.omega += c * lookup(p);
    return finish(acc, t.n, false);
}

CostValue evaluate_shadow(const CostTermTable& t, const ClassicalShadow& shadow,
                          uint32_t batches) {
    if (shadow.snapshots.empty())
        throw std::invalid_argument("evaluate_shadow: empty shadow");
    if (shadow.n != t.n) throw std::invalid_argument("evaluate_shadow: width mismatch");
    std::vector<PauliString> words = distinct_observables(t);
    if (batches == 0) batches = default_batches(std::max<uint64_t>(words.size(), 1));
    std::vector<double> estimates(words.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t i = 0; i < int64_t(words.size()); ++i)
        estimates[std::size_t(i)] = estimate_pauli(shadow, words[std::size_t(i)], batches);
    return assemble_cost(t, words, estimates);
}

double termination_gamma(uint32_t n, double kappa, double eps) {
    if (n == 0 || !(kappa > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("termination_gamma: arguments must be positive");
    return eps * eps / (double(n) * kappa * kappa);
}

}  // namespace qls
