#include "qls/vqls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qls/statevector.hpp"

namespace qls {

namespace {

constexpr double kRealTol = 1e-12;

/// Re-registers an n-qubit word on the (n+1)-qubit test register whose
/// ancilla is the extra qubit n (the least significant state-index bit).
PauliString embed_system_word(const PauliString& p) {
    PauliString q = PauliString::identity(p.n + 1);
    q.x = p.x << 1;
    q.z = p.z << 1;
    return q;
}

/// Runs one Hadamard test: ancilla interference against the product of
/// `ops` (applied first to last), sampled `shots` times.
double hadamard_run(const AnsatzCircuit& circuit, const std::vector<double>& params,
                    const std::vector<PauliString>& ops, uint64_t shots,
                    const Rng& key, HadamardPart part) {
    if (shots == 0) throw std::invalid_argument("hadamard test: shots must be positive");
    const uint32_t n = circuit.n;
    StateVector s = StateVector::zero_state(n + 1);
    circuit.apply(s, params, 0);
    apply_h(s, n);
    if (part == HadamardPart::Imag) apply_sdg(s, n);
    for (const PauliString& p : ops) {
        if (p.n != n) throw std::invalid_argument("hadamard test: word width mismatch");
        apply_controlled_pauli(s, n, cplx(1.0, 0.0), embed_system_word(p));
    }
    apply_h(s, n);
    // Ancilla is the least significant bit; P(0) is the even-index mass.
    double p0 = 0.0;
    for (uint64_t d = 0; d < s.dim(); d += 2) p0 += std::norm(s.amps[d]);
    p0 = std::clamp(p0, 0.0, 1.0);
    Rng rng = key;
    uint64_t zeros = rng.binomial(shots, p0);
    return 2.0 * double(zeros) / double(shots) - 1.0;
}

double pow3(uint32_t w) {
    double v = 1.0;
    while (w--) v *= 3.0;
    return v;
}

uint64_t quadratic_job_argument(uint64_t l, uint64_t n) {
    return l * (l - 1) + n * l * l;
}

}  // namespace

double hadamard_beta(const AnsatzCircuit& circuit, const std::vector<double>& params,
                     const PauliString& a_i, const PauliString& a_j, uint64_t shots,
                     const Rng& key, HadamardPart part) {
    return hadamard_run(circuit, params, {a_i, a_j}, shots, key, part);
}

double hadamard_delta(const AnsatzCircuit& circuit, const std::vector<double>& params,
                      const PauliString& a_i, const PauliString& a_j,
                      const PauliString& u_l, const PauliString& u_p, uint32_t r,
                      uint64_t shots, const Rng& key, HadamardPart part) {
    if (r >= circuit.n) throw std::invalid_argument("hadamard test: qubit index out of range");
    PauliString zr = PauliString::single(circuit.n, r, 'Z');
    return hadamard_run(circuit, params, {a_i, u_l, zr, u_p, a_j}, shots, key, part);
}

VqlsEvaluation evaluate_cost_vqls(const PauliSum& a, const PauliSum& u,
                                  const AnsatzCircuit& circuit,
                                  const std::vector<double>& params, uint64_t shots,
                                  const Rng& key, bool paranoid) {
    if (a.terms.empty()) throw std::invalid_argument("evaluate_cost_vqls: empty system sum");
    if (a.n != u.n || a.n != circuit.n)
        throw std::invalid_argument("evaluate_cost_vqls: register width mismatch");
    const uint32_t n = a.n;
    const std::size_t la = a.terms.size();

    VqlsEvaluation out;
    uint64_t job = 0;
    auto run_beta = [&](std::size_t i, std::size_t j, HadamardPart part) {
        ++out.jobs_executed;
        return hadamard_beta(circuit, params, a.terms[i].second, a.terms[j].second,
                             shots, key.derive(job++), part);
    };
    auto run_delta = [&](std::size_t i, std::size_t j, std::size_t l, std::size_t p,
                         uint32_t r, HadamardPart part) {
        ++out.jobs_executed;
        return hadamard_delta(circuit, params, a.terms[i].second, a.terms[j].second,
                              u.terms[l].second, u.terms[p].second, r, shots,
                              key.derive(job++), part);
    };
    auto needs_imag = [paranoid](cplx z) {
        return paranoid || std::abs(z.imag()) > kRealTol * std::abs(z);
    };

    // omega: the diagonal is exactly 1 per term; off-diagonal pairs fold
    // conjugates, so 2 (Re z Re beta - Im z Im beta) per i < j.
    double omega = 0.0;
    for (const auto& [c, p] : a.terms) omega += std::norm(c);
    for (std::size_t i = 0; i < la; ++i)
        for (std::size_t j = i + 1; j < la; ++j) {
            cplx z = a.terms[i].first * std::conj(a.terms[j].first);
            if (std::abs(z) == 0.0) continue;
            double re = run_beta(i, j, HadamardPart::Real);
            double im = needs_imag(z) ? run_beta(i, j, HadamardPart::Imag) : 0.0;
            omega += 2.0 * (z.real() * re - z.imag() * im);
        }

    // mu: canonical tuples under (i,j,l,p) ~ (j,i,p,l); the self-conjugate
    // diagonal (i==j, l==p) is real with a real coefficient.
    double mu = 0.0;
    const std::size_t lu = u.terms.size();
    for (uint32_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < la; ++i)
            for (std::size_t j = i; j < la; ++j)
                for (std::size_t l = 0; l < lu; ++l)
                    for (std::size_t p = (i == j ? l : 0); p < lu; ++p) {
                        cplx z = a.terms[i].first * std::conj(a.terms[j].first) *
                                 u.terms[p].first * std::conj(u.terms[l].first);
                        if (std::abs(z) == 0.0) continue;
                        bool self = i == j && l == p;
                        double re = run_delta(i, j, l, p, r, HadamardPart::Real);
                        if (self) {
                            mu += z.real() * re;
                            if (paranoid) (void)run_delta(i, j, l, p, r, HadamardPart::Imag);
                            continue;
                        }
                        double im =
                            needs_imag(z) ? run_delta(i, j, l, p, r, HadamardPart::Imag) : 0.0;
                        mu += 2.0 * (z.real() * re - z.imag() * im);
                    }

    out.jobs_modeled = (quadratic_job_argument(la, n) + 1) / 2;
    if (omega <= 1e-14)
        throw std::runtime_error("evaluate_cost_vqls: unstable denominator; raise shots");
    out.value.mu = mu;
    out.value.omega = omega;
    out.value.cost = std::clamp(0.5 - mu / (2.0 * double(n) * omega), 0.0, 1.0);
    return out;
}

uint64_t circuits_per_step_vqls(uint64_t l, uint64_t n, uint64_t shots) {
    if (l == 0 || n == 0 || shots == 0)
        throw std::invalid_argument("circuits_per_step_vqls: arguments must be positive");
    uint64_t arg = quadratic_job_argument(l, n);
    if (shots > (UINT64_MAX - 1) / arg)
        throw std::domain_error("circuits_per_step_vqls: count overflows");
    return (shots * arg + 1) / 2;
}

uint64_t circuits_per_step_sqls(uint64_t l, uint64_t n, uint32_t k, double eps) {
    if (l == 0 || n == 0 || !(eps > 0.0))
        throw std::invalid_argument("circuits_per_step_sqls: arguments must be positive");
    double arg = double(quadratic_job_argument(l, n));
    double v = std::ceil(std::log2(arg) * pow3(2 * k + 1) / (eps * eps));
    if (!(v >= 0.0) || v >= 9.0e18)
        throw std::domain_error("circuits_per_step_sqls: count overflows");
    return uint64_t(v);
}

uint64_t circuits_per_step_hadamard_preprocessed(uint64_t distinct_strings,
                                                 uint64_t shots) {
    if (distinct_strings == 0 || shots == 0)
        throw std::invalid_argument("circuits_per_step: arguments must be positive");
    return distinct_strings * shots;
}

uint64_t circuits_per_step_shadow_preprocessed(uint64_t distinct_strings, uint32_t k,
                                               double eps) {
    return shadow_size(distinct_strings, 2 * k + 1, eps, 1.0);
}

}  // namespace qls
