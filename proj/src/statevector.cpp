#include "qls/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qls {

namespace {

constexpr cplx kPhaseTable[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

void check_qubit(const StateVector& s, uint32_t q) {
    if (q >= s.n) throw std::invalid_argument("StateVector: qubit index out of range");
}

}  // namespace

StateVector::StateVector(uint32_t n) : n(n) {
    if (n == 0 || n > 26) throw std::invalid_argument("StateVector: width must be in [1, 26]");
    amps.assign(uint64_t(1) << n, cplx(0, 0));
}

StateVector StateVector::zero_state(uint32_t n) {
    StateVector s(n);
    s.amps[0] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(uint32_t n, std::vector<cplx> amps) {
    StateVector s(n);
    if (amps.size() != s.dim())
        throw std::invalid_argument("StateVector: amplitude count does not match width");
    s.amps = std::move(amps);
    return s;
}

double StateVector::norm() const {
    double acc = 0.0;
    for (const cplx& a : amps) acc += std::norm(a);
    return std::sqrt(acc);
}

void StateVector::normalize() {
    double nr = norm();
    if (nr == 0.0) throw std::domain_error("StateVector: cannot normalise the zero vector");
    double inv = 1.0 / nr;
    for (cplx& a : amps) a *= inv;
}

cplx inner(const StateVector& a, const StateVector& b) {
    if (a.n != b.n) throw std::invalid_argument("inner: register width mismatch");
    cplx acc = 0.0;
    for (uint64_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amps[i]) * b.amps[i];
    return acc;
}

void apply_1q(StateVector& s, uint32_t qubit, const cplx u[4]) {
    check_qubit(s, qubit);
    const uint64_t bit = s.qubit_bit(qubit);
    const uint64_t dim = s.dim();
    for (uint64_t base = 0; base < dim; ++base) {
        if (base & bit) continue;
        cplx v0 = s.amps[base], v1 = s.amps[base | bit];
        s.amps[base] = u[0] * v0 + u[1] * v1;
        s.amps[base | bit] = u[2] * v0 + u[3] * v1;
    }
}

void apply_h(StateVector& s, uint32_t qubit) {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx u[4] = {r, r, r, -r};
    apply_1q(s, qubit, u);
}

void apply_s(StateVector& s, uint32_t qubit) {
    const cplx u[4] = {1.0, 0.0, 0.0, cplx(0, 1)};
    apply_1q(s, qubit, u);
}

void apply_sdg(StateVector& s, uint32_t qubit) {
    const cplx u[4] = {1.0, 0.0, 0.0, cplx(0, -1)};
    apply_1q(s, qubit, u);
}

void apply_rx(StateVector& s, uint32_t qubit, double theta) {
    double c = std::cos(theta / 2), m = std::sin(theta / 2);
    const cplx u[4] = {c, cplx(0, -m), cplx(0, -m), c};
    apply_1q(s, qubit, u);
}

void apply_ry(StateVector& s, uint32_t qubit, double theta) {
    double c = std::cos(theta / 2), m = std::sin(theta / 2);
    const cplx u[4] = {c, -m, m, c};
    apply_1q(s, qubit, u);
}

void apply_rz(StateVector& s, uint32_t qubit, double theta) {
    const cplx u[4] = {std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2)};
    apply_1q(s, qubit, u);
}

void apply_cnot(StateVector& s, uint32_t control, uint32_t target) {
    check_qubit(s, control);
    check_qubit(s, target);
    if (control == target) throw std::invalid_argument("apply_cnot: control equals target");
    const uint64_t cb = s.qubit_bit(control), tb = s.qubit_bit(target);
    const uint64_t dim = s.dim();
    for (uint64_t i = 0; i < dim; ++i)
        if ((i & cb) && !(i & tb)) std::swap(s.amps[i], s.amps[i | tb]);
}

void apply_pauli(StateVector& s, const PauliString& p) {
    if (p.n != s.n) throw std::invalid_argument("apply_pauli: register width mismatch");
    const cplx lead = kPhaseTable[std::popcount(p.x & p.z) & 3u];
    const uint64_t dim = s.dim();
    if (p.x == 0) {
        for (uint64_t c = 0; c < dim; ++c)
            s.amps[c] *= (std::popcount(p.z & c) & 1u) ? -lead : lead;
        return;
    }
    for (uint64_t c = 0; c < dim; ++c) {
        uint64_t d = c ^ p.x;
        if (d < c) continue;  // visit each swap pair once
        cplx vc = s.amps[c], vd = s.amps[d];
        // new[d] = lead * (-1)^pc(z&c) * old[c],  new[c] = lead * (-1)^pc(z&d) * old[d]
        s.amps[d] = ((std::popcount(p.z & c) & 1u) ? -lead : lead) * vc;
        s.amps[c] = ((std::popcount(p.z & d) & 1u) ? -lead : lead) * vd;
    }
}

void apply_controlled_pauli(StateVector& s, uint32_t control, cplx phase,
                            const PauliString& p) {
    if (p.n != s.n) throw std::invalid_argument("apply_controlled_pauli: width mismatch");
    check_qubit(s, control);
    const uint64_t cb = s.qubit_bit(control);
    if (p.support() & cb)
        throw std::invalid_argument("apply_controlled_pauli: word touches the control qubit");
    const cplx lead = phase * kPhaseTable[std::popcount(p.x & p.z) & 3u];
    const uint64_t dim = s.dim();
    if (p.x == 0) {
        for (uint64_t c = 0; c < dim; ++c)
            if (c & cb) s.amps[c] *= (std::popcount(p.z & c) & 1u) ? -lead : lead;
        return;
    }
    for (uint64_t c = 0; c < dim; ++c) {
        if (!(c & cb)) continue;
        uint64_t d = c ^ p.x;
        if (d < c) continue;
        cplx vc = s.amps[c], vd = s.amps[d];
        s.amps[d] = ((std::popcount(p.z & c) & 1u) ? -lead : lead) * vc;
        s.amps[c] = ((std::popcount(p.z & d) & 1u) ? -lead : lead) * vd;
    }
}

void apply_matrix(StateVector& s, const Dense& m) {
    if (s.n > 12) throw std::invalid_argument("apply_matrix: register too wide (n <= 12)");
    if (uint64_t(m.rows()) != s.dim() || uint64_t(m.cols()) != s.dim())
        throw std::invalid_argument("apply_matrix: dimension mismatch");
    Eigen::Map<Eigen::VectorXcd> v(s.amps.data(), Eigen::Index(s.dim()));
    Eigen::VectorXcd out = m * v;
    v = out;
}

namespace {

template <bool kParallel>
double expectation_impl(const StateVector& s, const PauliString& p) {
    if (p.n != s.n) throw std::invalid_argument("expectation: register width mismatch");
    const cplx lead = kPhaseTable[std::popcount(p.x & p.z) & 3u];
    const uint64_t dim = s.dim();
    const cplx* a = s.amps.data();
    double re = 0.0, im = 0.0;
    if constexpr (kParallel) {
#pragma omp parallel for reduction(+ : re, im) schedule(static)
        for (int64_t ci = 0; ci < int64_t(dim); ++ci) {
            const uint64_t c = uint64_t(ci);
            cplx t = std::conj(a[c ^ p.x]) * a[c];
            if (std::popcount(p.z & c) & 1u) t = -t;
            re += t.real();
            im += t.imag();
        }
    } else {
        for (uint64_t c = 0; c < dim; ++c) {
            cplx t = std::conj(a[c ^ p.x]) * a[c];
            if (std::popcount(p.z & c) & 1u) t = -t;
            re += t.real();
            im += t.imag();
        }
    }
    cplx val = lead * cplx(re, im);
    return val.real();
}

}  // namespace

double expectation(const StateVector& s, const PauliString& p) {
    return expectation_impl<true>(s, p);
}

double expectation_serial(const StateVector& s, const PauliString& p) {
    return expectation_impl<false>(s, p);
}

cplx expectation(const StateVector& s, const PauliSum& a) {
    if (a.n != s.n) throw std::invalid_argument("expectation: register width mismatch");
    cplx acc = 0.0;
    for (const auto& [c, p] : a.terms) acc += c * expectation_serial(s, p);
    return acc;
}

double probability(const StateVector& s, uint64_t outcome) {
    if (outcome >= s.dim()) throw std::invalid_argument("probability: outcome out of range");
    return std::norm(s.amps[outcome]);
}

uint64_t sample(const StateVector& s, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    const uint64_t dim = s.dim();
    for (uint64_t i = 0; i < dim; ++i) {
        acc += std::norm(s.amps[i]);
        if (u < acc) return i;
    }
    return dim - 1;  // guard against accumulated rounding
}

Sampler::Sampler(const StateVector& s) {
    cdf_.resize(s.dim());
    double acc = 0.0;
    for (uint64_t i = 0; i < s.dim(); ++i) {
        acc += std::norm(s.amps[i]);
        cdf_[i] = acc;
    }
}

uint64_t Sampler::draw(Rng& rng) const {
    double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return uint64_t(it - cdf_.begin());
}

}  // namespace qls
