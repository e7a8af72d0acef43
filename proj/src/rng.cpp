#include "qls/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qls {

double Rng::normal() {
    if (cached_normal_valid_) {
        cached_normal_valid_ = false;
        return cached_normal_;
    }
    // Box-Muller on (0,1] x [0,1).
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    cached_normal_valid_ = true;
    return r * std::cos(a);
}

namespace {

// CDF inversion along the probability recurrence; expected O(n*p) iterations.
uint64_t binomial_inversion(Rng& rng, uint64_t n, double p) {
    double q = 1.0 - p;
    double f = std::pow(q, double(n));  // P[k = 0]
    double u = rng.uniform();
    double ratio = p / q;
    uint64_t k = 0;
    while (u > f && k < n) {
        u -= f;
        f *= ratio * double(n - k) / double(k + 1);
        ++k;
    }
    return k;
}

// BTRS transformed rejection (Hormann), valid for n*p >= 10, p <= 0.5.
uint64_t binomial_btrs(Rng& rng, uint64_t n, double p) {
    const double nd = double(n);
    const double q = 1.0 - p;
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((nd + 1.0) * p);
    const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        if (us >= 0.07 && v <= v_r) return uint64_t(kd);
        v = std::log(v * alpha / (a / (us * us) + b));
        if (v <= h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + (kd - m) * lpq)
            return uint64_t(kd);
    }
}

}  // namespace

uint64_t Rng::binomial(uint64_t trials, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0, 1]");
    if (trials == 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;
    bool flipped = p > 0.5;
    double ps = flipped ? 1.0 - p : p;
    uint64_t k = (double(trials) * ps < 10.0) ? binomial_inversion(*this, trials, ps)
                                              : binomial_btrs(*this, trials, ps);
    return flipped ? trials - k : k;
}

void Rng::multinomial(uint64_t trials, const double* p, std::size_t bins, uint32_t* out) {
    for (std::size_t i = 0; i < bins; ++i) out[i] = 0;
    double mass = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (p[i] < 0.0) throw std::invalid_argument("multinomial: negative weight");
        mass += p[i];
    }
    uint64_t left = trials;
    for (std::size_t i = 0; i + 1 < bins && left > 0; ++i) {
        double share = mass > 0.0 ? p[i] / mass : 0.0;
        if (share > 1.0) share = 1.0;
        uint64_t draw = binomial(left, share);
        out[i] = uint32_t(draw);
        left -= draw;
        mass -= p[i];
        if (mass < 0.0) mass = 0.0;
    }
    if (left > 0) out[bins - 1] += uint32_t(left);
}

}  // namespace qls
