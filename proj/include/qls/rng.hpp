#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace qls {

/// One splitmix64 step; advances `s` and returns the next output word.
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Counter-keyed random stream.
///
/// A stream is identified by a base seed plus a short path of words (run id,
/// snapshot index, batch, cell, ...).  Two streams with different paths are
/// statistically independent no matter which thread draws from them or in
/// which order, which is what makes parallel sampling bit-reproducible: every
/// work item derives its own stream from its logical coordinates instead of
/// sharing a sequential generator.
class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed) { state_ = hash_word(0x243f6a8885a308d3ull, seed); }

    Rng(uint64_t seed, std::initializer_list<uint64_t> path) : Rng(seed) {
        for (uint64_t w : path) state_ = hash_word(state_, w);
    }

    /// Child stream at `word` under this stream's key; does not advance *this.
    Rng derive(uint64_t word) const {
        Rng r(*this);
        r.state_ = hash_word(state_, word);
        r.cached_normal_valid_ = false;
        return r;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<uint64_t>::max(); }
    result_type operator()() { return splitmix64(state_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound > 0.
    uint64_t below(uint64_t bound) {
        // Multiply-shift with rejection of the biased tail.
        uint64_t threshold = (-bound) % bound;
        for (;;) {
            uint64_t r = (*this)();
            __uint128_t m = __uint128_t(r) * bound;
            if (uint64_t(m) >= threshold) return uint64_t(m >> 64);
        }
    }

    /// Standard normal draw (Box-Muller, pairs cached).
    double normal();

    /// Number of successes in `trials` Bernoulli(p) draws.  Exact sampler:
    /// CDF inversion when trials*min(p,1-p) is small, otherwise the BTRS
    /// transformed-rejection method.
    uint64_t binomial(uint64_t trials, double p);

    /// Multinomial counts: splits `trials` across `bins` cells with weights
    /// `p[0..bins-1]` (need not be normalised) via sequential conditional
    /// binomial draws.  `out` receives `bins` counts summing to `trials`.
    void multinomial(uint64_t trials, const double* p, std::size_t bins, uint32_t* out);

private:
    static uint64_t hash_word(uint64_t state, uint64_t word) {
        uint64_t s = state ^ (0x452821e638d01377ull + word);
        splitmix64(s);
        return s;
    }

    uint64_t state_ = 0;
    double cached_normal_ = 0.0;
    bool cached_normal_valid_ = false;
};

}  // namespace qls
