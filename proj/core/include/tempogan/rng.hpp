#pragma once

#include <cstdint>
#include <cmath>

namespace tempogan {

//! Small counter-based random stream.
//!
//! Every consumer derives its own stream from (seed, tag, index), so batches
//! can be assembled in parallel and still reproduce bit-identically for a
//! fixed seed, independent of scheduling. The core is splitmix64, which is
//! enough for data augmentation and weight init; this is not a crypto RNG.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    //! Stream derived from a parent seed, a purpose tag and a counter.
    static Rng substream(uint64_t seed, uint64_t tag, uint64_t index) {
        Rng r(mix(mix(seed ^ 0x9e3779b97f4a7c15ull, tag), index));
        r.next(); // decorrelate low-entropy keys
        return r;
    }

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    //! Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    //! Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    //! Integer in [0, n). n must be > 0.
    uint64_t uniform_index(uint64_t n) { return next() % n; }

    bool coin() { return (next() & 1ull) != 0; }

    //! Standard normal via Box-Muller (platform-independent sequence).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    //! Log-uniform in [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

private:
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        return z ^ (z >> 31);
    }
    uint64_t state_;
};

} // namespace tempogan
