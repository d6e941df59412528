#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "longnbt/common.hpp"

namespace longnbt {

// Counter-based generator: value(seed, stream, counter) is a pure function,
// so any (seed, stream) pair addresses an independent reproducible sequence
// regardless of thread schedule. Constants are the SplitMix64 finalizer
// (Stafford mix13) and the 64-bit golden ratio increment.
namespace rng_detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}
}  // namespace rng_detail

inline std::uint64_t rng_value(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    using namespace rng_detail;
    std::uint64_t key = mix64(seed ^ mix64(stream + kGolden));
    return mix64(key + (counter + 1) * kGolden);
}

/// Stateful view over one (seed, stream) counter sequence.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return rng_value(seed_, stream_, counter_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection (exact, unbiased).
    std::uint64_t uniform_below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Random sign, +1 or -1.
    double sign() { return (next_u64() & 1) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform_pos();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Poisson by CDF inversion; fine for the means used here (d^2 <= ~300).
    std::int64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        double u = uniform();
        double p = std::exp(-lambda);
        double cdf = p;
        std::int64_t k = 0;
        // 40 sigma past the mean: unreachable in practice, bounds the loop.
        std::int64_t cap = std::int64_t(lambda + 40.0 * std::sqrt(lambda) + 100.0);
        while (u > cdf && k < cap) {
            ++k;
            p *= lambda / double(k);
            cdf += p;
        }
        return k;
    }

    /// Binomial(trials, p) by inversion from k = 0 (BINV); expected cost
    /// O(trials * p), exact for p in [0, 1).
    std::int64_t binomial(std::int64_t trials, double p) {
        if (trials <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return trials;
        double q = 1.0 - p;
        double ratio = p / q;
        double u = uniform();
        // log-space start avoids underflow for large trials.
        double log_pk = double(trials) * std::log1p(-p);
        double pk = std::exp(log_pk);
        if (pk == 0.0) {
            // Mass at k = 0 underflows double; walk the CDF in log space
            // until pk becomes representable.
            std::int64_t k = 0;
            while (pk == 0.0 && k < trials) {
                log_pk += std::log(double(trials - k) / double(k + 1)) + std::log(ratio);
                ++k;
                pk = std::exp(log_pk);
            }
            double cdf = pk;
            while (u > cdf && k < trials) {
                pk *= double(trials - k) / double(k + 1) * ratio;
                ++k;
                cdf += pk;
            }
            return k;
        }
        double cdf = pk;
        std::int64_t k = 0;
        while (u > cdf && k < trials) {
            pk *= double(trials - k) / double(k + 1) * ratio;
            ++k;
            cdf += pk;
        }
        return k;
    }

    /// k distinct values from [0, population), ascending (Floyd's algorithm).
    std::vector<index_t> sample_without_replacement(index_t population, index_t k);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Fixed stream ids so independent subsystems never share a sequence.
namespace streams {
constexpr std::uint64_t kGroundTruth = 0x47545231;  // "GTR1"
constexpr std::uint64_t kSampleRowBase = 0x524F5730;  // per-row: base + row
constexpr std::uint64_t kArnoldiStart = 0x41524E31;
constexpr std::uint64_t kVerify = 0x56524631;
constexpr std::uint64_t kPowerIter = 0x50495431;
constexpr std::uint64_t kGWTreeBase = 0x47575442;  // per-trial: base + trial
constexpr std::uint64_t kHarness = 0x4841524E;
}  // namespace streams

}  // namespace longnbt
