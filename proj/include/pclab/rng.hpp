#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pclab {

/// Counter-based pseudo-random generator.
///
/// The generator is a keyed SplitMix64 stream: output i is
/// mix(key + (i+1) * 0x9E3779B97F4A7C15) where mix is the SplitMix64
/// finalizer. Streams are derived from (seed, name, trial) so trial
/// partitioning is reproducible across runs and across ports; the
/// derivation is fnv1a64(name) folded with seed and trial through two
/// mix rounds (see Rng::stream).
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        return h;
    }

    /// Canonical stream derivation used by the experiment harness.
    static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t trial) {
        std::uint64_t key = mix(seed ^ fnv1a(name));
        key = mix(key + 0x9E3779B97F4A7C15ull * (trial + 1));
        return Rng(key);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(key_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform double in [0, 1), 53 random mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), rejection-sampled so the draw is unbiased.
    std::int64_t uniform_int(std::int64_t n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return static_cast<std::int64_t>(v % un);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        // Box-Muller; no spare caching so the stream position is predictable.
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::complex<double> normal_complex() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Uniform k-subset of the given universe, returned sorted ascending.
    std::vector<std::int64_t> sample_subset(std::vector<std::int64_t> universe, std::size_t k) {
        if (k > universe.size())
            throw std::invalid_argument("sample_subset: k exceeds universe size");
        // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(universe.size() - i)));
            std::swap(universe[i], universe[j]);
        }
        universe.resize(k);
        std::sort(universe.begin(), universe.end());
        return universe;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace pclab
