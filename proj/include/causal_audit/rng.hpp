#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace causal_audit {

// Deterministic random stream (xoshiro256++ core, splitmix64 seeding) with
// hand-rolled variates so generated data is byte-stable across standard
// library versions. Child streams are derived from the origin seed and an
// index, never from the evolving state, so consumers can draw from children
// in any order and still reproduce results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : origin_seed_(seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via the Marsaglia polar method. The spare draw is
    // discarded so the stream position is a pure function of calls made.
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Unbiased uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Independent stream for subtask `index` (bootstrap resample, sweep point).
    Rng child(std::uint64_t index) const { return Rng(child_seed(origin_seed_, index)); }

    std::uint64_t origin_seed() const { return origin_seed_; }

    static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed;
        const std::uint64_t a = splitmix64(z);
        z = index + 0x632be59bd9b4e019ULL;
        const std::uint64_t b = splitmix64(z);
        z = a ^ b;
        return splitmix64(z);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t origin_seed_;
};

}  // namespace causal_audit
