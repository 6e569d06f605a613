#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace beamg2 {

// SplitMix64 step (Steele/Lea/Flood). Used for seeding and key mixing only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator with explicit substream derivation.
///
/// Every stochastic entity in a run (the arrival process, each atom transit,
/// the background stream, detector routing, dark counts, phase sampling) owns
/// a generator derived from (master seed, stream kind, entity index). Results
/// are therefore independent of evaluation and scheduling order, which is what
/// makes seeded runs reproducible under any degree of parallelism.
///
/// All variate transforms are implemented here rather than taken from
/// <random> so that output is identical across standard libraries.
class Rng {
  public:
    enum class Stream : std::uint64_t {
        arrivals = 1,
        atom = 2,
        background = 3,
        routing = 4,
        dark1 = 5,
        dark2 = 6,
        phase = 7,
        generic = 8,
    };

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    /// Generator for substream (kind, index) of a master seed.
    static Rng substream(std::uint64_t master_seed, Stream kind, std::uint64_t index = 0) {
        std::uint64_t key = master_seed;
        splitmix64(key);
        key ^= static_cast<std::uint64_t>(kind) * 0xd1342543de82ef95ULL;
        splitmix64(key);
        key ^= index * 0x2545f4914f6cdd1dULL;
        return Rng(splitmix64(key));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform_co() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Exponential waiting time for a process of the given rate.
    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

    /// Gaussian variate via Box-Muller (cosine branch only).
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = uniform();
        const double u2 = uniform_co();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return uniform_co() < p; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace beamg2
