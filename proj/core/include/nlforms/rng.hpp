#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace nlforms {

/// Deterministic xoshiro256++ generator.
///
/// Every randomized routine in the library takes a seed and promises
/// bit-identical streams for identical seeds, which rules out the
/// implementation-defined std::<random> distributions. Seeding runs the
/// seed through splitmix64 so small integer seeds give decorrelated states.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); never returns 0, safe under log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller; the companion value is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * pi_ * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("Rng::exponential: rate must be > 0");
        return -std::log(uniform_open()) / rate;
    }

    /// Uniform integer in [0, n), rejection-free bias below 2^-64 ignored.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be > 0");
        return next_u64() % n;
    }

    /// Index drawn from unnormalized nonnegative weights.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("Rng::categorical: weights sum to 0");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
            acc += weights[k];
            if (u < acc) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Derives an independent stream for a labelled subtask of this seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t label) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (label + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    static constexpr double pi_ = 3.14159265358979323846;

    std::array<std::uint64_t, 4> state_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace nlforms
