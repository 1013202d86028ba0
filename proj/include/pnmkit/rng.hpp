// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace pnmkit {

/// Deterministic xoshiro256++ with hand-rolled distributions, so generated
/// datasets are byte-identical across platforms and standard library
/// versions (std:: distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // seed the state through splitmix64
        std::uint64_t x = seed;
        for (auto& word : state_)
            word = splitmix64(x);
    }

    /// Independent child stream; distinct (a, b) pairs give distinct
    /// decorrelated streams of the same master seed.
    Rng child(std::uint64_t a, std::uint64_t b = 0) const {
        std::uint64_t x = state_[0] ^ (a * 0x9e3779b97f4a7c15ull);
        std::uint64_t mixed = splitmix64(x) ^ (b + 0x632be59bd9b4e019ull);
        return Rng(mixed);
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

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift rejection; unbiased
        for (;;) {
            std::uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            std::uint64_t lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (-n) % n)
                return static_cast<std::uint64_t>(m >> 64);
        }
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0);
        u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
        has_spare_ = true;
        return mag * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    std::uint64_t poisson(double lambda) {
        if (lambda <= 0)
            return 0;
        if (lambda < 30.0) {
            // Knuth product method
            const double limit = std::exp(-lambda);
            std::uint64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        // split recursively: Poisson(a + b) = Poisson(a) + Poisson(b) with a
        // gamma-beta bridge would be exact; a rounded-normal tail is enough
        // for the large-mean counter streams this generator feeds
        double v = normal(lambda, std::sqrt(lambda));
        return v <= 0 ? 0 : static_cast<std::uint64_t>(v + 0.5);
    }

    double gamma(double shape, double scale) {
        // Marsaglia-Tsang
        if (shape < 1.0) {
            double u;
            do {
                u = uniform();
            } while (u <= 0);
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v * scale;
            if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * scale;
        }
    }

    /// Negative binomial with the given mean and variance (gamma-poisson
    /// mixture); degenerates to poisson when variance <= mean.
    std::uint64_t negative_binomial(double mean, double variance) {
        if (mean <= 0)
            return 0;
        if (variance <= mean)
            return poisson(mean);
        const double r = mean * mean / (variance - mean);
        return poisson(gamma(r, mean / r));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0;
    bool has_spare_ = false;
};

} // namespace pnmkit
