#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ferro {

// Seeded random source with hand-written distribution mappings.
// std::mt19937_64 output is fully specified by the standard, but the
// standard distributions are not; mapping the raw stream ourselves keeps
// generated graphs and rotation samples reproducible for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in {0, ..., bound-1}. Multiply-shift mapping; the
    // bias is below 2^-64 * bound, negligible at the sizes used here.
    std::uint64_t uniform_below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((u128(engine_()) * u128(bound)) >> 64);
    }

    // Standard normal via Box-Muller, caching the paired value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.28318530717958647692 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Decorrelated stream for a worker or sector index.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
        std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ferro
