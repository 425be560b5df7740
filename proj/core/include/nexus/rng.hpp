#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace nexus {

// SplitMix64 stream with Box-Muller gaussians. Seeded runs must reproduce
// bit-for-bit across platforms, so no std::random engines or distributions
// appear anywhere in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in {0, ..., bound-1}. Modulo bias is below 2^-53 for the
    // bounds used here (fold counts, row counts).
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

    // Standard normal via the trigonometric Box-Muller transform; consumes
    // exactly two draws per call.
    double next_gaussian() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

// Fisher-Yates with the portable stream above.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace nexus
