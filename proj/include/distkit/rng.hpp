#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace distkit::rng {

// SplitMix64 finalizer. Bijective on 64-bit words, full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Random-access word i of the stream identified by `seed`. Pure function,
// so any sample can be regenerated without replaying the stream.
constexpr std::uint64_t word_at(std::uint64_t seed, std::uint64_t i) noexcept {
    return mix64(seed + (i + 1) * kGolden);
}

// Seed derivation for nested streams (per matrix cell, per iteration, ...).
// Values drawn from derive(s, a...) are independent of those from s itself.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t p : parts)
        h = mix64(h + kGolden) ^ mix64(p);
    return mix64(h);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a) { return derive(seed, {a}); }
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive(seed, {a, b});
}
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive(seed, {a, b, c});
}

// Uniform draw in the open interval (0,1); never returns 0 or 1, so logs and
// normal quantiles stay finite.
inline double uniform_at(std::uint64_t seed, std::uint64_t i) noexcept {
    return (static_cast<double>(word_at(seed, i) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal draw j of stream `seed` (Box-Muller, two words per draw).
inline double normal_at(std::uint64_t seed, std::uint64_t j) noexcept {
    const double u1 = uniform_at(seed, 2 * j);
    const double u2 = uniform_at(seed, 2 * j + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Convenience sequential view over the counter-based stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return word_at(seed_, word_ctr_++); }
    double next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t word_ctr_ = 0;
};

} // namespace distkit::rng
