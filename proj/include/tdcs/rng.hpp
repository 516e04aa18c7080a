#pragma once

// Seed splitting for reproducible Monte Carlo.
//
// Every random stream is seeded with
//   derive_seed(root, tag_1, ..., tag_k)
// where each step folds one tag through SplitMix64. Streams are keyed by
// purpose (bits, noise, channel), user/link indices and chunk index, so a
// stream's content never depends on how many workers run or on how many
// other users exist.

#include <tdcs/signal.hpp>

#include <cstdint>
#include <bit>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace tdcs::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

template <class... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t root, Tags... tags) noexcept {
    std::uint64_t s = splitmix64(root);
    ((s = splitmix64(s ^ static_cast<std::uint64_t>(tags))), ...);
    return s;
}

inline std::uint64_t tag_of(double value) noexcept { return std::bit_cast<std::uint64_t>(value); }

// Cheap-to-seed SplitMix64 generator for short per-link draws.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Stream purposes.
enum class Stream : std::uint64_t {
    bits = 0x62697473,
    noise = 0x6e6f6973,
    channel = 0x6368616e,
    fmw = 0x666d7721,
    mismatch = 0x6d69736d,
};

template <class Urbg>
inline double uniform01(Urbg& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <class Urbg>
inline double uniform_phase(Urbg& eng) { return 2.0 * kPi * uniform01(eng); }

// Uniform integer in [0, n) by rejection; portable across standard libraries.
template <class Urbg>
inline std::uint64_t uniform_below(Urbg& eng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = eng();
    } while (v >= limit);
    return v % n;
}

// Circular complex Gaussian source with per-sample variance E|z|^2 = variance.
// Ziggurat normals over SplitMix64.
class ComplexGaussian {
public:
    explicit ComplexGaussian(std::uint64_t seed) : eng_(seed) {}

    Complex operator()(double variance) {
        const double sigma = std::sqrt(variance / 2.0);
        const double re = dist_(eng_);
        const double im = dist_(eng_);
        return {sigma * re, sigma * im};
    }

    SplitMix64& engine() noexcept { return eng_; }

private:
    SplitMix64 eng_;
    boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

} // namespace tdcs::rng
