#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bstsim {

/// Identifies one reproducible random sequence. Ensemble members share a
/// seed and differ by stream_index.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
};

/// SplitMix64 finaliser. Used for seeding and stream derivation only.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives the 64-bit key of stream (seed, stream_index):
///   mix(seed, i) = splitmix64-finalise(seed ^ splitmix64-finalise(i + golden))
std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_index) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna). This exact generator is part of the
/// reproducibility contract: output depends only on (seed, stream_index).
///
/// State is filled by four SplitMix64 outputs starting from
/// mix(seed, stream_index).
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(RandomStream stream) noexcept;
    Xoshiro256(std::uint64_t seed, std::uint64_t stream_index) noexcept
        : Xoshiro256(RandomStream{seed, stream_index}) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    RandomStream stream() const noexcept { return stream_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    RandomStream stream_;
};

/// Unbiased uniform integer in [0, bound) by Lemire's multiply-and-reject
/// method: take the high 64 bits of x * bound for a 64-bit draw x, and
/// reject when the low 64 bits fall below (2^64 - bound) mod bound.
/// bound must be nonzero.
inline std::uint64_t uniform_below(Xoshiro256& gen, std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(gen()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(gen()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform integer in [1, n].
inline std::uint64_t uniform_1_to(Xoshiro256& gen, std::uint64_t n) noexcept {
    return uniform_below(gen, n) + 1;
}

/// Uniform double in the open interval (0, 1), 53-bit resolution.
inline double uniform_open01(Xoshiro256& gen) noexcept {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Exp(1) by inversion.
double exponential(Xoshiro256& gen) noexcept;

/// Exp(rate) by inversion.
inline double exponential(Xoshiro256& gen, double rate) noexcept {
    return exponential(gen) / rate;
}

} // namespace bstsim
