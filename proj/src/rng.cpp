#include "bstsim/rng.hpp"

#include <cmath>

namespace bstsim {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t finalise(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += kGolden;
    return finalise(state);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_index) noexcept {
    return finalise(seed ^ finalise(stream_index + kGolden));
}

Xoshiro256::Xoshiro256(RandomStream stream) noexcept : stream_(stream) {
    std::uint64_t state = mix(stream.seed, stream.stream_index);
    for (auto& word : s_) {
        word = splitmix64(state);
    }
}

double exponential(Xoshiro256& gen) noexcept {
    return -std::log(uniform_open01(gen));
}

} // namespace bstsim
