#ifndef SNIS_RNG_HPP
#define SNIS_RNG_HPP

#include <cstdint>
#include <random>

namespace snis {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent stream for (seed, a, b). Every patch gets its own stream keyed
// by its coordinates, so results do not depend on worker scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(mix64(mix64(mix64(seed) ^ a) ^ b));
}

}  // namespace snis

#endif
