#pragma once

#include <cstdint>
#include <string_view>

namespace foa {

// FNV-1a 64-bit. Used everywhere a stable, platform-independent hash is
// needed (embedding buckets, Bloom probes, shard assignment, mock content).
// std::hash is not stable across implementations, so it is never used for
// anything that ends up in a test expectation or on the wire.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

// splitmix64 finalizer; decorrelates seeded variants of the same key.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace foa
