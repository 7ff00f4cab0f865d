#pragma once

#include <cstdint>
#include <string_view>

namespace agentmem::detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Keyed 64-bit hash over raw bytes: FNV-1a seeded through the offset basis, then mixed.
/// Different seeds give practically independent functions, which is all the sketch rows need.
constexpr std::uint64_t keyed_hash(std::string_view bytes, std::uint64_t seed) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h ^ seed);
}

/// Deterministic stream of seeds derived from one run-level seed.
class SeedSequence {
public:
    explicit constexpr SeedSequence(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

} // namespace agentmem::detail
