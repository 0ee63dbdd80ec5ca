#pragma once

#include <cstdint>

namespace nkcomm {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer, applied after one gamma increment. All table values,
// epistatic draws and sweep seeds are derived from this function, so its
// constants are part of the reproducibility contract.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += kGoldenGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Top 53 bits of `z` as a double in [0, 1).
constexpr double unit_from_bits(std::uint64_t z) noexcept
{
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Sequential stream over mix64: the i-th draw is mix64(state + i*gamma).
// Used wherever a seeded sequence (shuffles, partial Fisher-Yates) is needed.
class SplitMixStream {
public:
    constexpr explicit SplitMixStream(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept
    {
        const std::uint64_t out = mix64(state_);
        state_ += kGoldenGamma;
        return out;
    }

    // Uniform integer in [0, bound) by multiply-shift. bound must be > 0.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace nkcomm
