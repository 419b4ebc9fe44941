#pragma once

#include <cstdint>
#include <limits>

namespace spectra {

/// Identifies one independent random stream. Distinct keys give distinct
/// generator states: the three fields are passed through the (bijective)
/// SplitMix64 finalizer into separate words of the xoshiro state.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Well-known stream ids. X entries and population draws never share a stream.
inline constexpr std::uint64_t kDataStream = 0;
inline constexpr std::uint64_t kPopulationStream = 1;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator,
/// but only the bit-exact helpers below are used by the library so results
/// do not depend on the standard library's distribution implementations.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(const StreamKey& key) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform_open() noexcept;

    /// Fair coin from the top bit.
    bool coin() noexcept { return ((*this)() >> 63) != 0; }

private:
    std::uint64_t s_[4];
};

} // namespace spectra
