#include "spectra/rng.hpp"

namespace spectra {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
{
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Xoshiro256::Xoshiro256(const StreamKey& key) noexcept
{
    s_[0] = splitmix64(key.seed);
    s_[1] = splitmix64(key.replicate ^ 0x6A09E667F3BCC908ull);
    s_[2] = splitmix64(key.stream ^ 0xBB67AE8584CAA73Bull);
    s_[3] = splitmix64(s_[0] ^ s_[1] ^ s_[2] ^ 0x3C6EF372FE94F82Bull);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
        s_[3] = 1;
    }
    // Decorrelate the structured seed words.
    for (int i = 0; i < 16; ++i) {
        (*this)();
    }
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept
{
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

double Xoshiro256::uniform_open() noexcept
{
    // (k + 0.5) / 2^53 for k in [0, 2^53): never 0, never 1.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace spectra
