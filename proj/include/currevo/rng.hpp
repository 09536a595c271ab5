#ifndef CURREVO_RNG_HPP
#define CURREVO_RNG_HPP

#include <cstdint>
#include <random>

namespace currevo {

    using Rng = std::mt19937_64;

    inline std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Independent stream for (seed, index); used so that parallel work items
    /// draw the same numbers no matter which thread runs them.
    inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
    {
        return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    }

    inline Rng make_rng(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

    inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

    inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

} // namespace currevo

#endif
