#pragma once

#include <cstdint>
#include <random>

namespace sqkd {

/// Seedable, splittable random source. Every stochastic operation takes one
/// explicitly; instances are single-owner and never shared between threads.
///
/// Child streams are derived by hashing (seed, stream id) with splitmix64,
/// so a run is reproducible from the root seed plus the derivation path
/// (e.g. session -> party -> round index).
class RandomSource
{
  public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent child stream; does not advance this source.
    RandomSource split(std::uint64_t stream) const
    {
        return RandomSource(derive_seed(seed_, stream));
    }

    static std::uint64_t derive_seed(std::uint64_t seed,
                                     std::uint64_t stream) noexcept
    {
        return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
    }

    /// Uniform on [0, 1).
    double uniform()
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    double uniform(double lo, double hi)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi)
    {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    std::uint8_t bit() { return static_cast<std::uint8_t>(uniform_int(0, 1)); }

    unsigned poisson(double mean)
    {
        if (mean <= 0.0)
            return 0;
        return std::poisson_distribution<unsigned>(mean)(engine_);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

  private:
    static std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace sqkd
