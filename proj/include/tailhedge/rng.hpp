#pragma once

#include <cstdint>
#include <random>

namespace tailhedge {

// SplitMix64 mixing step; used to derive decorrelated stream seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random stream. Every output is fully pinned by the seed: the
// engine is mt19937_64 (standard-specified sequence), uniforms take the high
// 53 bits, normals go through the inverse CDF, and integer draws use rejection
// sampling, so no platform-dependent distribution code is involved.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();                        // open interval (0, 1)
    double normal();                           // standard normal via inverse CDF
    std::size_t uniform_index(std::size_t n);  // unbiased draw from [0, n)

private:
    std::mt19937_64 engine_;
};

// Stream keyed by (base, a, b, c); distinct tags give independent streams.
[[nodiscard]] Rng stream_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0);

}  // namespace tailhedge
