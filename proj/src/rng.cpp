#include "tailhedge/rng.hpp"

#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace tailhedge {

double Rng::uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::normal() {
    static const boost::math::normal_distribution<double> unit{};
    return boost::math::quantile(unit, uniform01());
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t rem = (0 - un) % un;  // 2^64 mod n
    std::uint64_t x = engine_();
    if (rem != 0) {
        const std::uint64_t bound = 0 - rem;  // largest multiple of n in 64 bits
        while (x >= bound) x = engine_();
    }
    return static_cast<std::size_t>(x % un);
}

Rng stream_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = splitmix64(base);
    s = splitmix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ (b + 0xbf58476d1ce4e5b9ULL));
    s = splitmix64(s ^ (c + 0x94d049bb133111ebULL));
    return Rng(s);
}

}  // namespace tailhedge
