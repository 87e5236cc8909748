#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace tailhedge {

// Caps worker threads used by parallel_for_slots; 0 restores the hardware default.
void set_max_threads(unsigned n);
[[nodiscard]] unsigned max_threads();

// Work is split into this many contiguous slots regardless of thread count, so
// per-slot results (and any fixed-order reduction over them) are reproducible
// on any machine.
inline constexpr std::size_t kParallelSlots = 64;

// Calls body(slot, begin, end) for every non-empty slot covering [0, n).
void parallel_for_slots(std::size_t n,
                        const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

// Sums in a fixed pairwise tree determined only by the length.
[[nodiscard]] double pairwise_sum(std::span<const double> xs);

}  // namespace tailhedge
