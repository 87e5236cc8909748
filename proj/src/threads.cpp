#include "tailhedge/threads.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tailhedge {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
    unsigned n = g_max_threads.load();
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

void parallel_for_slots(std::size_t n,
                        const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t slots = kParallelSlots;
    auto run_slot = [&](std::size_t s) {
        const std::size_t begin = n * s / slots;
        const std::size_t end = n * (s + 1) / slots;
        if (begin < end) body(s, begin, end);
    };
    const auto workers = static_cast<unsigned>(
        std::min<std::size_t>({max_threads(), slots, n}));
    if (workers <= 1) {
        for (std::size_t s = 0; s < slots; ++s) run_slot(s);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto drain = [&] {
        try {
            for (std::size_t s = next.fetch_add(1); s < slots; s = next.fetch_add(1)) run_slot(s);
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 0; t + 1 < workers; ++t) pool.emplace_back(drain);
    drain();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    if (xs.size() == 1) return xs[0];
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace tailhedge
