#include "seequant/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace seequant {

namespace {
std::atomic<unsigned> g_max_threads{1};
}

void set_max_threads(unsigned n) {
    g_max_threads.store(n == 0 ? 1 : n);
}

unsigned max_threads() {
    return g_max_threads.load();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = g_max_threads.load();
    if (workers <= 1 || n < 2 * workers) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) {
        pool.emplace_back(run);
    }
    run();
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace seequant
