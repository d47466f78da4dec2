#include "yoda/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace yoda {

size_t thread_budget() {
    static const size_t budget = [] {
        if (const char* env = std::getenv("YODA_THREADS")) {
            const long v = std::atol(env);
            if (v >= 1) return static_cast<size_t>(v);
            return static_cast<size_t>(1);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return static_cast<size_t>(hw ? hw : 1);
    }();
    return budget;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const size_t workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace yoda
