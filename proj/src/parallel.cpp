#include "poseidon/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace poseidon::par {

namespace {
int g_jobs = 0;
}

void set_jobs(int n) { g_jobs = n; }

int jobs() {
    if (g_jobs > 0) return g_jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::int64_t n, std::int64_t min_grain,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (n <= 0) return;
    const int j = jobs();
    if (j <= 1 || n < 2 * min_grain) {
        body(0, n);
        return;
    }
    const std::int64_t workers = std::min<std::int64_t>(j, std::max<std::int64_t>(1, n / min_grain));
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers - 1));
    for (std::int64_t w = 1; w < workers; ++w) {
        const std::int64_t b = w * chunk;
        const std::int64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&body, b, e] { body(b, e); });
    }
    body(0, std::min(n, chunk));
    for (auto& t : threads) t.join();
}

} // namespace poseidon::par
