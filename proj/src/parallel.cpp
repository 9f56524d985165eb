#include "cvreg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace cvreg {
namespace {

std::atomic<int> g_max_threads{0};

int hardware_threads()
{
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

} // namespace

void set_max_threads(int n)
{
    g_max_threads.store(n < 0 ? 0 : n);
}

int max_threads()
{
    const int n = g_max_threads.load();
    return n == 0 ? hardware_threads() : n;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn)
{
    const std::int64_t count = end - begin;
    if (count <= 0)
        return;

    const int workers = static_cast<int>(std::min<std::int64_t>(max_threads(), count));
    if (workers <= 1) {
        fn(begin, end);
        return;
    }

    const std::int64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) {
        const std::int64_t b = begin + w * chunk;
        const std::int64_t e = std::min(end, b + chunk);
        if (b >= e)
            break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    fn(begin, std::min(end, begin + chunk));
    for (auto& t : pool)
        t.join();
}

} // namespace cvreg
