#include "sfs/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace sfs {

int thread_count() {
    if (const char* env = std::getenv("SFSKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {
thread_local bool inside_parallel_region = false;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f) {
    if (n <= 0) return;
    const int workers = inside_parallel_region ? 1 : thread_count();
    if (workers == 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        inside_parallel_region = true;
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= n || failed.load()) break;
            try {
                f(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                break;
            }
        }
    };
    const int spawn = static_cast<int>(std::min<std::int64_t>(workers, n));
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace sfs
