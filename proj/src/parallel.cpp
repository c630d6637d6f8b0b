#include <meboost/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace meboost {

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body)
{
    if (count == 0) return;
    if (jobs <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex guard;
    std::size_t first_failure = count;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            if (failed.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (i < first_failure) {
                    first_failure = i;
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };

    const auto threads = static_cast<std::size_t>(std::min<std::size_t>(count, static_cast<std::size_t>(jobs)));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace meboost
