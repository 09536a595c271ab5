#ifndef CURREVO_PARALLEL_HPP
#define CURREVO_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace currevo {

    /// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must
    /// write to disjoint outputs; the first exception thrown is rethrown here.
    template <typename Fn>
    void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
    {
        if (threads <= 1 || n <= 1) {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                }
                catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                }
            }
        };
        const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
        {
            std::vector<std::jthread> pool;
            pool.reserve(count);
            for (unsigned t = 0; t < count; ++t)
                pool.emplace_back(worker);
        }
        if (error)
            std::rethrow_exception(error);
    }

} // namespace currevo

#endif
