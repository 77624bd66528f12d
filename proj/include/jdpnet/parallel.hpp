#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace jdp {

/// Run fn(i) for i in [0, count) on up to `jobs` threads. Items are claimed in
/// index order; the first exception (by index) is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace jdp
