#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace semimono {

/// Pairwise (cascade) summation. The result depends only on the order of
/// the input, never on how work was split across threads.
inline double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kBlock = 16;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Monte Carlo estimate with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

inline Estimate estimate(std::span<const double> samples) {
    Estimate e;
    e.count = samples.size();
    if (samples.empty()) return e;
    e.mean = pairwise_sum(samples) / static_cast<double>(samples.size());
    if (samples.size() < 2) return e;
    std::vector<double> sq(samples.size());
    std::transform(samples.begin(), samples.end(), sq.begin(),
                   [m = e.mean](double v) { return (v - m) * (v - m); });
    const double var = pairwise_sum(sq) / static_cast<double>(samples.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    return e;
}

inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on `workers` threads with a static
/// partition. Results must be written to per-index slots by the caller;
/// the first exception thrown by any worker is rethrown here.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace semimono
