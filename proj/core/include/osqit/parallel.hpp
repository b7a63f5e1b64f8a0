#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace osqit {

/// Evaluate fn(0..count-1) across a worker pool and return results in index
/// order. Every sample owns its RNG substream, so the partitioning cannot
/// change any value and reductions over the returned vector are reproducible.
template <typename T>
std::vector<T> parallel_map(int count, const std::function<T(int)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(count));
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (count < 32 || workers == 1) {
        for (int i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    int chunk = (count + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        int lo = static_cast<int>(w) * chunk;
        int hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (int i = lo; i < hi; ++i) out[i] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

/// Running mean / standard error accumulator for Monte-Carlo loops.
struct MeanAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        double m = mean();
        return std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    }
    double std_error() const { return n ? std::sqrt(variance() / n) : 0.0; }
};

} // namespace osqit
