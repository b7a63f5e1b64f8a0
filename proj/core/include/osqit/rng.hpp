#pragma once

#include <complex>
#include <cstdint>

namespace osqit {

/// Counter-based pseudorandom generator. Each (seed, stream) pair yields an
/// independent sequence indexed by a 64-bit counter, so Monte-Carlo loops can
/// hand one stream per sample and stay reproducible under any parallel
/// schedule. The mixing function is SplitMix64 applied to a combined key.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0) {}

    /// Derived generator for sub-stream `i`; deterministic in (seed, stream, i).
    CounterRng substream(std::uint64_t i) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();

    /// Standard normal via Box-Muller (explicit, so output is platform-stable).
    double gaussian();

    /// Complex standard normal: (gaussian + i*gaussian)/sqrt(2).
    std::complex<double> complex_gaussian();

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace osqit
