#include "osqit/rng.hpp"

#include <cmath>
#include <numbers>

namespace osqit {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

CounterRng CounterRng::substream(std::uint64_t i) const {
    // Mix the child index into the stream key so substream chains don't collide.
    return CounterRng(seed_, splitmix64(stream_ ^ splitmix64(i + 0x632be59bd9b4e019ULL)));
}

std::uint64_t CounterRng::next_u64() {
    std::uint64_t key = splitmix64(seed_) ^ splitmix64(stream_ * 0xda942042e4dd58b5ULL + 1);
    return splitmix64(key ^ splitmix64(counter_++));
}

double CounterRng::uniform() {
    // 53-bit mantissa in [0,1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::complex<double> CounterRng::complex_gaussian() {
    const double inv_sqrt2 = 0.7071067811865475244;
    double re = gaussian();
    double im = gaussian();
    return {re * inv_sqrt2, im * inv_sqrt2};
}

std::uint64_t CounterRng::uniform_index(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for desk-scale n, but keep it exact.
    if (n == 0) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

} // namespace osqit
