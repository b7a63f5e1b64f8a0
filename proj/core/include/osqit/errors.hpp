#pragma once

#include <stdexcept>
#include <string>

namespace osqit {

/// Thrown when a desk-scale memory/dimension guard would be exceeded.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense multi-copy constructions are guarded to this total dimension.
inline constexpr int kDimensionGuard = 4096;

/// Total variable dimension accepted by the SDP solver.
inline constexpr int kSdpDimensionGuard = 512;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_resource(bool cond, const std::string& msg) {
    if (!cond) throw ResourceError(msg);
}

} // namespace osqit
