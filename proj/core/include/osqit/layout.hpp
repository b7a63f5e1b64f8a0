#pragma once

#include <string>
#include <vector>

namespace osqit {

/// Ordered subsystem structure of a composite Hilbert space.
///
/// Basis convention (frozen; every cross-module identity test depends on it):
/// tensor factors are enumerated row-major with the leftmost label most
/// significant, i.e. |i0 i1 ... ik> has linear index
/// ((i0*d1 + i1)*d2 + i2)*... matching Eigen's kroneckerProduct.
class SpaceLayout {
public:
    SpaceLayout() = default;
    SpaceLayout(std::vector<int> dims, std::vector<std::string> labels);

    /// Single unnamed-by-caller system.
    static SpaceLayout single(int dim, const std::string& label);

    int num_subsystems() const { return static_cast<int>(dims_.size()); }
    int total_dim() const { return total_dim_; }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }

    int dim_of(const std::string& label) const;
    int index_of(const std::string& label) const;   // -1 if absent
    bool has_label(const std::string& label) const;

    /// Product of dims over a label subset.
    int dim_of_set(const std::vector<std::string>& labels) const;

    /// Concatenation (tensor product of spaces).
    SpaceLayout concat(const SpaceLayout& other) const;

    /// Sub-layout containing exactly `keep`, in this layout's order.
    SpaceLayout sublayout(const std::vector<std::string>& keep) const;

    /// Multi-index <-> linear index under the frozen convention.
    std::vector<int> unpack(int linear) const;
    int pack(const std::vector<int>& multi) const;

    bool operator==(const SpaceLayout& other) const {
        return dims_ == other.dims_ && labels_ == other.labels_;
    }
    bool operator!=(const SpaceLayout& other) const { return !(*this == other); }

    std::string to_string() const;

private:
    std::vector<int> dims_;
    std::vector<std::string> labels_;
    int total_dim_ = 1;
};

} // namespace osqit
