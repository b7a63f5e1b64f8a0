#include "osqit/layout.hpp"

#include "osqit/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace osqit {

SpaceLayout::SpaceLayout(std::vector<int> dims, std::vector<std::string> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
    require(dims_.size() == labels_.size(), "layout: dims/labels size mismatch");
    std::set<std::string> seen;
    total_dim_ = 1;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        require(dims_[i] >= 1, "layout: subsystem dimension must be positive");
        require(seen.insert(labels_[i]).second, "layout: duplicate label '" + labels_[i] + "'");
        total_dim_ *= dims_[i];
    }
}

SpaceLayout SpaceLayout::single(int dim, const std::string& label) {
    return SpaceLayout({dim}, {label});
}

int SpaceLayout::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

bool SpaceLayout::has_label(const std::string& label) const {
    return index_of(label) >= 0;
}

int SpaceLayout::dim_of(const std::string& label) const {
    int i = index_of(label);
    require(i >= 0, "layout: unknown label '" + label + "'");
    return dims_[i];
}

int SpaceLayout::dim_of_set(const std::vector<std::string>& labels) const {
    int d = 1;
    for (const auto& l : labels) d *= dim_of(l);
    return d;
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& other) const {
    std::vector<int> d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    std::vector<std::string> l = labels_;
    l.insert(l.end(), other.labels_.begin(), other.labels_.end());
    return SpaceLayout(std::move(d), std::move(l));
}

SpaceLayout SpaceLayout::sublayout(const std::vector<std::string>& keep) const {
    std::vector<int> d;
    std::vector<std::string> l;
    for (int i = 0; i < num_subsystems(); ++i) {
        if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) {
            d.push_back(dims_[i]);
            l.push_back(labels_[i]);
        }
    }
    for (const auto& k : keep) require(has_label(k), "layout: unknown label '" + k + "'");
    return SpaceLayout(std::move(d), std::move(l));
}

std::vector<int> SpaceLayout::unpack(int linear) const {
    std::vector<int> multi(dims_.size());
    for (int i = num_subsystems() - 1; i >= 0; --i) {
        multi[i] = linear % dims_[i];
        linear /= dims_[i];
    }
    return multi;
}

int SpaceLayout::pack(const std::vector<int>& multi) const {
    require(multi.size() == dims_.size(), "layout: multi-index arity mismatch");
    int linear = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        linear = linear * dims_[i] + multi[i];
    }
    return linear;
}

std::string SpaceLayout::to_string() const {
    std::ostringstream os;
    for (int i = 0; i < num_subsystems(); ++i) {
        if (i) os << ",";
        os << labels_[i] << ":" << dims_[i];
    }
    return os.str();
}

} // namespace osqit
