#pragma once

#include "osqit/layout.hpp"

#include <Eigen/Dense>

#include <complex>

namespace osqit {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;

/// Structural checks (hermiticity, unitarity, layout consistency).
inline constexpr double kStructuralTol = 1e-10;
/// Computational residuals (eigendecomposition noise floor at double precision).
inline constexpr double kResidualTol = 1e-9;
/// Eigenvalues below this fraction of the largest count as kernel
/// (generalized-inverse convention).
inline constexpr double kKernelCutoff = 1e-12;

/// Square complex matrix with composite-space bookkeeping.
class Operator {
public:
    Operator() = default;
    Operator(MatrixXcd entries, SpaceLayout layout);

    const MatrixXcd& matrix() const { return m_; }
    MatrixXcd& matrix() { return m_; }
    const SpaceLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    Complex trace() const { return m_.trace(); }
    Operator adjoint() const { return Operator(m_.adjoint(), layout_); }
    bool is_hermitian(double tol = kStructuralTol) const;
    bool is_unitary(double tol = kStructuralTol) const;

    static Operator identity(const SpaceLayout& layout);

    Operator operator+(const Operator& o) const;
    Operator operator-(const Operator& o) const;
    Operator operator*(const Operator& o) const;
    friend Operator operator*(Complex s, const Operator& a) {
        return Operator(s * a.m_, a.layout_);
    }

private:
    MatrixXcd m_;
    SpaceLayout layout_;
};

/// Hermitian PSD operator with trace at most one (subnormalized states allowed).
class DensityOperator {
public:
    DensityOperator() = default;
    /// Validates hermiticity (1e-10), eigenvalue floor (-1e-10) and trace <= 1 + 1e-10.
    explicit DensityOperator(Operator op);
    DensityOperator(MatrixXcd entries, SpaceLayout layout)
        : DensityOperator(Operator(std::move(entries), std::move(layout))) {}

    const Operator& op() const { return op_; }
    const MatrixXcd& matrix() const { return op_.matrix(); }
    const SpaceLayout& layout() const { return op_.layout(); }
    int dim() const { return op_.dim(); }
    double trace() const { return op_.trace().real(); }

private:
    Operator op_;
};

/// State vector on a composite space; squared norm at most one.
class PureStateVector {
public:
    PureStateVector() = default;
    PureStateVector(VectorXcd amplitudes, SpaceLayout layout);

    const VectorXcd& amplitudes() const { return v_; }
    VectorXcd& amplitudes() { return v_; }
    const SpaceLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(v_.size()); }
    double squared_norm() const { return v_.squaredNorm(); }

    /// |psi><psi| as a density operator.
    DensityOperator projector() const;

private:
    VectorXcd v_;
    SpaceLayout layout_;
};

} // namespace osqit
