#include "osqit/operators.hpp"

#include "osqit/errors.hpp"

#include <Eigen/Eigenvalues>

namespace osqit {

Operator::Operator(MatrixXcd entries, SpaceLayout layout)
    : m_(std::move(entries)), layout_(std::move(layout)) {
    require(m_.rows() == m_.cols(), "operator: matrix must be square");
    require(m_.rows() == layout_.total_dim(),
            "operator: matrix dimension must equal the layout's total dimension");
}

bool Operator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_unitary(double tol) const {
    MatrixXcd d = m_.adjoint() * m_ - MatrixXcd::Identity(m_.rows(), m_.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
}

Operator Operator::identity(const SpaceLayout& layout) {
    return Operator(MatrixXcd::Identity(layout.total_dim(), layout.total_dim()), layout);
}

Operator Operator::operator+(const Operator& o) const {
    require(layout_ == o.layout_, "operator: layout mismatch");
    return Operator(m_ + o.m_, layout_);
}

Operator Operator::operator-(const Operator& o) const {
    require(layout_ == o.layout_, "operator: layout mismatch");
    return Operator(m_ - o.m_, layout_);
}

Operator Operator::operator*(const Operator& o) const {
    require(layout_ == o.layout_, "operator: layout mismatch");
    return Operator(m_ * o.m_, layout_);
}

DensityOperator::DensityOperator(Operator op) : op_(std::move(op)) {
    require(op_.is_hermitian(kStructuralTol), "density operator: not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op_.matrix(), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -kStructuralTol,
            "density operator: negative eigenvalue");
    require(op_.trace().real() <= 1.0 + kStructuralTol, "density operator: trace exceeds one");
}

PureStateVector::PureStateVector(VectorXcd amplitudes, SpaceLayout layout)
    : v_(std::move(amplitudes)), layout_(std::move(layout)) {
    require(v_.size() == layout_.total_dim(),
            "state vector: length must equal the layout's total dimension");
    require(v_.squaredNorm() <= 1.0 + kStructuralTol, "state vector: squared norm exceeds one");
}

DensityOperator PureStateVector::projector() const {
    return DensityOperator(Operator(v_ * v_.adjoint(), layout_));
}

} // namespace osqit
