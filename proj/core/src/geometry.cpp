#include "osqit/geometry.hpp"

#include "osqit/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace osqit {

namespace {

// Round-off inside square roots: clamp small negatives to zero.
double safe_sqrt(double x) {
    if (x < 0.0) {
        require(x > -1e-12 || x > -1e-9 * std::abs(x),
                "geometry: negative value inside square root beyond round-off");
        return 0.0;
    }
    return std::sqrt(x);
}

} // namespace

double trace_norm(const MatrixXcd& m) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= kStructuralTol) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    return svd.singularValues().sum();
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    require(rho.layout() == sigma.layout(), "fidelity: layout mismatch");
    MatrixXcd sq = matrix_function_psd(rho.matrix(), OpFunc::Sqrt);
    MatrixXcd inner = sq * sigma.matrix() * sq;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
    double f = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) f += safe_sqrt(es.eigenvalues()(i));
    return f;
}

double generalized_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    double a = std::max(0.0, 1.0 - rho.trace());
    double b = std::max(0.0, 1.0 - sigma.trace());
    return fidelity(rho, sigma) + std::sqrt(a * b);
}

double purified_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    double fbar = std::min(1.0, generalized_fidelity(rho, sigma));
    return safe_sqrt(1.0 - fbar * fbar);
}

double purified_distance(const PureStateVector& a, const PureStateVector& b) {
    require(a.layout() == b.layout(), "purified distance: layout mismatch");
    double f = std::abs(overlap(a, b));
    double ta = std::max(0.0, 1.0 - a.squared_norm());
    double tb = std::max(0.0, 1.0 - b.squared_norm());
    double fbar = std::min(1.0, f + std::sqrt(ta * tb));
    return safe_sqrt(1.0 - fbar * fbar);
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    require(rho.layout() == sigma.layout(), "trace distance: layout mismatch");
    return trace_norm(rho.matrix() - sigma.matrix());
}

DistanceReport distance_report(const DensityOperator& rho, const DensityOperator& sigma) {
    DistanceReport r;
    r.fidelity = fidelity(rho, sigma);
    double a = std::max(0.0, 1.0 - rho.trace());
    double b = std::max(0.0, 1.0 - sigma.trace());
    r.generalized_fidelity = r.fidelity + std::sqrt(a * b);
    double fbar = std::min(1.0, r.generalized_fidelity);
    r.purified_distance = safe_sqrt(1.0 - fbar * fbar);
    r.trace_distance = trace_distance(rho, sigma);
    return r;
}

namespace {

// Deterministic completion of an orthonormal column set to a full basis.
MatrixXcd complete_basis(const MatrixXcd& cols, int dim) {
    MatrixXcd basis(dim, dim);
    int have = static_cast<int>(cols.cols());
    basis.leftCols(have) = cols;
    int next = have;
    for (int e = 0; e < dim && next < dim; ++e) {
        VectorXcd v = VectorXcd::Zero(dim);
        v(e) = 1.0;
        for (int k = 0; k < next; ++k) v -= basis.col(k).dot(v) * basis.col(k);
        double n = v.norm();
        if (n > 1e-8) {
            basis.col(next++) = v / n;
        }
    }
    require(next == dim, "uhlmann: basis completion failed");
    return basis;
}

} // namespace

UhlmannResult uhlmann_isometry(const PureStateVector& psi, const PureStateVector& phi,
                               const std::vector<std::string>& s_labels) {
    const SpaceLayout& Lp = psi.layout();
    const SpaceLayout& Lq = phi.layout();
    require(Lp.sublayout(s_labels) == Lq.sublayout(s_labels),
            "uhlmann: incompatible shared-system layouts");

    std::vector<std::string> e1, e2;
    for (const auto& l : Lp.labels())
        if (std::find(s_labels.begin(), s_labels.end(), l) == s_labels.end()) e1.push_back(l);
    for (const auto& l : Lq.labels())
        if (std::find(s_labels.begin(), s_labels.end(), l) == s_labels.end()) e2.push_back(l);

    std::vector<std::string> order_p(s_labels.begin(), s_labels.end());
    order_p.insert(order_p.end(), e1.begin(), e1.end());
    std::vector<std::string> order_q(s_labels.begin(), s_labels.end());
    order_q.insert(order_q.end(), e2.begin(), e2.end());

    PureStateVector pp = permute_subsystems(psi, order_p);
    PureStateVector qq = permute_subsystems(phi, order_q);

    int ds = Lp.sublayout(s_labels).total_dim();
    int d1 = Lp.total_dim() / ds;
    int d2 = Lq.total_dim() / ds;

    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        M(pp.amplitudes().data(), ds, d1);
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        N(qq.amplitudes().data(), ds, d2);

    // <phi|(1 (x) V)|psi> = sum_{f,e} conj(W)_{f,e} K_{f,e} with K = N^dagger M and
    // W = conj(V); the maximum over isometries is the nuclear norm of K.
    MatrixXcd K = N.adjoint() * M; // d2 x d1
    Eigen::JacobiSVD<MatrixXcd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double tol = 1e-13 * std::max(1.0, svd.singularValues().size()
                                            ? svd.singularValues()(0)
                                            : 0.0);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;

    double achieved = svd.singularValues().head(std::max(r, 0)).sum();

    MatrixXcd P = svd.matrixU().leftCols(std::max(r, 1)); // d2 x r
    MatrixXcd Q = svd.matrixV().leftCols(std::max(r, 1)); // d1 x r
    MatrixXcd W;
    if (d2 >= d1) {
        MatrixXcd Pf = complete_basis(P, d2);
        MatrixXcd Qf = complete_basis(Q, d1);
        W = Pf.leftCols(d1) * Qf.adjoint();
    } else {
        // Only the support of psi's purifying marginal can be mapped.
        W = P * Q.adjoint();
    }
    MatrixXcd V = W.conjugate();

    SpaceLayout in = Lp.sublayout(e1);
    SpaceLayout out = Lq.sublayout(e2);
    return UhlmannResult{Isometry{std::move(V), std::move(in), std::move(out)}, achieved};
}

} // namespace osqit
