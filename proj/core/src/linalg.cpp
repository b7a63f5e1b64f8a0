#include "osqit/linalg.hpp"

#include "osqit/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace osqit {

bool Isometry::is_full(double tol) const {
    MatrixXcd g = m.adjoint() * m;
    return (g - MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

Operator tensor_product(const Operator& a, const Operator& b) {
    return Operator(Eigen::kroneckerProduct(a.matrix(), b.matrix()),
                    a.layout().concat(b.layout()));
}

PureStateVector tensor_product(const PureStateVector& a, const PureStateVector& b) {
    VectorXcd v(a.dim() * b.dim());
    for (int i = 0; i < a.dim(); ++i)
        v.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
    return PureStateVector(std::move(v), a.layout().concat(b.layout()));
}

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(tensor_product(a.op(), b.op()));
}

namespace {

// Positions of `keep` (original order) and of the complement.
void split_positions(const SpaceLayout& layout, const std::vector<std::string>& keep,
                     std::vector<int>& kept, std::vector<int>& traced) {
    for (const auto& k : keep)
        require(layout.has_label(k), "partial trace: unknown label '" + k + "'");
    for (int i = 0; i < layout.num_subsystems(); ++i) {
        bool is_kept = std::find(keep.begin(), keep.end(), layout.labels()[i]) != keep.end();
        (is_kept ? kept : traced).push_back(i);
    }
}

} // namespace

Operator partial_trace(const Operator& op, const std::vector<std::string>& keep) {
    const SpaceLayout& L = op.layout();
    std::vector<int> kept, traced;
    split_positions(L, keep, kept, traced);

    std::vector<std::string> kept_labels;
    for (int p : kept) kept_labels.push_back(L.labels()[p]);
    SpaceLayout out = L.sublayout(kept_labels);

    int dk = out.total_dim();
    int dt = L.total_dim() / dk;
    MatrixXcd result = MatrixXcd::Zero(dk, dk);

    // Strides of each subsystem in the full linear index.
    std::vector<long> stride(L.num_subsystems(), 1);
    for (int i = L.num_subsystems() - 2; i >= 0; --i)
        stride[i] = stride[i + 1] * L.dims()[i + 1];

    auto offset = [&](const std::vector<int>& positions, int packed) {
        long off = 0;
        for (int i = static_cast<int>(positions.size()) - 1; i >= 0; --i) {
            int d = L.dims()[positions[i]];
            off += static_cast<long>(packed % d) * stride[positions[i]];
            packed /= d;
        }
        return off;
    };

    std::vector<long> kept_off(dk), traced_off(dt);
    for (int a = 0; a < dk; ++a) kept_off[a] = offset(kept, a);
    for (int t = 0; t < dt; ++t) traced_off[t] = offset(traced, t);

    for (int a = 0; a < dk; ++a)
        for (int b = 0; b < dk; ++b) {
            Complex s = 0.0;
            for (int t = 0; t < dt; ++t)
                s += op.matrix()(kept_off[a] + traced_off[t], kept_off[b] + traced_off[t]);
            result(a, b) = s;
        }
    return Operator(std::move(result), std::move(out));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
    return DensityOperator(partial_trace(rho.op(), keep));
}

DensityOperator marginal(const PureStateVector& psi, const std::vector<std::string>& keep) {
    const SpaceLayout& L = psi.layout();
    std::vector<int> kept, traced;
    split_positions(L, keep, kept, traced);

    std::vector<std::string> order;
    for (int p : kept) order.push_back(L.labels()[p]);
    std::vector<std::string> kept_labels = order;
    for (int p : traced) order.push_back(L.labels()[p]);

    PureStateVector re = permute_subsystems(psi, order);
    SpaceLayout out = L.sublayout(kept_labels);
    int dk = out.total_dim();
    int dt = L.total_dim() / dk;
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        M(re.amplitudes().data(), dk, dt);
    MatrixXcd g = M * M.adjoint();
    return DensityOperator(Operator(std::move(g), std::move(out)));
}

EighResult eigh(const Operator& op) {
    require(op.is_hermitian(kStructuralTol), "eigh: operator not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op.matrix());
    require(es.info() == Eigen::Success, "eigh: eigendecomposition failed");
    int d = op.dim();
    EighResult r;
    r.eigenvalues = es.eigenvalues().reverse();
    r.eigenvectors = MatrixXcd(d, d);
    for (int i = 0; i < d; ++i) r.eigenvectors.col(i) = es.eigenvectors().col(d - 1 - i);
    return r;
}

MatrixXcd matrix_function_psd(const MatrixXcd& m, OpFunc f, double p) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    VectorXd lam = es.eigenvalues();
    double lmax = lam.cwiseAbs().maxCoeff();
    double cutoff = kKernelCutoff * std::max(lmax, 1e-300);
    VectorXd out(lam.size());
    for (int i = 0; i < lam.size(); ++i) {
        double x = lam(i);
        if (x <= cutoff) {
            out(i) = 0.0;
            continue;
        }
        switch (f) {
            case OpFunc::Sqrt: out(i) = std::sqrt(x); break;
            case OpFunc::Log2: out(i) = std::log2(x); break;
            case OpFunc::Power: out(i) = std::pow(x, p); break;
            case OpFunc::PseudoInversePower: out(i) = std::pow(x, -p); break;
        }
    }
    return es.eigenvectors() * out.asDiagonal() * es.eigenvectors().adjoint();
}

Operator operator_function(const DensityOperator& rho, OpFunc f, double p) {
    return Operator(matrix_function_psd(rho.matrix(), f, p), rho.layout());
}

Operator haar_unitary(int d, CounterRng& rng, const std::optional<SpaceLayout>& layout) {
    require(d >= 1, "haar_unitary: dimension must be positive");
    MatrixXcd g(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(d, d);
    MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        Complex rii = r(i, i);
        double a = std::abs(rii);
        q.col(i) *= (a > 0) ? rii / a : Complex(1.0, 0.0);
    }
    SpaceLayout L = layout ? *layout : SpaceLayout::single(d, "H");
    require(L.total_dim() == d, "haar_unitary: layout dimension mismatch");
    return Operator(std::move(q), std::move(L));
}

PureStateVector purification(const DensityOperator& rho, const std::string& purifier_label) {
    EighResult e = eigh(rho.op());
    double lmax = std::max(e.eigenvalues.maxCoeff(), 0.0);
    double cutoff = kKernelCutoff * std::max(lmax, 1e-300);
    int rank = 0;
    for (int i = 0; i < e.eigenvalues.size(); ++i)
        if (e.eigenvalues(i) > cutoff) ++rank;
    rank = std::max(rank, 1);

    int d = rho.dim();
    VectorXcd v = VectorXcd::Zero(static_cast<long>(d) * rank);
    for (int k = 0; k < rank; ++k) {
        double lam = std::max(e.eigenvalues(k), 0.0);
        double c = std::sqrt(lam);
        for (int i = 0; i < d; ++i) v(static_cast<long>(i) * rank + k) = c * e.eigenvectors(i, k);
    }
    SpaceLayout L = rho.layout().concat(SpaceLayout::single(rank, purifier_label));
    return PureStateVector(std::move(v), std::move(L));
}

SwapProjectors swap_and_projectors(int d) {
    require(d >= 1, "swap_and_projectors: dimension must be positive");
    SpaceLayout L({d, d}, {"S1", "S2"});
    int dd = d * d;
    MatrixXcd f = MatrixXcd::Zero(dd, dd);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) f(i * d + j, j * d + i) = 1.0;
    MatrixXcd id = MatrixXcd::Identity(dd, dd);
    SwapProjectors out{Operator(f, L), Operator(0.5 * (id + f), L), Operator(0.5 * (id - f), L)};
    return out;
}

Operator symmetric_subspace_projector(int d, int n) {
    require(d >= 1 && n >= 1, "symmetric projector: d, n must be positive");
    double total = std::pow(static_cast<double>(d), n);
    require_resource(total <= kDimensionGuard + 0.5,
                     "symmetric projector: d^n exceeds the dimension guard");
    int dim = static_cast<int>(total + 0.5);

    std::vector<int> dims(n, d);
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = "S" + std::to_string(i);
    SpaceLayout L(dims, labels);

    // Group basis strings by their sorted type; the projector is the sum of
    // outer products of the normalized symmetric vectors, which is (1/g) on
    // every pair within a group.
    std::map<std::vector<int>, std::vector<int>> groups;
    for (int x = 0; x < dim; ++x) {
        std::vector<int> digits = L.unpack(x);
        std::sort(digits.begin(), digits.end());
        groups[digits].push_back(x);
    }
    MatrixXcd proj = MatrixXcd::Zero(dim, dim);
    for (const auto& [type, members] : groups) {
        double w = 1.0 / static_cast<double>(members.size());
        for (int a : members)
            for (int b : members) proj(a, b) = w;
    }
    return Operator(std::move(proj), std::move(L));
}

Operator permutation_operator(int d, int n, const std::vector<int>& perm) {
    require(static_cast<int>(perm.size()) == n, "permutation operator: arity mismatch");
    std::vector<int> check = perm;
    std::sort(check.begin(), check.end());
    for (int i = 0; i < n; ++i) require(check[i] == i, "permutation operator: not a permutation");

    double total = std::pow(static_cast<double>(d), n);
    require_resource(total <= kDimensionGuard + 0.5,
                     "permutation operator: d^n exceeds the dimension guard");
    int dim = static_cast<int>(total + 0.5);

    std::vector<int> dims(n, d);
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = "S" + std::to_string(i);
    SpaceLayout L(dims, labels);

    // |i_1..i_n> -> |j_1..j_n> with j_{perm(k)} = i_k, so P_pi P_sigma = P_{pi o sigma}.
    MatrixXcd p = MatrixXcd::Zero(dim, dim);
    for (int x = 0; x < dim; ++x) {
        std::vector<int> in = L.unpack(x);
        std::vector<int> out(n);
        for (int k = 0; k < n; ++k) out[perm[k]] = in[k];
        p(L.pack(out), x) = 1.0;
    }
    return Operator(std::move(p), std::move(L));
}

PureStateVector random_pure_state(const SpaceLayout& layout, CounterRng& rng) {
    int d = layout.total_dim();
    VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.complex_gaussian();
    v.normalize();
    return PureStateVector(std::move(v), layout);
}

DensityOperator random_density_operator(const SpaceLayout& layout, CounterRng& rng, int rank) {
    int d = layout.total_dim();
    if (rank <= 0) rank = d;
    SpaceLayout big = layout.concat(SpaceLayout::single(rank, "_anc"));
    PureStateVector psi = random_pure_state(big, rng);
    return marginal(psi, layout.labels());
}

DensityOperator random_subnormalized(const SpaceLayout& layout, CounterRng& rng) {
    DensityOperator rho = random_density_operator(layout, rng);
    double t = 0.05 + 0.95 * rng.uniform();
    return DensityOperator(Operator(t * rho.matrix(), layout));
}

PureStateVector permute_subsystems(const PureStateVector& psi,
                                   const std::vector<std::string>& order) {
    const SpaceLayout& L = psi.layout();
    require(static_cast<int>(order.size()) == L.num_subsystems(),
            "permute: order must list every label");
    SpaceLayout out = L.sublayout(order);
    // sublayout keeps the original order; rebuild in the requested order.
    std::vector<int> dims;
    for (const auto& l : order) dims.push_back(L.dim_of(l));
    out = SpaceLayout(dims, order);

    std::vector<int> src_pos;
    for (const auto& l : order) src_pos.push_back(L.index_of(l));

    int dim = L.total_dim();
    VectorXcd v(dim);
    std::vector<int> multi_src(L.num_subsystems());
    for (int x = 0; x < dim; ++x) {
        std::vector<int> m = out.unpack(x);
        for (std::size_t k = 0; k < src_pos.size(); ++k) multi_src[src_pos[k]] = m[k];
        v(x) = psi.amplitudes()(L.pack(multi_src));
    }
    return PureStateVector(std::move(v), std::move(out));
}

Operator permute_subsystems(const Operator& op, const std::vector<std::string>& order) {
    const SpaceLayout& L = op.layout();
    require(static_cast<int>(order.size()) == L.num_subsystems(),
            "permute: order must list every label");
    std::vector<int> dims;
    for (const auto& l : order) dims.push_back(L.dim_of(l));
    SpaceLayout out(dims, order);

    std::vector<int> src_pos;
    for (const auto& l : order) src_pos.push_back(L.index_of(l));

    int dim = L.total_dim();
    std::vector<int> map(dim);
    std::vector<int> multi_src(L.num_subsystems());
    for (int x = 0; x < dim; ++x) {
        std::vector<int> m = out.unpack(x);
        for (std::size_t k = 0; k < src_pos.size(); ++k) multi_src[src_pos[k]] = m[k];
        map[x] = L.pack(multi_src);
    }
    MatrixXcd r(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r(i, j) = op.matrix()(map[i], map[j]);
    return Operator(std::move(r), std::move(out));
}

PureStateVector apply_isometry(const Isometry& v, const PureStateVector& psi) {
    const SpaceLayout& L = psi.layout();
    std::vector<std::string> untouched;
    for (const auto& l : L.labels())
        if (!v.in_layout.has_label(l)) untouched.push_back(l);
    for (const auto& l : v.in_layout.labels())
        require(L.has_label(l), "apply_isometry: state lacks label '" + l + "'");
    for (const auto& l : v.out_layout.labels())
        require(!L.has_label(l) || v.in_layout.has_label(l),
                "apply_isometry: output label '" + l + "' collides");

    std::vector<std::string> order = untouched;
    for (const auto& l : v.in_layout.labels()) order.push_back(l);
    PureStateVector re = permute_subsystems(psi, order);

    int din = v.in_dim();
    int drest = L.total_dim() / din;
    require(L.sublayout(v.in_layout.labels()).total_dim() == din,
            "apply_isometry: input dimension mismatch");

    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        M(re.amplitudes().data(), drest, din);
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R =
        M * v.m.transpose();

    SpaceLayout out_layout =
        (untouched.empty() ? v.out_layout
                           : L.sublayout(untouched).concat(v.out_layout));
    VectorXcd flat = Eigen::Map<const VectorXcd>(R.data(), R.size());
    return PureStateVector(std::move(flat), std::move(out_layout));
}

PureStateVector apply_on(const Operator& op, const PureStateVector& psi,
                         const std::vector<std::string>& on) {
    const SpaceLayout& L = psi.layout();
    std::vector<int> dims;
    for (const auto& l : on) dims.push_back(L.dim_of(l));
    SpaceLayout sub(dims, on);
    require(sub.total_dim() == op.dim(), "apply_on: operator dimension mismatch");
    Isometry v{op.matrix(), sub, sub};
    PureStateVector moved = apply_isometry(v, psi);
    return permute_subsystems(moved, L.labels());
}

Isometry support_isometry(const DensityOperator& rho, const std::string& in_label) {
    EighResult e = eigh(rho.op());
    double lmax = std::max(e.eigenvalues.maxCoeff(), 0.0);
    double cutoff = kKernelCutoff * std::max(lmax, 1e-300);
    int rank = 0;
    for (int i = 0; i < e.eigenvalues.size(); ++i)
        if (e.eigenvalues(i) > cutoff) ++rank;
    rank = std::max(rank, 1);
    MatrixXcd cols = e.eigenvectors.leftCols(rank);
    return Isometry{cols, SpaceLayout::single(rank, in_label), rho.layout()};
}

Complex overlap(const PureStateVector& a, const PureStateVector& b) {
    require(a.layout() == b.layout(), "overlap: layout mismatch");
    return a.amplitudes().dot(b.amplitudes());
}

} // namespace osqit
