#pragma once

#include "osqit/operators.hpp"
#include "osqit/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace osqit {

/// Rectangular map between composite spaces with V^dagger V = identity on the
/// input (or on a subspace of it, for partial isometries; see is_full).
struct Isometry {
    MatrixXcd m;
    SpaceLayout in_layout;
    SpaceLayout out_layout;

    int in_dim() const { return static_cast<int>(m.cols()); }
    int out_dim() const { return static_cast<int>(m.rows()); }
    bool is_full(double tol = kStructuralTol) const;
};

Operator tensor_product(const Operator& a, const Operator& b);
PureStateVector tensor_product(const PureStateVector& a, const PureStateVector& b);
DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b);

/// Trace out every subsystem not named in `keep`; result keeps the original order.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);
Operator partial_trace(const Operator& op, const std::vector<std::string>& keep);

/// Reduced state of a pure vector on the `keep` subsystems.
DensityOperator marginal(const PureStateVector& psi, const std::vector<std::string>& keep);

struct EighResult {
    VectorXd eigenvalues;   // descending
    MatrixXcd eigenvectors; // columns match eigenvalue order
};

/// Hermitian eigendecomposition, eigenvalues sorted descending.
EighResult eigh(const Operator& op);

enum class OpFunc { Sqrt, Log2, Power, PseudoInversePower };

/// Apply f to the spectrum on the support only; kernel eigenvalues map to zero
/// (generalized-inverse convention, cutoff kKernelCutoff * lambda_max).
Operator operator_function(const DensityOperator& rho, OpFunc f, double p = 1.0);
MatrixXcd matrix_function_psd(const MatrixXcd& m, OpFunc f, double p = 1.0);

/// Haar-distributed unitary: Ginibre sample followed by QR with the diagonal
/// of R phase-normalized.
Operator haar_unitary(int d, CounterRng& rng,
                      const std::optional<SpaceLayout>& layout = std::nullopt);

/// Purification with purifying dimension rank(rho); appends `purifier_label`.
PureStateVector purification(const DensityOperator& rho,
                             const std::string& purifier_label = "_P");

struct SwapProjectors {
    Operator swap;     // F on d x d, F^2 = 1, tr F = d
    Operator sym;      // (1 + F)/2, rank d(d+1)/2
    Operator antisym;  // (1 - F)/2, rank d(d-1)/2
};

SwapProjectors swap_and_projectors(int d);

/// Projector onto the symmetric subspace of (C^d)^{tensor n}; rank C(n+d-1, n).
/// Guarded: d^n <= kDimensionGuard.
Operator symmetric_subspace_projector(int d, int n);

/// Unitary permuting tensor factors: |i_1..i_n> -> |i_{pi^-1(1)}..i_{pi^-1(n)}>,
/// so that compose(pi, sigma) maps to the matrix product.
Operator permutation_operator(int d, int n, const std::vector<int>& perm);

// --- sampling -------------------------------------------------------------

PureStateVector random_pure_state(const SpaceLayout& layout, CounterRng& rng);
/// Mixed state of the given rank (defaults to full rank) via a traced purification.
DensityOperator random_density_operator(const SpaceLayout& layout, CounterRng& rng,
                                        int rank = 0);
/// Random subnormalized state: random density scaled by a uniform trace in (0, 1].
DensityOperator random_subnormalized(const SpaceLayout& layout, CounterRng& rng);

// --- composite-system plumbing ---------------------------------------------

/// Reorder tensor factors; `order` must be a permutation of the labels.
PureStateVector permute_subsystems(const PureStateVector& psi,
                                   const std::vector<std::string>& order);
Operator permute_subsystems(const Operator& op, const std::vector<std::string>& order);

/// Apply V to the subsystems named by V.in_layout's labels; those factors are
/// replaced by V.out_layout's, appended after the untouched factors (original
/// order). Use permute_subsystems to canonicalize afterwards.
PureStateVector apply_isometry(const Isometry& v, const PureStateVector& psi);

/// Square operator acting on a label subset (ordered as op.layout), identity
/// elsewhere; layout preserved.
PureStateVector apply_on(const Operator& op, const PureStateVector& psi,
                         const std::vector<std::string>& on);

/// Isometry onto the support of rho (kernel cutoff relative to lambda_max):
/// columns are the support eigenvectors. in: C^rank, out: rho's space.
Isometry support_isometry(const DensityOperator& rho, const std::string& in_label);

/// Overlap <a|b>; layouts must agree.
Complex overlap(const PureStateVector& a, const PureStateVector& b);

} // namespace osqit
