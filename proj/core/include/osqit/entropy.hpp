#pragma once

#include "osqit/linalg.hpp"
#include "osqit/operators.hpp"
#include "osqit/sdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace osqit {

enum class EntropyKind {
    VonNeumann,
    Relative,
    Conditional,
    MutualInformation,
    DMax,
    DMin,
    HMinCond,
    HMinRel,
    HCollision,
    HMax,
    H0,
    HR,
    HMinUnconditional,
    IMax,
};

/// All values are in bits; +infinity is represented by the IEEE infinity.
struct EntropyValue {
    double value = 0.0;
    EntropyKind kind = EntropyKind::VonNeumann;
    std::optional<double> sdp_gap; // certificate when an SDP was solved
    bool converged = true;         // false when an inner optimizer was flagged

    operator double() const { return value; }
};

EntropyValue von_neumann(const DensityOperator& rho);

/// +infinity when supp(rho) is not contained in supp(sigma).
EntropyValue relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

EntropyValue conditional_entropy(const DensityOperator& rho, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b);

EntropyValue mutual_information(const DensityOperator& rho, const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

/// Max-relative entropy log2 ||sigma^{-1/2} rho sigma^{-1/2}||_inf with
/// generalized inverses; +infinity outside the support.
EntropyValue d_max(const DensityOperator& rho, const DensityOperator& sigma);

/// Min-relative entropy -log2 tr[rho^0 sigma].
EntropyValue d_min(const DensityOperator& rho, const DensityOperator& sigma);

/// Conditional min-entropy of A given B. With sigma_b given, evaluates
/// -Dmax(rho_AB || 1 (x) sigma_b) directly; otherwise solves the SDP. A
/// trivial B group yields -log2 ||rho_A||_inf.
EntropyValue h_min_cond(const DensityOperator& rho, const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::optional<DensityOperator>& sigma_b = std::nullopt);

/// Conditional collision entropy; the inner minimization over sigma_B runs a
/// multi-start projected-gradient descent, so the reported value is exact up
/// to optimizer tolerance (converged=false flags a stalled inner search).
EntropyValue h_collision(const DensityOperator& rho, const std::vector<std::string>& a,
                         const std::vector<std::string>& b);

struct SpectralEntropies {
    double h_max;  // 2 log2 tr sqrt(rho)
    double h_0;    // log2 rank
    double h_r;    // -log2 (smallest nonzero eigenvalue)
    double h_min;  // -log2 (largest eigenvalue)
};

SpectralEntropies spectral_entropies(const DensityOperator& rho);

/// Max-information that B has about A (asymmetric; optimized over sigma_B).
EntropyValue i_max(const DensityOperator& rho, const std::vector<std::string>& a,
                   const std::vector<std::string>& b);

struct TruncationResult {
    Operator projector;      // onto the kept eigenspace
    DensityOperator truncated;
    int dropped;             // number of eigenvalues removed
    double distance;         // P(rho, Pi rho Pi), exact for the commuting truncation
};

/// Drop the smallest eigenvalues (greedy, stable among ties) while the purified
/// distance to the truncation stays within eps.
TruncationResult truncate_spectrum(const DensityOperator& rho, double eps);

enum class SmoothKind { HMinCond, HMax, IMax };
enum class BoundDirection { Upper, Lower, Exact };

struct SmoothEntropyValue {
    double epsilon = 0.0;
    double value = 0.0;
    BoundDirection bound_direction = BoundDirection::Exact;
    std::optional<DensityOperator> witness; // in-ball state certifying the value
    bool converged = true;
    std::optional<double> sdp_gap;
};

/// Smooth entropy measures over the purified-distance ball of subnormalized
/// states. HMinCond and HMax are solved as single convex SDPs (the ball enters
/// through the block-matrix fidelity characterization; HMax goes through the
/// min-entropy duality on a purification). IMax runs an alternating
/// optimization (witness step / sigma step inside a lambda bisection) and
/// reports a certified upper bound together with the witness.
SmoothEntropyValue smooth_quantity(SmoothKind kind, const DensityOperator& rho, double eps,
                                   const std::vector<std::string>& a,
                                   const std::vector<std::string>& b = {});

// Internal helper shared with protocol code: rearranges rho so the `a` group
// forms the left tensor factor and `b` the right one.
struct BipartiteView {
    MatrixXcd matrix;
    int dim_a;
    int dim_b;
    SpaceLayout layout; // a-labels then b-labels
};
BipartiteView arrange_bipartite(const DensityOperator& rho, const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

} // namespace osqit
