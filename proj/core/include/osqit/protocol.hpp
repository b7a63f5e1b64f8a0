#pragma once

#include "osqit/linalg.hpp"
#include "osqit/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osqit {

// --- embezzling states ---------------------------------------------------------

enum class EmbezzlingKind { VanDamHayden, CyclicSum };

/// Bipartite embezzling resource, kept as its exact Schmidt spectrum (both
/// families have computational Schmidt bases). The dense vector is materialized
/// only when the joint dimension fits the dense guard.
struct EmbezzlingState {
    EmbezzlingKind kind;
    int m;               // size parameter
    double delta;        // sqrt(2/m) accuracy guarantee
    int side_dim;        // Schmidt rank (2^m per side)
    std::vector<double> schmidt; // descending probabilities, sum 1
    std::optional<PureStateVector> vector; // when side_dim^2 <= kDimensionGuard
};

/// Guard: side dimension 2^m must stay within kDimensionGuard (m <= 12).
EmbezzlingState build_embezzling_state(EmbezzlingKind kind, int m);

struct EmbezzleResult {
    double achieved_p;   // purified distance after the optimal local alignment
    int log_l;           // ebits extracted
    /// source Schmidt index -> sorted position in the target spectrum
    std::vector<int> index_map;
    /// dense isometries (A and B sides) when the target side dimension is small
    std::optional<std::pair<Isometry, Isometry>> isometries;
};

/// Extract a maximally entangled state of Schmidt rank l (a power of two) by
/// aligning sorted Schmidt coefficients (the optimal local strategy); the
/// achieved distance obeys achieved_p <= delta * log2(l).
EmbezzleResult embezzle_ebits(const EmbezzlingState& mu, int l);

// --- transcripts ----------------------------------------------------------------

struct ProtocolStep {
    enum class Type { LocalAlice, LocalBob, SendQubits, SendCbits, Embezzle };
    Type type;
    std::string what;
    int count = 0;
};

struct ProtocolTranscript {
    std::string kind; // "merge" | "split_maxent" | "split_embezzle"
    std::vector<ProtocolStep> steps;
    int q_total = 0;
    int c_total = 0;
    int e_gain_or_cost = 0;          // cost formula value (gain for merging)
    double achieved_distance = 0.0;  // purified distance of output to target
    bool certified = true;           // every decoupling search met its target
    // split_embezzle diagnostics
    double embezzle_penalty = 0.0;   // max over bands of the exact alignment error
    double protocol_distance = 0.0;  // distance before adding the penalty
    double realized_delta = 0.0;
    int bands_used = 0;
};

std::string transcript_to_json(const ProtocolTranscript& t);

// --- merging / splitting ---------------------------------------------------------

struct ProtocolResult {
    ProtocolTranscript transcript;
    DensityOperator output;          // final global state
    PureStateVector output_vector;   // same state as a (sub)normalized vector
};

/// One-shot merging of the `a` part of a tripartite pure state to the `b`
/// side. The decoupling unitary is the best of `unitary_tries` Haar samples;
/// when none reaches the trace-distance target the run is flagged rather than
/// asserted. Output systems: A1 (Alice ebit half), B1 (Bob ebit half), Bp
/// (moved content, support-restricted), plus the untouched b and r groups.
ProtocolResult state_merging(const PureStateVector& rho_abr, const std::string& a,
                             const std::string& b, const std::string& r, double eps,
                             int unitary_tries, std::uint64_t seed);

/// Splitting with maximally entangled states: the merging circuit run
/// backwards. Transfers `ap` from Alice to a fresh label `b_out`.
ProtocolResult state_splitting_max_ent(const PureStateVector& rho_aapr, const std::string& a,
                                       const std::string& ap, const std::string& r,
                                       double eps, int unitary_tries, std::uint64_t seed,
                                       const std::string& b_out = "B");

// --- eigenvalue banding ------------------------------------------------------------

struct BandingResult {
    std::vector<Operator> projectors;      // P^0 .. P^{Q+1}, summing to 1
    std::vector<double> probabilities;     // tr[P^i rho]
    Isometry w;                            // sum_i P^i (x) |i>, A' -> A' (x) I
    int q_bands;                           // Q = ceil(2 log2|A'| - 1)
};

/// Dyadic eigenvalue bands [2^-(i+1), 2^-i] with the boundary 2^-i assigned to
/// band i; band Q+1 collects eigenvalues at or below |A'|^-2 plus the kernel.
BandingResult eigenvalue_banding(const DensityOperator& rho_ap);

struct SplitEmbezzleOptions {
    double eps = 0.25;
    double eps_prime = 0.0; // smoothing for the max-information term
    double delta = 0.1;     // requested embezzling accuracy (capped by the guard)
    int unitary_tries = 64;
    std::uint64_t seed = 0;
};

struct SplitEmbezzleResult {
    ProtocolTranscript transcript;
    DensityOperator output;
    PureStateVector output_vector;
    double q_bound;          // 0.5 Imax^{eps'}(A':R) + 2 log(1/eps) + 4 + loglog|A'|
    double distance_bound;   // eps + eps' + delta log2|A'| + |A'|^{-1/2}
    double imax_term;        // the (smoothed) max-information used in the bound
};

/// Full banded splitting protocol with an embezzling resource. Certified runs
/// satisfy transcript.q_total <= q_bound and achieved_distance <=
/// distance_bound with the realized delta.
SplitEmbezzleResult state_splitting_embezzling(const PureStateVector& rho_aapr,
                                               const std::string& a, const std::string& ap,
                                               const std::string& r,
                                               const SplitEmbezzleOptions& opt);

// --- converse audit ------------------------------------------------------------------

struct AuditReport {
    double imax_br;      // max-information of the final B:R state
    double bound;        // 2 * q_total
    bool pass;           // imax_br <= bound + 1e-4
};

AuditReport converse_audit(const ProtocolTranscript& t, const DensityOperator& final_state,
                           const std::string& b, const std::string& r);

// --- teleportation -------------------------------------------------------------------

struct TeleportAccounting {
    int cbits; // 2q
    int ebits; // q
};

TeleportAccounting teleport_accounting(int qubits);

/// Executable one-qubit teleportation: attach a fresh ebit, Bell-measure the
/// (input, Alice-half) pair, apply the Pauli correction, and sum the branches.
/// With perfect ebits the composite map is the identity to 1e-10.
DensityOperator teleport_qubit(const DensityOperator& rho, const std::string& label);

} // namespace osqit
