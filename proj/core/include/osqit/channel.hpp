#pragma once

#include "osqit/linalg.hpp"
#include "osqit/operators.hpp"
#include "osqit/rng.hpp"

#include <string>
#include <vector>

namespace osqit {

/// CPTP map stored as a Kraus family (rectangular matrices out_dim x in_dim).
class QuantumChannel {
public:
    QuantumChannel() = default;
    /// Validates trace preservation: sum K^dag K = 1 to 1e-9.
    QuantumChannel(std::vector<MatrixXcd> kraus, SpaceLayout in_layout, SpaceLayout out_layout);

    const std::vector<MatrixXcd>& kraus() const { return kraus_; }
    const SpaceLayout& in_layout() const { return in_layout_; }
    const SpaceLayout& out_layout() const { return out_layout_; }
    int in_dim() const { return in_layout_.total_dim(); }
    int out_dim() const { return out_layout_.total_dim(); }

    MatrixXcd apply_matrix(const MatrixXcd& rho) const;
    /// Adjoint (Heisenberg-picture) action sum K^dag X K.
    MatrixXcd apply_adjoint(const MatrixXcd& x) const;

private:
    std::vector<MatrixXcd> kraus_;
    SpaceLayout in_layout_;
    SpaceLayout out_layout_;
};

// --- constructors -------------------------------------------------------------

QuantumChannel identity_channel(int d, const std::string& label = "A");
/// rho -> (1-p) rho + p I/d
QuantumChannel depolarizing_channel(double p, const std::string& label = "A");
/// rho -> (1-p) rho + p Z rho Z (qubit)
QuantumChannel dephasing_channel(double p, const std::string& label = "A");
/// Haar-random channel with the given environment dimension (random isometry).
QuantumChannel random_channel(int d_in, int d_out, int env_dim, CounterRng& rng,
                              const std::string& in_label = "A",
                              const std::string& out_label = "B");
QuantumChannel channel_from_isometry(const Isometry& v);

// --- representations ----------------------------------------------------------

/// Choi matrix arranged OUT (x) IN: J = sum_{ij} E(|i><j|) (x) |i><j|.
MatrixXcd choi_matrix(const QuantumChannel& e);
QuantumChannel channel_from_choi(const MatrixXcd& j, const SpaceLayout& in_layout,
                                 const SpaceLayout& out_layout);
/// Minimal Kraus family via the Choi spectrum.
QuantumChannel kraus_rank_reduce(const QuantumChannel& e);

struct StinespringIsometry {
    Isometry v;   // in -> out (x) env
    int env_dim;  // number of Kraus operators after rank reduction (<= |A||B|)
};

StinespringIsometry stinespring_dilation(const QuantumChannel& e);
/// Environment output tr_B[V rho V^dag] of the dilation.
QuantumChannel complementary_channel(const QuantumChannel& e);

// --- composition --------------------------------------------------------------

QuantumChannel compose_channels(const QuantumChannel& after, const QuantumChannel& before);
QuantumChannel tensor_channels(const QuantumChannel& a, const QuantumChannel& b);

/// (E (x) id)(rho) acting on the `on` labels (ordered as E's input layout).
/// The result carries E's output labels as the leading factors, followed by
/// the untouched labels in their original order.
DensityOperator apply_channel(const QuantumChannel& e, const DensityOperator& rho,
                              const std::vector<std::string>& on);

// --- diamond norm ---------------------------------------------------------------

struct DiamondNormResult {
    double value;            // || E - F ||_diamond, in [0, 2] for channel pairs
    MatrixXcd input_weight;  // the optimizing reference-side weight sigma
    double sdp_gap;
    bool optimal;
};

/// Diamond-norm distance of two channels with equal layouts (SDP on the Choi
/// matrix of the difference; the stabilizing reference has the input dimension).
DiamondNormResult diamond_norm(const QuantumChannel& e, const QuantumChannel& f);
/// Same, for an arbitrary Hermitian-preserving difference given by its Choi
/// matrix (OUT (x) IN) with tr_out J = 0.
DiamondNormResult diamond_norm_choi(const MatrixXcd& j, int d_in, int d_out);

// --- entanglement-assisted capacity --------------------------------------------

struct CapacityResult {
    double value;           // bits
    DensityOperator argmax; // maximizing input state
    double stationarity;    // norm of the projected gradient at the optimum
    bool converged;
};

/// max over inputs of I(B:R) on (E (x) id) applied to a purification of rho.
/// Concave objective maximized by multi-start exponentiated gradient ascent.
CapacityResult entanglement_assisted_capacity(const QuantumChannel& e, double tol = 1e-6);

// --- serialization ---------------------------------------------------------------

/// JSON schema: {"kraus": [[[ [re,im], ... ] row ] matrix], "in_dims": [...],
/// "out_dims": [...], "in_labels": [...], "out_labels": [...]}
std::string channel_to_json(const QuantumChannel& e);
QuantumChannel channel_from_json(const std::string& text);

} // namespace osqit
