#pragma once

#include "osqit/operators.hpp"
#include "osqit/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osqit {

/// Schur-average coefficients for the twirl of 1_{A2A2'} (x) F_{A1A1'}:
/// a_pm = (|A2| +- |A1|)/(|A| +- 1).
struct TwirlCoefficients {
    double a_plus;
    double a_minus;
    /// (a+ + a-)/2 * 1 + (a+ - a-)/2 * F on A (x) A', for direct comparison.
    Operator assembled;
};

TwirlCoefficients exact_twirl_coefficients(int dim_a1, int dim_a2);

/// Right-hand side of the one-shot decoupling condition:
/// (log|A| + Hmin(A|R)) / 2 - log(1/eps).
double decoupling_threshold(const DensityOperator& rho_ar, const std::vector<std::string>& a,
                            const std::vector<std::string>& r, double eps);

struct PurityReport {
    double bound;        // tr[rho_R^2]/|A1| + tr[rho_AR^2]/|A2|
    double monte_carlo;  // sampled Haar average of tr[sigma_{A1R}(U)^2]
    double std_error;
    std::optional<double> exact_haar; // computed via the exact twirl when |A| <= 8
    bool within_bound;                // monte_carlo <= bound + 3 std errors
};

PurityReport expected_purity(const DensityOperator& rho_ar, const std::vector<std::string>& a,
                             const std::vector<std::string>& r, int dim_a1, int dim_a2,
                             int samples, std::uint64_t seed);

struct DecouplingConfig {
    DensityOperator rho_ar;
    std::vector<std::string> a_labels;
    std::vector<std::string> r_labels;
    int dim_a1 = 1;
    int dim_a2 = 1;
    double eps = 0.25;
    int samples = 2000;
    std::uint64_t seed = 0;
    bool keep_samples = false;
};

struct DecouplingStats {
    double mean_trace_distance = 0.0;
    double std_error = 0.0;
    double threshold_log_a1 = 0.0; // decoupling_threshold value
    bool threshold_satisfied = false;
    bool pass = true; // mean <= eps + 3 sigma whenever the threshold holds
    std::vector<double> per_sample;
};

/// Monte-Carlo average of || sigma_{A1R}(U) - 1/|A1| (x) rho_R ||_1 over Haar
/// unitaries on A. The bound is asserted only when log2|A1| satisfies the
/// threshold; otherwise the run is reported as a diagnostic.
DecouplingStats decoupling_experiment(const DecouplingConfig& cfg);

/// Reduced state tr_{A2}[(U (x) 1_R) rho (U (x) 1_R)^dag]; A is split row-major
/// with A1 the most significant factor.
MatrixXcd decoupled_block(const MatrixXcd& rho_ar_arranged, const MatrixXcd& u, int dim_a1,
                          int dim_a2, int dim_r);

std::string decoupling_stats_to_json(const DecouplingConfig& cfg, const DecouplingStats& st);

} // namespace osqit
