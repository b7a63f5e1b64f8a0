#pragma once

#include "osqit/linalg.hpp"
#include "osqit/operators.hpp"

namespace osqit {

/// Distance and fidelity measures on (sub)normalized states.
struct DistanceReport {
    double fidelity;             // ||sqrt(rho) sqrt(sigma)||_1
    double generalized_fidelity; // fidelity + sqrt((1-tr rho)(1-tr sigma))
    double purified_distance;    // sqrt(1 - generalized_fidelity^2)
    double trace_distance;       // ||rho - sigma||_1, no 1/2 factor
};

/// ||sqrt(rho) sqrt(sigma)||_1, computed through the spectrum of
/// sqrt(rho) sigma sqrt(rho) (PSD-safe and symmetric).
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

double generalized_fidelity(const DensityOperator& rho, const DensityOperator& sigma);

/// sqrt(1 - generalized_fidelity^2); a metric on subnormalized states.
double purified_distance(const DensityOperator& rho, const DensityOperator& sigma);
double purified_distance(const PureStateVector& a, const PureStateVector& b);

/// ||rho - sigma||_1 (the convention without the 1/2 factor).
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);
double trace_norm(const MatrixXcd& m);

DistanceReport distance_report(const DensityOperator& rho, const DensityOperator& sigma);

/// Isometry V from E1 (or its support) to E2 maximizing |<phi|(1_S (x) V)|psi>|,
/// for psi on S (x) E1 and phi on S (x) E2. The achieved overlap equals the
/// fidelity of the two S-marginals. `s_labels` names the shared part.
struct UhlmannResult {
    Isometry v;              // E1 -> E2
    double achieved_overlap; // = F(tr_E1 psi, tr_E2 phi)
};

UhlmannResult uhlmann_isometry(const PureStateVector& psi, const PureStateVector& phi,
                               const std::vector<std::string>& s_labels);

} // namespace osqit
