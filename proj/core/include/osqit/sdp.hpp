#pragma once

#include "osqit/operators.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace osqit {

/// Conic program over Hermitian PSD matrix variables and nonnegative scalars,
/// with affine equality and PSD-inequality constraints. Solved by a primal-dual
/// path-following interior-point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector. Complex Hermitian variables are handled by the
/// real-symmetric embedding
///     H  ->  [[Re H, -Im H], [Im H, Re H]]   (coefficients scaled by 1/2),
/// which doubles eigenvalue multiplicities and is the single source of truth
/// for complex data entering the solver.
class SdpProblem {
public:
    struct Var {
        int id = -1;
    };

    /// Hermitian PSD matrix variable of complex dimension `dim`.
    Var add_psd_variable(const std::string& name, int dim);
    /// Nonnegative scalar variable (1x1 real block).
    Var add_scalar_variable(const std::string& name);

    /// A variable's appearance inside a matrix-valued affine expression:
    /// out(p,q) += sum of coeff * X(r,s) over the listed entries.
    struct Placement {
        Var var;
        struct Entry {
            int p, q, r, s;
            Complex coeff;
        };
        std::vector<Entry> entries;
    };

    // Common placements on a target constraint space of dimension `dim_out`.
    static Placement place_identity(Var v, int dim, Complex scale = 1.0);
    /// out = fixed_left (x) X   (X lives on the right factor)
    static Placement place_tensor_left(const MatrixXcd& fixed_left, Var v, int dim_right);
    /// out = X (x) fixed_right
    static Placement place_tensor_right(Var v, int dim_left, const MatrixXcd& fixed_right);
    /// out = scalar * fixed (X is 1x1)
    static Placement place_scaled(Var scalar, const MatrixXcd& fixed);
    /// out(p,q) += X(p + row_off, q + col_off): extract a diagonal block of X.
    static Placement place_block_of(Var v, int dim_out, int row_off, int col_off);
    /// out = tr_left[X] where X lives on dim_left (x) dim_out.
    static Placement place_partial_trace_left(Var v, int dim_left, int dim_out);
    /// out = tr_right[X] where X lives on dim_out (x) dim_right.
    static Placement place_partial_trace_right(Var v, int dim_out, int dim_right);
    /// out = tr_left[(fixed_left (x) 1) X]  with X on dim(fixed) (x) dim_out.
    static Placement place_sandwich_trace_left(const MatrixXcd& fixed_left, Var v, int dim_out);
    /// out = scale * (tr_right[X] (x) fixed_right) with X on dim_left (x) dim(fixed).
    static Placement place_trace_right_tensor(Var v, int dim_left, const MatrixXcd& fixed_right,
                                              Complex scale = 1.0);
    /// Multiply every coefficient of a placement.
    static Placement scaled(Placement p, Complex factor);

    /// sum placements(X) + constant = 0, entrywise (must be Hermitian-valued).
    void add_matrix_eq(const std::vector<Placement>& terms, const MatrixXcd& constant);
    /// sum placements(X) + constant >= 0 in the PSD order (adds a slack block).
    void add_psd_ineq(const std::vector<Placement>& terms, const MatrixXcd& constant);

    struct ScalarTerm {
        Var var;
        MatrixXcd coeff; // Hermitian; <coeff, X>
    };
    void add_scalar_eq(const std::vector<ScalarTerm>& terms, double rhs);
    /// sum <coeff, X> <= rhs  (adds a slack scalar)
    void add_scalar_le(const std::vector<ScalarTerm>& terms, double rhs);
    /// sum <coeff, X> >= rhs
    void add_scalar_ge(const std::vector<ScalarTerm>& terms, double rhs);

    /// Objective: optimize sum <coeff_j, X_j> + offset.
    void set_objective(const std::vector<ScalarTerm>& terms, double offset = 0.0,
                       bool maximize = false);

    int num_variables() const { return static_cast<int>(vars_.size()); }
    int total_complex_dim() const;

private:
    friend struct SdpCompiler;
    struct VarInfo {
        std::string name;
        int dim;      // complex dimension (1 for scalars)
        bool is_real; // scalars are real 1x1 blocks
    };
    struct MatrixConstraint {
        std::vector<Placement> terms;
        MatrixXcd constant;
        bool psd_slack; // inequality turned into equality with a PSD slack
    };
    struct ScalarConstraint {
        std::vector<ScalarTerm> terms;
        double rhs;
        int slack_sign; // 0 equality, +1 for <=, -1 for >=
    };

    std::vector<VarInfo> vars_;
    std::vector<MatrixConstraint> matrix_constraints_;
    std::vector<ScalarConstraint> scalar_constraints_;
    std::vector<ScalarTerm> objective_;
    double objective_offset_ = 0.0;
    bool maximize_ = false;
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations };

struct SdpSolution {
    SdpStatus status = SdpStatus::MaxIterations;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;       // |primal - dual|
    double primal_residual = 0.0;   // relative equality-constraint violation
    double dual_residual = 0.0;
    int iterations = 0;
    std::map<int, MatrixXcd> variable_values; // keyed by Var::id

    const MatrixXcd& value(SdpProblem::Var v) const { return variable_values.at(v.id); }
    double scalar_value(SdpProblem::Var v) const { return variable_values.at(v.id)(0, 0).real(); }
};

struct SdpOptions {
    double gap_tol = 1e-9;
    double feas_tol = 1e-10;
    int max_iterations = 200;
    bool verbose = false;
};

/// Total variable dimension is guarded (kSdpDimensionGuard); exceeding it
/// raises ResourceError. Numerical failure returns MaxIterations with the best
/// iterate rather than throwing.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Monotone bisection against a feasibility oracle (feasible above the
/// threshold). Validates the bracket: oracle(hi) must be feasible and
/// oracle(lo) infeasible, otherwise an argument error is thrown.
double bisection_feasibility(const std::function<bool(double)>& oracle, double lo, double hi,
                             double tol);

} // namespace osqit
