#include "osqit/sdp.hpp"

#include "osqit/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <iostream>
#include <map>

namespace osqit {

// --- builder ----------------------------------------------------------------

SdpProblem::Var SdpProblem::add_psd_variable(const std::string& name, int dim) {
    require(dim >= 1, "sdp: variable dimension must be positive");
    vars_.push_back({name, dim, false});
    return Var{static_cast<int>(vars_.size()) - 1};
}

SdpProblem::Var SdpProblem::add_scalar_variable(const std::string& name) {
    vars_.push_back({name, 1, true});
    return Var{static_cast<int>(vars_.size()) - 1};
}

int SdpProblem::total_complex_dim() const {
    int t = 0;
    for (const auto& v : vars_) t += v.dim;
    return t;
}

SdpProblem::Placement SdpProblem::place_identity(Var v, int dim, Complex scale) {
    Placement p{v, {}};
    p.entries.reserve(static_cast<std::size_t>(dim) * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) p.entries.push_back({i, j, i, j, scale});
    return p;
}

SdpProblem::Placement SdpProblem::place_tensor_left(const MatrixXcd& A, Var v, int dim_right) {
    Placement p{v, {}};
    int da = static_cast<int>(A.rows());
    for (int a = 0; a < da; ++a)
        for (int ap = 0; ap < da; ++ap) {
            Complex c = A(a, ap);
            if (std::abs(c) < 1e-300) continue;
            for (int b = 0; b < dim_right; ++b)
                for (int bp = 0; bp < dim_right; ++bp)
                    p.entries.push_back({a * dim_right + b, ap * dim_right + bp, b, bp, c});
        }
    return p;
}

SdpProblem::Placement SdpProblem::place_tensor_right(Var v, int dim_left, const MatrixXcd& B) {
    Placement p{v, {}};
    int db = static_cast<int>(B.rows());
    for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp) {
            Complex c = B(b, bp);
            if (std::abs(c) < 1e-300) continue;
            for (int a = 0; a < dim_left; ++a)
                for (int ap = 0; ap < dim_left; ++ap)
                    p.entries.push_back({a * db + b, ap * db + bp, a, ap, c});
        }
    return p;
}

SdpProblem::Placement SdpProblem::place_scaled(Var scalar, const MatrixXcd& fixed) {
    Placement p{scalar, {}};
    int d = static_cast<int>(fixed.rows());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (std::abs(fixed(i, j)) < 1e-300) continue;
            p.entries.push_back({i, j, 0, 0, fixed(i, j)});
        }
    return p;
}

SdpProblem::Placement SdpProblem::place_block_of(Var v, int dim_out, int row_off, int col_off) {
    Placement p{v, {}};
    for (int i = 0; i < dim_out; ++i)
        for (int j = 0; j < dim_out; ++j)
            p.entries.push_back({i, j, i + row_off, j + col_off, 1.0});
    return p;
}

SdpProblem::Placement SdpProblem::place_partial_trace_left(Var v, int dim_left, int dim_out) {
    Placement p{v, {}};
    for (int b = 0; b < dim_out; ++b)
        for (int bp = 0; bp < dim_out; ++bp)
            for (int a = 0; a < dim_left; ++a)
                p.entries.push_back({b, bp, a * dim_out + b, a * dim_out + bp, 1.0});
    return p;
}

SdpProblem::Placement SdpProblem::place_partial_trace_right(Var v, int dim_out, int dim_right) {
    Placement p{v, {}};
    for (int a = 0; a < dim_out; ++a)
        for (int ap = 0; ap < dim_out; ++ap)
            for (int b = 0; b < dim_right; ++b)
                p.entries.push_back({a, ap, a * dim_right + b, ap * dim_right + b, 1.0});
    return p;
}

SdpProblem::Placement SdpProblem::place_sandwich_trace_left(const MatrixXcd& F, Var v,
                                                            int dim_out) {
    Placement p{v, {}};
    int da = static_cast<int>(F.rows());
    for (int b = 0; b < dim_out; ++b)
        for (int bp = 0; bp < dim_out; ++bp)
            for (int a = 0; a < da; ++a)
                for (int ap = 0; ap < da; ++ap) {
                    Complex c = F(a, ap);
                    if (std::abs(c) < 1e-300) continue;
                    p.entries.push_back({b, bp, ap * dim_out + b, a * dim_out + bp, c});
                }
    return p;
}

SdpProblem::Placement SdpProblem::place_trace_right_tensor(Var v, int dim_left,
                                                           const MatrixXcd& F, Complex scale) {
    Placement p{v, {}};
    int db = static_cast<int>(F.rows());
    for (int a = 0; a < dim_left; ++a)
        for (int ap = 0; ap < dim_left; ++ap)
            for (int b = 0; b < db; ++b)
                for (int bp = 0; bp < db; ++bp) {
                    Complex c = scale * F(b, bp);
                    if (std::abs(c) < 1e-300) continue;
                    for (int cidx = 0; cidx < db; ++cidx)
                        p.entries.push_back({a * db + b, ap * db + bp, a * db + cidx,
                                             ap * db + cidx, c});
                }
    return p;
}

SdpProblem::Placement SdpProblem::scaled(Placement p, Complex factor) {
    for (auto& e : p.entries) e.coeff *= factor;
    return p;
}

void SdpProblem::add_matrix_eq(const std::vector<Placement>& terms, const MatrixXcd& constant) {
    matrix_constraints_.push_back({terms, constant, false});
}

void SdpProblem::add_psd_ineq(const std::vector<Placement>& terms, const MatrixXcd& constant) {
    int d = static_cast<int>(constant.rows());
    Var slack = add_psd_variable("_mslack" + std::to_string(matrix_constraints_.size()), d);
    std::vector<Placement> t = terms;
    t.push_back(place_identity(slack, d, -1.0));
    matrix_constraints_.push_back({std::move(t), constant, true});
}

void SdpProblem::add_scalar_eq(const std::vector<ScalarTerm>& terms, double rhs) {
    scalar_constraints_.push_back({terms, rhs, 0});
}

void SdpProblem::add_scalar_le(const std::vector<ScalarTerm>& terms, double rhs) {
    Var slack = add_scalar_variable("_sslack" + std::to_string(scalar_constraints_.size()));
    std::vector<ScalarTerm> t = terms;
    t.push_back({slack, MatrixXcd::Identity(1, 1)});
    scalar_constraints_.push_back({std::move(t), rhs, 1});
}

void SdpProblem::add_scalar_ge(const std::vector<ScalarTerm>& terms, double rhs) {
    Var slack = add_scalar_variable("_sslack" + std::to_string(scalar_constraints_.size()));
    std::vector<ScalarTerm> t = terms;
    t.push_back({slack, -MatrixXcd::Identity(1, 1)});
    scalar_constraints_.push_back({std::move(t), rhs, -1});
}

void SdpProblem::set_objective(const std::vector<ScalarTerm>& terms, double offset,
                               bool maximize) {
    objective_ = terms;
    objective_offset_ = offset;
    maximize_ = maximize;
}

// --- compilation to real-embedded standard form ------------------------------

namespace {

struct RealTriplet {
    int p, q;
    double v;
};

struct CompiledConstraint {
    // expanded triplets per block (every (p,q) listed individually)
    std::vector<std::pair<int, std::vector<RealTriplet>>> blocks;
    double rhs;
};

using Eigen::MatrixXd;

// Real-symmetric embedding of a complex Hermitian coefficient, scaled by 1/2 so
// that <embed(A), embed(X)> = <A, X>.
void embed_entry(int d, int r, int s, Complex a, std::vector<RealTriplet>& out) {
    double re = 0.5 * a.real();
    double im = 0.5 * a.imag();
    if (re != 0.0) {
        out.push_back({r, s, re});
        out.push_back({r + d, s + d, re});
    }
    if (im != 0.0) {
        out.push_back({r, s + d, -im});
        out.push_back({r + d, s, im});
    }
}

} // namespace

struct SdpCompiler {
    const SdpProblem& p;
    std::vector<int> real_dim;   // per variable block
    std::vector<int> complex_dim;
    std::vector<bool> var_is_real;
    std::vector<CompiledConstraint> cons;
    std::vector<MatrixXd> C;     // dense real objective blocks
    double sign = 1.0;           // -1 when maximizing
    double offset = 0.0;

    explicit SdpCompiler(const SdpProblem& prob) : p(prob) { compile(); }

    void add_complex_coeff(std::map<int, std::map<std::pair<int, int>, Complex>>& acc, int var,
                           int r, int s, Complex c) {
        // Hermitian accumulation: Re(c * X[r,s]) = <A, X> with
        // A[s,r] += c/2, A[r,s] += conj(c)/2.
        acc[var][{s, r}] += 0.5 * c;
        acc[var][{r, s}] += 0.5 * std::conj(c);
    }

    void finish_constraint(const std::map<int, std::map<std::pair<int, int>, Complex>>& acc,
                           double rhs) {
        CompiledConstraint cc;
        cc.rhs = rhs;
        bool any = false;
        for (const auto& [var, entries] : acc) {
            std::vector<RealTriplet> trips;
            const auto& info_dim = p.vars_[var].dim;
            bool is_real = p.vars_[var].is_real;
            for (const auto& [rs, a] : entries) {
                if (std::abs(a) < 1e-14) continue;
                if (is_real) {
                    trips.push_back({rs.first, rs.second, a.real()});
                } else {
                    embed_entry(info_dim, rs.first, rs.second, a, trips);
                }
            }
            if (!trips.empty()) {
                cc.blocks.emplace_back(var, std::move(trips));
                any = true;
            }
        }
        if (!any) {
            require(std::abs(rhs) < 1e-12, "sdp: inconsistent constraint with zero coefficients");
            return; // vacuous row, skip
        }
        cons.push_back(std::move(cc));
    }

    void compile() {
        real_dim.resize(p.vars_.size());
        complex_dim.resize(p.vars_.size());
        var_is_real.resize(p.vars_.size());
        for (std::size_t j = 0; j < p.vars_.size(); ++j) {
            real_dim[j] = p.vars_[j].is_real ? p.vars_[j].dim : 2 * p.vars_[j].dim;
            complex_dim[j] = p.vars_[j].dim;
            var_is_real[j] = p.vars_[j].is_real;
        }

        // scalar constraints
        for (const auto& sc : p.scalar_constraints_) {
            std::map<int, std::map<std::pair<int, int>, Complex>> acc;
            for (const auto& term : sc.terms) {
                const MatrixXcd& K = term.coeff;
                for (int r = 0; r < K.rows(); ++r)
                    for (int s = 0; s < K.cols(); ++s) {
                        Complex k = K(r, s);
                        if (std::abs(k) < 1e-300) continue;
                        // <K, X> = sum K[r,s] X[s,r]  -> coefficient on X[s,r]
                        add_complex_coeff(acc, term.var.id, s, r, k);
                    }
            }
            finish_constraint(acc, sc.rhs);
        }

        // matrix constraints, scalarized over the Hermitian basis
        for (const auto& mc : p.matrix_constraints_) {
            int D = static_cast<int>(mc.constant.rows());
            for (int a = 0; a < D; ++a)
                for (int b = a; b < D; ++b) {
                    // Re equation
                    {
                        std::map<int, std::map<std::pair<int, int>, Complex>> acc;
                        for (const auto& term : mc.terms)
                            for (const auto& e : term.entries)
                                if (e.p == a && e.q == b)
                                    add_complex_coeff(acc, term.var.id, e.r, e.s, e.coeff);
                        finish_constraint(acc, -mc.constant(a, b).real());
                    }
                    if (b > a) { // Im equation
                        std::map<int, std::map<std::pair<int, int>, Complex>> acc;
                        for (const auto& term : mc.terms)
                            for (const auto& e : term.entries)
                                if (e.p == a && e.q == b)
                                    add_complex_coeff(acc, term.var.id, e.r, e.s,
                                                      Complex(0, -1) * e.coeff);
                        finish_constraint(acc, -mc.constant(a, b).imag());
                    }
                }
        }

        // objective
        sign = p.maximize_ ? -1.0 : 1.0;
        offset = p.objective_offset_;
        C.resize(p.vars_.size());
        for (std::size_t j = 0; j < p.vars_.size(); ++j)
            C[j] = MatrixXd::Zero(real_dim[j], real_dim[j]);
        for (const auto& term : p.objective_) {
            int j = term.var.id;
            const MatrixXcd& K = term.coeff;
            if (p.vars_[j].is_real) {
                C[j](0, 0) += sign * K(0, 0).real();
            } else {
                int d = p.vars_[j].dim;
                for (int r = 0; r < d; ++r)
                    for (int s = 0; s < d; ++s) {
                        Complex a = K(r, s); // Hermitian coefficient
                        C[j](r, s) += sign * 0.5 * a.real();
                        C[j](r + d, s + d) += sign * 0.5 * a.real();
                        C[j](r, s + d) += sign * 0.5 * -a.imag();
                        C[j](r + d, s) += sign * 0.5 * a.imag();
                    }
            }
        }
    }
};

// --- interior-point solver ---------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double block_inner(const std::vector<RealTriplet>& trips, const MatrixXd& X) {
    double s = 0.0;
    for (const auto& t : trips) s += t.v * X(t.p, t.q);
    return s;
}

// Largest step alpha with X + alpha * D staying PSD (fraction to boundary applied
// by the caller). Uses the Cholesky factor of X.
double max_step(const MatrixXd& X, const MatrixXd& D) {
    Eigen::LLT<MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) {
        MatrixXd Xj = X;
        Xj.diagonal().array() += 1e-13 * (1.0 + X.diagonal().cwiseAbs().maxCoeff());
        llt.compute(Xj);
        if (llt.info() != Eigen::Success) return 0.0;
    }
    MatrixXd L = llt.matrixL();
    MatrixXd S = L.triangularView<Eigen::Lower>().solve(D);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-13) return 1e30;
    return -1.0 / lmin;
}

} // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
    require_resource(problem.total_complex_dim() <= kSdpDimensionGuard,
                     "sdp: total variable dimension exceeds the solver guard");
    SdpCompiler comp(problem);

    const int nb = static_cast<int>(comp.real_dim.size());
    const int m = static_cast<int>(comp.cons.size());
    require(m >= 1, "sdp: problem has no constraints");

    std::vector<MatrixXd> X(nb), Z(nb);
    int ntot = 0;
    for (int j = 0; j < nb; ++j) {
        X[j] = MatrixXd::Identity(comp.real_dim[j], comp.real_dim[j]);
        Z[j] = MatrixXd::Identity(comp.real_dim[j], comp.real_dim[j]);
        ntot += comp.real_dim[j];
    }
    VectorXd b(m);
    for (int i = 0; i < m; ++i) b(i) = comp.cons[i].rhs;

    double cnorm = 1.0;
    for (int j = 0; j < nb; ++j) cnorm = std::max(cnorm, comp.C[j].cwiseAbs().maxCoeff());
    double tau_p = std::max(10.0, 2.0 * b.cwiseAbs().maxCoeff());
    double tau_d = std::max(10.0, 2.0 * cnorm);
    for (int j = 0; j < nb; ++j) {
        X[j] *= tau_p;
        Z[j] *= tau_d;
    }
    VectorXd y = VectorXd::Zero(m);

    auto apply_A = [&](const std::vector<MatrixXd>& XX) {
        VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (const auto& [blk, trips] : comp.cons[i].blocks) s += block_inner(trips, XX[blk]);
            r(i) = s;
        }
        return r;
    };
    auto apply_At = [&](const VectorXd& yy, std::vector<MatrixXd>& out) {
        for (int j = 0; j < nb; ++j) out[j].setZero();
        for (int i = 0; i < m; ++i) {
            double yi = yy(i);
            if (yi == 0.0) continue;
            for (const auto& [blk, trips] : comp.cons[i].blocks)
                for (const auto& t : trips) out[blk](t.p, t.q) += yi * t.v;
        }
    };

    std::vector<MatrixXd> Aty(nb), rd(nb), W(nb), Zinv(nb), WRW(nb), Rc(nb);
    std::vector<MatrixXd> dXa(nb), dZa(nb), dX(nb), dZ(nb);
    for (int j = 0; j < nb; ++j) {
        Aty[j] = MatrixXd::Zero(comp.real_dim[j], comp.real_dim[j]);
        rd[j] = dXa[j] = dZa[j] = dX[j] = dZ[j] = W[j] = Zinv[j] = WRW[j] = Rc[j] = Aty[j];
    }

    SdpSolution sol;
    double best_score = 1e300;
    std::vector<MatrixXd> bestX = X;
    double best_pobj = 0, best_dobj = 0, best_pinf = 1e300, best_dinf = 1e300, best_gap = 1e300;
    MatrixXd schur(m, m);
    VectorXd rp(m);

    int iter = 0;
    int stall = 0;
    for (iter = 0; iter < options.max_iterations; ++iter) {
        rp = b - apply_A(X);
        apply_At(y, Aty);
        double dinf = 0.0;
        for (int j = 0; j < nb; ++j) {
            rd[j] = comp.C[j] - Z[j] - Aty[j];
            dinf = std::max(dinf, rd[j].cwiseAbs().maxCoeff());
        }
        double mu = 0.0;
        for (int j = 0; j < nb; ++j) mu += (X[j].array() * Z[j].array()).sum();
        mu /= ntot;

        double pobj = 0.0;
        for (int j = 0; j < nb; ++j) pobj += (comp.C[j].array() * X[j].array()).sum();
        double dobj = b.dot(y);
        double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        // residuals measured relative to data and iterate scale (SDPT3 style)
        double xscale = 0.0, zscale = 0.0;
        for (int j = 0; j < nb; ++j) {
            xscale = std::max(xscale, X[j].cwiseAbs().maxCoeff());
            zscale = std::max(zscale, Z[j].cwiseAbs().maxCoeff());
        }
        double pinf = rp.norm() / (1.0 + b.norm() + xscale);
        double dinf_rel = dinf / (1.0 + cnorm + zscale);

        if (options.verbose)
            std::cerr << "iter " << iter << " mu=" << mu << " gap=" << relgap << " pinf=" << pinf
                      << " dinf=" << dinf_rel << "\n";

        double score = std::max({relgap, pinf, dinf_rel});
        if (score < best_score) {
            best_score = score;
            bestX = X;
            best_pobj = pobj;
            best_dobj = dobj;
            best_pinf = pinf;
            best_dinf = dinf_rel;
            best_gap = std::abs(pobj - dobj);
        }

        if (relgap <= options.gap_tol && pinf <= options.feas_tol && dinf_rel <= options.feas_tol) {
            sol.status = SdpStatus::Optimal;
            break;
        }
        if (stall >= 3) break;
        // crude divergence heuristic for infeasible problems
        if (dobj > 1e10 * (1.0 + cnorm) && pinf > 1e-6) {
            sol.status = SdpStatus::Infeasible;
            break;
        }

        // Nesterov-Todd scaling point per block
        bool scaling_ok = true;
        for (int j = 0; j < nb; ++j) {
            Eigen::LLT<MatrixXd> lx(X[j]), lz(Z[j]);
            if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
                scaling_ok = false;
                break;
            }
            MatrixXd Lx = lx.matrixL();
            MatrixXd Lz = lz.matrixL();
            Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Lx,
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
            VectorXd sv = svd.singularValues();
            for (int k = 0; k < sv.size(); ++k) sv(k) = 1.0 / std::sqrt(std::max(sv(k), 1e-300));
            MatrixXd G = Lx * svd.matrixV() * sv.asDiagonal();
            W[j] = G * G.transpose();
            Zinv[j] = lz.solve(MatrixXd::Identity(X[j].rows(), X[j].cols()));
        }
        if (!scaling_ok) {
            sol.status = SdpStatus::MaxIterations;
            break;
        }

        // Schur complement M[i,k] = sum_j tr[A_i W A_k W]
        for (int i = 0; i < m; ++i) {
            for (int k = i; k < m; ++k) {
                double s = 0.0;
                // blocks are sorted by id inside each constraint
                auto it1 = comp.cons[i].blocks.begin();
                auto it2 = comp.cons[k].blocks.begin();
                while (it1 != comp.cons[i].blocks.end() && it2 != comp.cons[k].blocks.end()) {
                    if (it1->first < it2->first) {
                        ++it1;
                    } else if (it2->first < it1->first) {
                        ++it2;
                    } else {
                        const MatrixXd& Wj = W[it1->first];
                        for (const auto& t : it1->second)
                            for (const auto& u : it2->second)
                                s += t.v * u.v * Wj(t.q, u.p) * Wj(u.q, t.p);
                        ++it1;
                        ++it2;
                    }
                }
                schur(i, k) = s;
                schur(k, i) = s;
            }
        }
        Eigen::LDLT<MatrixXd> fact(schur);
        if (fact.info() != Eigen::Success || !fact.isPositive()) {
            schur.diagonal().array() += 1e-12 * (1.0 + schur.diagonal().maxCoeff());
            fact.compute(schur);
        }

        auto solve_direction = [&](const std::vector<MatrixXd>& RcIn, std::vector<MatrixXd>& oX,
                                   std::vector<MatrixXd>& oZ, VectorXd& oy) {
            VectorXd rhs = rp;
            std::vector<MatrixXd> tmp(nb);
            for (int j = 0; j < nb; ++j) tmp[j] = W[j] * rd[j] * W[j] - RcIn[j];
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                for (const auto& [blk, trips] : comp.cons[i].blocks)
                    s += block_inner(trips, tmp[blk]);
                rhs(i) += s;
            }
            oy = fact.solve(rhs);
            apply_At(oy, Aty);
            for (int j = 0; j < nb; ++j) {
                oZ[j] = rd[j] - Aty[j];
                oX[j] = RcIn[j] - W[j] * oZ[j] * W[j];
                oX[j] = 0.5 * (oX[j] + oX[j].transpose()).eval();
            }
        };

        // predictor (affine scaling)
        for (int j = 0; j < nb; ++j) Rc[j] = -X[j];
        VectorXd dya(m);
        solve_direction(Rc, dXa, dZa, dya);
        double apa = 1.0, ada = 1.0;
        for (int j = 0; j < nb; ++j) {
            apa = std::min(apa, 0.98 * max_step(X[j], dXa[j]));
            ada = std::min(ada, 0.98 * max_step(Z[j], dZa[j]));
        }
        double mu_aff = 0.0;
        for (int j = 0; j < nb; ++j)
            mu_aff += ((X[j] + apa * dXa[j]).array() * (Z[j] + ada * dZa[j]).array()).sum();
        mu_aff /= ntot;
        double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

        // corrector (Mehrotra second-order term)
        for (int j = 0; j < nb; ++j) {
            MatrixXd corr = dXa[j] * dZa[j] * Zinv[j];
            corr = 0.5 * (corr + corr.transpose()).eval();
            Rc[j] = sigma * mu * Zinv[j] - X[j] - corr;
        }
        VectorXd dy(m);
        solve_direction(Rc, dX, dZ, dy);
        double ap = 1.0, ad = 1.0;
        for (int j = 0; j < nb; ++j) {
            ap = std::min(ap, 0.98 * max_step(X[j], dX[j]));
            ad = std::min(ad, 0.98 * max_step(Z[j], dZ[j]));
        }
        // Guard against complementarity blow-up from overshooting steps.
        auto mu_after = [&](double a_p, double a_d) {
            double s = 0.0;
            for (int j = 0; j < nb; ++j)
                s += ((X[j] + a_p * dX[j]).array() * (Z[j] + a_d * dZ[j]).array()).sum();
            return s / ntot;
        };
        for (int guard = 0; guard < 30 && mu_after(ap, ad) > 10.0 * mu; ++guard) {
            ap *= 0.7;
            ad *= 0.7;
        }
        if (ap < 1e-8 && ad < 1e-8) {
            ++stall;
        } else {
            stall = 0;
        }
        for (int j = 0; j < nb; ++j) {
            X[j] += ap * dX[j];
            Z[j] += ad * dZ[j];
        }
        y += ad * dy;
    }
    sol.iterations = iter;

    // Report the best iterate seen; abnormal exits still count as optimal when
    // the best iterate meets the contract tolerances.
    sol.primal_value = comp.sign * best_pobj + comp.offset;
    sol.dual_value = comp.sign * best_dobj + comp.offset;
    sol.duality_gap = best_gap;
    sol.primal_residual = best_pinf;
    sol.dual_residual = best_dinf;
    if (sol.status != SdpStatus::Optimal && sol.status != SdpStatus::Infeasible) {
        double relgap_best = best_gap / (1.0 + std::abs(best_pobj) + std::abs(best_dobj));
        sol.status = (relgap_best <= 1e-6 && best_pinf <= 1e-7 && best_dinf <= 1e-6)
                         ? SdpStatus::Optimal
                         : SdpStatus::MaxIterations;
    }

    // recover complex variables from the embedded blocks
    for (int j = 0; j < nb; ++j) {
        if (comp.var_is_real[j]) {
            sol.variable_values[j] = bestX[j].cast<Complex>();
        } else {
            int d = comp.complex_dim[j];
            MatrixXcd v(d, d);
            for (int r = 0; r < d; ++r)
                for (int s = 0; s < d; ++s)
                    v(r, s) = Complex(0.5 * (bestX[j](r, s) + bestX[j](r + d, s + d)),
                                      0.5 * (bestX[j](r + d, s) - bestX[j](r, s + d)));
            v = 0.5 * (v + v.adjoint()).eval();
            sol.variable_values[j] = std::move(v);
        }
    }
    return sol;
}

double bisection_feasibility(const std::function<bool(double)>& oracle, double lo, double hi,
                             double tol) {
    require(lo < hi, "bisection: invalid bracket ordering");
    require(tol > 0, "bisection: tolerance must be positive");
    require(oracle(hi), "bisection: upper end of bracket is infeasible");
    require(!oracle(lo), "bisection: lower end of bracket is feasible; bracket invalid");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (oracle(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace osqit
