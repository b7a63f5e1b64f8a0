#include "osqit/entropy.hpp"

#include "osqit/errors.hpp"
#include "osqit/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace osqit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Spectrum {
    VectorXd lam; // descending
    MatrixXcd vecs;
    double cutoff;
    int rank;
};

Spectrum psd_spectrum(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    int d = static_cast<int>(m.rows());
    Spectrum s;
    s.lam = es.eigenvalues().reverse();
    s.vecs = MatrixXcd(d, d);
    for (int i = 0; i < d; ++i) s.vecs.col(i) = es.eigenvectors().col(d - 1 - i);
    double lmax = std::max(s.lam.maxCoeff(), 0.0);
    s.cutoff = kKernelCutoff * std::max(lmax, 1e-300);
    s.rank = 0;
    for (int i = 0; i < d; ++i)
        if (s.lam(i) > s.cutoff) ++s.rank;
    return s;
}

MatrixXcd support_projector(const Spectrum& s) {
    int d = static_cast<int>(s.lam.size());
    MatrixXcd p = MatrixXcd::Zero(d, d);
    for (int i = 0; i < s.rank; ++i) p += s.vecs.col(i) * s.vecs.col(i).adjoint();
    return p;
}

bool support_contained(const MatrixXcd& rho, const Spectrum& sigma_spec) {
    MatrixXcd pker = MatrixXcd::Identity(rho.rows(), rho.cols()) - support_projector(sigma_spec);
    double leak = (pker * rho * pker).trace().real();
    return leak <= 1e-9 * std::max(1.0, rho.trace().real());
}

// tr[rho log2 sigma] over sigma's support (caller guarantees containment).
double trace_log2(const MatrixXcd& rho, const Spectrum& sig) {
    double s = 0.0;
    for (int i = 0; i < sig.lam.size(); ++i) {
        if (sig.lam(i) <= sig.cutoff) continue;
        double w = (sig.vecs.col(i).adjoint() * rho * sig.vecs.col(i))(0, 0).real();
        s += w * std::log2(sig.lam(i));
    }
    return s;
}

} // namespace

BipartiteView arrange_bipartite(const DensityOperator& rho, const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
    std::vector<std::string> order = a;
    order.insert(order.end(), b.begin(), b.end());
    require(static_cast<int>(order.size()) == rho.layout().num_subsystems(),
            "bipartite arrangement: label groups must cover the layout");
    Operator re = permute_subsystems(rho.op(), order);
    BipartiteView v;
    v.dim_a = rho.layout().dim_of_set(a);
    v.dim_b = rho.layout().dim_of_set(b);
    v.layout = re.layout();
    v.matrix = re.matrix();
    return v;
}

EntropyValue von_neumann(const DensityOperator& rho) {
    require(std::abs(rho.trace() - 1.0) <= 1e-8,
            "von Neumann entropy requires a normalized state");
    Spectrum s = psd_spectrum(rho.matrix());
    double h = 0.0;
    for (int i = 0; i < s.lam.size(); ++i)
        if (s.lam(i) > s.cutoff) h -= s.lam(i) * std::log2(s.lam(i));
    return {h, EntropyKind::VonNeumann, std::nullopt, true};
}

EntropyValue relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    require(rho.layout() == sigma.layout(), "relative entropy: layout mismatch");
    Spectrum ss = psd_spectrum(sigma.matrix());
    if (!support_contained(rho.matrix(), ss))
        return {kInf, EntropyKind::Relative, std::nullopt, true};
    Spectrum rs = psd_spectrum(rho.matrix());
    double t1 = 0.0;
    for (int i = 0; i < rs.lam.size(); ++i)
        if (rs.lam(i) > rs.cutoff) t1 += rs.lam(i) * std::log2(rs.lam(i));
    double t2 = trace_log2(rho.matrix(), ss);
    return {t1 - t2, EntropyKind::Relative, std::nullopt, true};
}

EntropyValue conditional_entropy(const DensityOperator& rho, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
    require(std::abs(rho.trace() - 1.0) <= 1e-8,
            "conditional entropy requires a normalized state");
    BipartiteView v = arrange_bipartite(rho, a, b);
    DensityOperator arranged(v.matrix, v.layout);
    DensityOperator rho_b = partial_trace(arranged, b);
    MatrixXcd sig = Eigen::kroneckerProduct(MatrixXcd::Identity(v.dim_a, v.dim_a),
                                            rho_b.matrix());
    Spectrum ss = psd_spectrum(sig);
    Spectrum rs = psd_spectrum(v.matrix);
    double t1 = 0.0;
    for (int i = 0; i < rs.lam.size(); ++i)
        if (rs.lam(i) > rs.cutoff) t1 += rs.lam(i) * std::log2(rs.lam(i));
    double d = t1 - trace_log2(v.matrix, ss);
    return {-d, EntropyKind::Conditional, std::nullopt, true};
}

EntropyValue mutual_information(const DensityOperator& rho, const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
    require(std::abs(rho.trace() - 1.0) <= 1e-8,
            "mutual information requires a normalized state");
    BipartiteView v = arrange_bipartite(rho, a, b);
    DensityOperator arranged(v.matrix, v.layout);
    DensityOperator rho_a = partial_trace(arranged, a);
    DensityOperator rho_b = partial_trace(arranged, b);
    DensityOperator prod = tensor_product(rho_a, rho_b);
    EntropyValue d = relative_entropy(arranged, prod);
    return {d.value, EntropyKind::MutualInformation, std::nullopt, true};
}

EntropyValue d_max(const DensityOperator& rho, const DensityOperator& sigma) {
    require(rho.layout() == sigma.layout(), "d_max: layout mismatch");
    Spectrum ss = psd_spectrum(sigma.matrix());
    if (!support_contained(rho.matrix(), ss)) return {kInf, EntropyKind::DMax, std::nullopt, true};
    MatrixXcd si = matrix_function_psd(sigma.matrix(), OpFunc::PseudoInversePower, 0.5);
    MatrixXcd m = si * rho.matrix() * si;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return {std::log2(std::max(es.eigenvalues().maxCoeff(), 1e-300)), EntropyKind::DMax,
            std::nullopt, true};
}

EntropyValue d_min(const DensityOperator& rho, const DensityOperator& sigma) {
    require(rho.layout() == sigma.layout(), "d_min: layout mismatch");
    Spectrum rs = psd_spectrum(rho.matrix());
    double t = (support_projector(rs) * sigma.matrix()).trace().real();
    if (t < 1e-12) return {kInf, EntropyKind::DMin, std::nullopt, true};
    return {-std::log2(t), EntropyKind::DMin, std::nullopt, true};
}

namespace {

// Restrict a bipartite matrix to the supports of its marginals; valid for both
// the conditional min-entropy and the max-information SDPs.
struct Restricted {
    MatrixXcd matrix;
    MatrixXcd iso_a, iso_b; // embeddings back into the original factors
    int dim_a, dim_b;
};

Restricted restrict_supports(const MatrixXcd& rho, int da, int db, bool restrict_a) {
    MatrixXcd rho_a = MatrixXcd::Zero(da, da), rho_b = MatrixXcd::Zero(db, db);
    for (int a = 0; a < da; ++a)
        for (int ap = 0; ap < da; ++ap)
            for (int b = 0; b < db; ++b) rho_a(a, ap) += rho(a * db + b, ap * db + b);
    for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp)
            for (int a = 0; a < da; ++a) rho_b(b, bp) += rho(a * db + b, a * db + bp);
    Spectrum sa = psd_spectrum(rho_a), sb = psd_spectrum(rho_b);
    Restricted r;
    r.iso_a = restrict_a ? sa.vecs.leftCols(std::max(sa.rank, 1)).eval()
                         : MatrixXcd::Identity(da, da).eval();
    r.iso_b = sb.vecs.leftCols(std::max(sb.rank, 1));
    MatrixXcd emb = Eigen::kroneckerProduct(r.iso_a, r.iso_b);
    r.matrix = emb.adjoint() * rho * emb;
    r.dim_a = static_cast<int>(r.iso_a.cols());
    r.dim_b = static_cast<int>(r.iso_b.cols());
    return r;
}

} // namespace

EntropyValue h_min_cond(const DensityOperator& rho, const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::optional<DensityOperator>& sigma_b) {
    BipartiteView v;
    if (b.empty()) {
        DensityOperator rho_a =
            (static_cast<int>(a.size()) == rho.layout().num_subsystems())
                ? rho
                : partial_trace(rho, a);
        v = BipartiteView{rho_a.matrix(), rho_a.dim(), 1, rho_a.layout()};
    } else {
        v = arrange_bipartite(rho, a, b);
    }

    if (v.dim_b == 1) {
        // trivial conditioning system: Hmin(A) = -log2 ||rho_A||_inf
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(v.matrix, Eigen::EigenvaluesOnly);
        return {-std::log2(std::max(es.eigenvalues().maxCoeff(), 1e-300)),
                EntropyKind::HMinUnconditional, std::nullopt, true};
    }

    if (sigma_b) {
        require(std::abs(sigma_b->trace() - 1.0) <= 1e-8,
                "h_min_cond: sigma_b must be normalized");
        MatrixXcd sig = Eigen::kroneckerProduct(MatrixXcd::Identity(v.dim_a, v.dim_a),
                                                sigma_b->matrix());
        SpaceLayout flat = SpaceLayout::single(v.dim_a * v.dim_b, "AB");
        EntropyValue dm = d_max(DensityOperator(v.matrix, flat),
                                DensityOperator(Operator(sig / sig.trace().real(), flat)));
        // renormalization: Dmax(rho || c*sigma) = Dmax(rho||sigma) - log2 c
        double c = sig.trace().real();
        double val = dm.value - std::log2(c);
        return {-val, EntropyKind::HMinRel, std::nullopt, true};
    }

    Restricted r = restrict_supports(v.matrix, v.dim_a, v.dim_b, /*restrict_a=*/false);
    SdpProblem p;
    auto x = p.add_psd_variable("X", r.dim_a * r.dim_b);
    p.set_objective({{x, r.matrix}}, 0.0, /*maximize=*/true);
    p.add_matrix_eq({SdpProblem::place_partial_trace_left(x, r.dim_a, r.dim_b)},
                    -MatrixXcd::Identity(r.dim_b, r.dim_b));
    SdpSolution s = solve_sdp(p);
    require(s.status != SdpStatus::Infeasible, "h_min_cond: SDP reported infeasible");
    EntropyValue out{-std::log2(std::max(s.primal_value, 1e-300)), EntropyKind::HMinCond,
                     s.duality_gap, s.status == SdpStatus::Optimal};
    return out;
}

EntropyValue h_collision(const DensityOperator& rho, const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
    BipartiteView v = arrange_bipartite(rho, a, b);
    int da = v.dim_a, db = v.dim_b;

    MatrixXcd rho_b = MatrixXcd::Zero(db, db);
    for (int i = 0; i < db; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < da; ++k) rho_b(i, j) += v.matrix(k * db + i, k * db + j);

    auto objective = [&](const MatrixXcd& g) {
        // sigma = exp(G)/tr exp(G); returns the collision trace functional
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
        VectorXd ex = es.eigenvalues().array().exp();
        MatrixXcd sigma = es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().adjoint();
        sigma /= sigma.trace().real();
        MatrixXcd s4 = matrix_function_psd(sigma, OpFunc::PseudoInversePower, 0.25);
        MatrixXcd big = Eigen::kroneckerProduct(MatrixXcd::Identity(da, da), s4);
        MatrixXcd m = big * v.matrix * big;
        return (m * m).trace().real();
    };

    // Unconstrained descent in the Hermitian log-parameters with a central-
    // difference gradient; the landscape is low-dimensional at desk scale.
    auto descend = [&](MatrixXcd g) {
        double f = objective(g);
        const double h = 1e-5;
        for (int it = 0; it < 80; ++it) {
            MatrixXcd grad = MatrixXcd::Zero(db, db);
            for (int i = 0; i < db; ++i)
                for (int j = i; j < db; ++j) {
                    MatrixXcd e = MatrixXcd::Zero(db, db);
                    if (i == j) {
                        e(i, i) = 1.0;
                    } else {
                        e(i, j) = e(j, i) = 1.0;
                    }
                    MatrixXcd gp = g + h * e, gm = g - h * e;
                    double de = (objective(gp) - objective(gm)) / (2 * h);
                    grad += 0.5 * de * e;
                    if (i != j) {
                        MatrixXcd ei = MatrixXcd::Zero(db, db);
                        ei(i, j) = Complex(0, 1);
                        ei(j, i) = Complex(0, -1);
                        MatrixXcd gpi = g + h * ei, gmi = g - h * ei;
                        double dei = (objective(gpi) - objective(gmi)) / (2 * h);
                        grad += 0.5 * dei * ei;
                    }
                }
            double gn = grad.norm();
            if (gn < 1e-10) break;
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 25; ++ls) {
                MatrixXcd cand = g - step * grad;
                double fc = objective(cand);
                if (fc < f - 1e-14) {
                    g = cand;
                    f = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return f;
    };

    double best = kInf;
    // analytic candidate sigma = rho_B, plus random restarts
    {
        MatrixXcd reg = rho_b / std::max(rho_b.trace().real(), 1e-12) +
                        1e-8 * MatrixXcd::Identity(db, db);
        best = std::min(best, descend(matrix_function_psd(reg, OpFunc::Log2) * std::log(2.0)));
    }
    CounterRng rng(0x48C011A, 17);
    for (int k = 0; k < 8; ++k) {
        CounterRng r = rng.substream(k);
        MatrixXcd g(db, db);
        for (int i = 0; i < db; ++i)
            for (int j = 0; j < db; ++j) g(i, j) = r.complex_gaussian();
        g = 0.5 * (g + g.adjoint()).eval();
        best = std::min(best, descend(g));
    }
    bool ok = std::isfinite(best) && best > 0;
    return {ok ? -std::log2(best) : kInf, EntropyKind::HCollision, std::nullopt, ok};
}

SpectralEntropies spectral_entropies(const DensityOperator& rho) {
    Spectrum s = psd_spectrum(rho.matrix());
    require(s.rank >= 1 && s.lam(0) > 1e-300, "spectral entropies: zero operator");
    SpectralEntropies out;
    double sq = 0.0, lmin = kInf;
    for (int i = 0; i < s.lam.size(); ++i) {
        if (s.lam(i) <= s.cutoff) continue;
        sq += std::sqrt(s.lam(i));
        lmin = std::min(lmin, s.lam(i));
    }
    out.h_max = 2.0 * std::log2(sq);
    out.h_0 = std::log2(static_cast<double>(s.rank));
    out.h_r = -std::log2(lmin);
    out.h_min = -std::log2(s.lam(0));
    return out;
}

namespace {
struct ImaxOut {
    double value;
    MatrixXcd sigma;
    bool optimal;
    double gap;
};
ImaxOut imax_with_sigma(const MatrixXcd& rho, int da, int db);
} // namespace

EntropyValue i_max(const DensityOperator& rho, const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
    BipartiteView v = arrange_bipartite(rho, a, b);
    ImaxOut out = imax_with_sigma(v.matrix, v.dim_a, v.dim_b);
    return {out.value, EntropyKind::IMax, out.gap, out.optimal};
}

TruncationResult truncate_spectrum(const DensityOperator& rho, double eps) {
    require(eps > 0.0 && eps < 1.0, "truncate_spectrum: eps must lie in (0,1)");
    Spectrum s = psd_spectrum(rho.matrix());
    double total = rho.trace();

    // analyze ascending nonzero eigenvalues; dropping is free below the cutoff
    std::vector<int> order; // indices ascending by eigenvalue, stable among ties
    for (int i = static_cast<int>(s.lam.size()) - 1; i >= 0; --i)
        if (s.lam(i) > s.cutoff) order.push_back(i);

    double kept = total;
    int dropped = 0;
    double achieved = 0.0;
    for (int idx : order) {
        double cand_kept = kept - s.lam(idx);
        double f = cand_kept + std::sqrt(std::max(0.0, 1.0 - total) *
                                         std::max(0.0, 1.0 - cand_kept));
        double pd = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, f) * std::min(1.0, f)));
        if (pd <= eps) {
            kept = cand_kept;
            achieved = pd;
            ++dropped;
        } else {
            break;
        }
    }

    int d = rho.dim();
    MatrixXcd proj = MatrixXcd::Zero(d, d);
    for (int i = 0; i < static_cast<int>(order.size()) - dropped; ++i) {
        int col = order[order.size() - 1 - i]; // largest first
        proj += s.vecs.col(col) * s.vecs.col(col).adjoint();
    }
    MatrixXcd trunc = proj * rho.matrix() * proj;
    trunc = 0.5 * (trunc + trunc.adjoint()).eval();
    return {Operator(proj, rho.layout()), DensityOperator(trunc, rho.layout()), dropped,
            achieved};
}

// --- smoothing ---------------------------------------------------------------

namespace {

struct SmoothHminOut {
    double value;
    MatrixXcd witness;
    double gap;
    bool optimal;
};

// Smooth conditional min-entropy as a single SDP. The ball constraint enters
// through the block-matrix characterization of fidelity plus a 2x2 block for
// the generalized-fidelity trace term; the ball is enforced with a tiny inner
// margin so returned witnesses sit strictly inside it.
SmoothHminOut smooth_hmin_sdp(const MatrixXcd& rho, int da, int db, double eps) {
    int d = da * db;
    SdpProblem p;
    auto m = p.add_psd_variable("M", 2 * d);
    auto y = p.add_psd_variable("Y", db);
    auto t = p.add_psd_variable("T", 2);

    // bottom-right block pinned to rho
    p.add_matrix_eq({SdpProblem::place_block_of(m, d, d, d)}, -rho);
    // 1_A (x) Y - rho_tilde >= 0
    p.add_psd_ineq({SdpProblem::place_tensor_left(MatrixXcd::Identity(da, da), y, db),
                    SdpProblem::scaled(SdpProblem::place_block_of(m, d, 0, 0), -1.0)},
                   MatrixXcd::Zero(d, d));
    // trace slack: T00 = 1 - tr rho_tilde, T11 = 1 - tr rho
    MatrixXcd ktrace = MatrixXcd::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) ktrace(i, i) = 1.0;
    MatrixXcd e00 = MatrixXcd::Zero(2, 2), e11 = MatrixXcd::Zero(2, 2), e01 = MatrixXcd::Zero(2, 2);
    e00(0, 0) = 1.0;
    e11(1, 1) = 1.0;
    e01(0, 1) = e01(1, 0) = 0.5;
    p.add_scalar_eq({{m, ktrace}, {t, e00}}, 1.0);
    p.add_scalar_eq({{t, e11}}, std::max(0.0, 1.0 - rho.trace().real()));
    // generalized fidelity at least sqrt(1-eps^2) (with inner margin)
    MatrixXcd eoff = MatrixXcd::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) eoff(i, d + i) = eoff(d + i, i) = 0.5;
    double need = std::sqrt(std::max(0.0, 1.0 - eps * eps)) + 1e-9;
    p.add_scalar_ge({{m, eoff}, {t, e01}}, need);

    p.set_objective({{y, MatrixXcd::Identity(db, db)}});
    SdpSolution s = solve_sdp(p);
    require(s.status != SdpStatus::Infeasible, "smooth min-entropy: SDP reported infeasible");

    MatrixXcd mfull = s.value(m);
    MatrixXcd witness = mfull.topLeftCorner(d, d);
    witness = 0.5 * (witness + witness.adjoint()).eval();
    return {-std::log2(std::max(s.primal_value, 1e-300)), witness, s.duality_gap,
            s.status == SdpStatus::Optimal};
}

// Exact max-information together with the optimal sigma_B (primal form; the
// inequality-slack dual stalls on degenerate instances).
ImaxOut imax_with_sigma(const MatrixXcd& rho, int da, int db) {
    Restricted r = restrict_supports(rho, da, db, true);
    MatrixXcd rho_a = MatrixXcd::Zero(r.dim_a, r.dim_a);
    for (int i = 0; i < r.dim_a; ++i)
        for (int j = 0; j < r.dim_a; ++j)
            for (int k = 0; k < r.dim_b; ++k)
                rho_a(i, j) += r.matrix(i * r.dim_b + k, j * r.dim_b + k);
    SdpProblem p;
    auto x = p.add_psd_variable("X", r.dim_b);
    p.set_objective({{x, MatrixXcd::Identity(r.dim_b, r.dim_b)}});
    p.add_psd_ineq({SdpProblem::place_tensor_left(rho_a, x, r.dim_b)}, -r.matrix);
    SdpSolution s = solve_sdp(p);
    require(s.status != SdpStatus::Infeasible, "i_max: SDP reported infeasible");
    MatrixXcd sig = s.value(x);
    double tr = std::max(sig.trace().real(), 1e-300);
    // embed sigma back into the unrestricted B space
    MatrixXcd sigma_full = r.iso_b * (sig / tr) * r.iso_b.adjoint();
    return {std::log2(tr), sigma_full, s.status == SdpStatus::Optimal, s.duality_gap};
}

// Witness step of the smooth max-information alternation: with sigma and
// lambda fixed, maximize the generalized fidelity to rho subject to
// lambda * (tr_B rho_tilde) (x) sigma >= rho_tilde. Returns the achieved
// fidelity and the candidate witness.
struct WitnessOut {
    double fbar;
    MatrixXcd witness;
};

WitnessOut imax_witness_step(const MatrixXcd& rho, int da, int db, const MatrixXcd& sigma,
                             double lambda) {
    int d = da * db;
    SdpProblem p;
    auto m = p.add_psd_variable("M", 2 * d);
    auto t = p.add_psd_variable("T", 2);
    p.add_matrix_eq({SdpProblem::place_block_of(m, d, d, d)}, -rho);
    p.add_psd_ineq({SdpProblem::place_trace_right_tensor(m, da, sigma, lambda),
                    SdpProblem::scaled(SdpProblem::place_block_of(m, d, 0, 0), -1.0)},
                   MatrixXcd::Zero(d, d));
    MatrixXcd ktrace = MatrixXcd::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) ktrace(i, i) = 1.0;
    MatrixXcd e00 = MatrixXcd::Zero(2, 2), e11 = MatrixXcd::Zero(2, 2), e01 = MatrixXcd::Zero(2, 2);
    e00(0, 0) = 1.0;
    e11(1, 1) = 1.0;
    e01(0, 1) = e01(1, 0) = 0.5;
    p.add_scalar_eq({{m, ktrace}, {t, e00}}, 1.0);
    p.add_scalar_eq({{t, e11}}, std::max(0.0, 1.0 - rho.trace().real()));
    MatrixXcd eoff = MatrixXcd::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) eoff(i, d + i) = eoff(d + i, i) = 0.5;
    p.set_objective({{m, eoff}, {t, e01}}, 0.0, /*maximize=*/true);
    SdpSolution s = solve_sdp(p);
    MatrixXcd w = s.value(m).topLeftCorner(d, d);
    w = 0.5 * (w + w.adjoint()).eval();
    return {s.primal_value, w};
}

DensityOperator to_density(const MatrixXcd& m, const SpaceLayout& layout) {
    // clip tiny negative round-off so witnesses stay valid density operators
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    double tr = lam.sum();
    if (tr > 1.0) lam *= (1.0 - 1e-12) / tr;
    MatrixXcd fixed =
        es.eigenvectors() * lam.asDiagonal().toDenseMatrix().cast<Complex>() *
        es.eigenvectors().adjoint();
    return DensityOperator(Operator(fixed, layout));
}

} // namespace

SmoothEntropyValue smooth_quantity(SmoothKind kind, const DensityOperator& rho, double eps,
                                   const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
    require(eps >= 0.0 && eps < 1.0, "smooth_quantity: eps must lie in [0,1)");

    if (kind == SmoothKind::HMax) {
        DensityOperator rho_a =
            (a.size() == rho.layout().labels().size()) ? rho : partial_trace(rho, a);
        if (eps == 0.0) {
            return {0.0, spectral_entropies(rho_a).h_max, BoundDirection::Exact, rho_a, true,
                    std::nullopt};
        }
        // duality: Hmax^eps(A) = -Hmin^eps(A|C) on a purification psi_AC
        PureStateVector psi = purification(rho_a, "_C");
        BipartiteView v = arrange_bipartite(psi.projector(), rho_a.layout().labels(), {"_C"});
        SmoothHminOut out = smooth_hmin_sdp(v.matrix, v.dim_a, v.dim_b, eps);
        SmoothEntropyValue r;
        r.epsilon = eps;
        r.value = -out.value;
        r.bound_direction = BoundDirection::Exact;
        r.converged = out.optimal;
        r.sdp_gap = out.gap;
        // The SDP witness lives on A (x) C; its A-marginal is returned only
        // when it reproduces the value (the duality guarantees the value, not
        // the marginal's optimality).
        SpaceLayout flat = SpaceLayout::single(v.dim_a * v.dim_b, "AC");
        DensityOperator wit_ac = to_density(out.witness, flat);
        MatrixXcd wa = MatrixXcd::Zero(v.dim_a, v.dim_a);
        for (int i = 0; i < v.dim_a; ++i)
            for (int j = 0; j < v.dim_a; ++j)
                for (int k = 0; k < v.dim_b; ++k)
                    wa(i, j) += wit_ac.matrix()(i * v.dim_b + k, j * v.dim_b + k);
        DensityOperator wit_a = to_density(wa, rho_a.layout());
        double hm = 2.0 * std::log2(std::max(
                              matrix_function_psd(wit_a.matrix(), OpFunc::Sqrt).trace().real(),
                              1e-300));
        if (std::abs(hm - r.value) < 1e-5 &&
            purified_distance(wit_a, rho_a) <= eps + 1e-7) {
            r.witness = wit_a;
        }
        return r;
    }

    BipartiteView v = arrange_bipartite(rho, a, b);
    SpaceLayout flat_ab = v.layout;

    if (kind == SmoothKind::HMinCond) {
        if (eps == 0.0) {
            EntropyValue e = h_min_cond(rho, a, b);
            return {0.0, e.value, BoundDirection::Exact, rho, e.converged, e.sdp_gap};
        }
        SmoothHminOut out = smooth_hmin_sdp(v.matrix, v.dim_a, v.dim_b, eps);
        SmoothEntropyValue r;
        r.epsilon = eps;
        r.value = out.value;
        r.bound_direction = BoundDirection::Exact;
        r.converged = out.optimal;
        r.sdp_gap = out.gap;
        DensityOperator wit = to_density(out.witness, flat_ab);
        DensityOperator arranged(v.matrix, flat_ab);
        if (purified_distance(wit, arranged) <= eps + 1e-7) r.witness = wit;
        return r;
    }

    // SmoothKind::IMax: alternating optimization, certified upper bound.
    ImaxOut exact = imax_with_sigma(v.matrix, v.dim_a, v.dim_b);
    if (eps == 0.0) {
        return {0.0, exact.value, BoundDirection::Exact, rho, exact.optimal, exact.gap};
    }

    DensityOperator arranged(v.matrix, flat_ab);
    double trace = arranged.trace();
    SmoothEntropyValue r;
    r.epsilon = eps;
    r.bound_direction = BoundDirection::Upper;
    if (trace <= eps * eps + 1e-12) {
        // the zero operator lies inside the ball and has divergent (negative)
        // max-information; report it honestly
        r.value = -kInf;
        r.witness = to_density(MatrixXcd::Zero(v.matrix.rows(), v.matrix.cols()), flat_ab);
        return r;
    }

    double best_val = exact.value;
    DensityOperator best_witness = arranged;
    MatrixXcd sigma = exact.sigma;
    bool converged = true;

    for (int round = 0; round < 2; ++round) {
        double hi = std::pow(2.0, best_val) * (1.0 + 1e-9) + 1e-12;
        double lo = 0.9;
        if (hi <= lo * 1.01) break;
        double need = std::sqrt(std::max(0.0, 1.0 - eps * eps)) + 1e-9;
        MatrixXcd best_round_witness;
        bool found = false;
        auto oracle = [&](double lam) {
            WitnessOut w = imax_witness_step(v.matrix, v.dim_a, v.dim_b, sigma, lam);
            if (w.fbar >= need) {
                best_round_witness = w.witness;
                found = true;
                return true;
            }
            return false;
        };
        if (!oracle(hi)) {
            converged = false; // sigma from the previous round no longer certifies
            break;
        }
        double tol = std::max(1e-4, 5e-3 * hi);
        double lam_lo = lo, lam_hi = hi;
        while (lam_hi - lam_lo > tol) {
            double mid = 0.5 * (lam_lo + lam_hi);
            if (oracle(mid)) {
                lam_hi = mid;
            } else {
                lam_lo = mid;
            }
        }
        if (!found) break;
        DensityOperator wit = to_density(best_round_witness, flat_ab);
        if (purified_distance(wit, arranged) > eps + 1e-7) {
            converged = false;
            break;
        }
        ImaxOut refit = imax_with_sigma(wit.matrix(), v.dim_a, v.dim_b);
        if (refit.value < best_val - 1e-9) {
            best_val = refit.value;
            best_witness = wit;
            sigma = refit.sigma;
        } else {
            break;
        }
    }

    r.value = best_val;
    r.witness = best_witness;
    r.converged = converged;
    return r;
}

} // namespace osqit
