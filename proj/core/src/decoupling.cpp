#include "osqit/decoupling.hpp"

#include "osqit/entropy.hpp"
#include "osqit/errors.hpp"
#include "osqit/geometry.hpp"
#include "osqit/linalg.hpp"
#include "osqit/parallel.hpp"

#include <json.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace osqit {

TwirlCoefficients exact_twirl_coefficients(int dim_a1, int dim_a2) {
    require(dim_a1 >= 1 && dim_a2 >= 1, "twirl coefficients: dimensions must be positive");
    int d = dim_a1 * dim_a2;
    double a_plus = static_cast<double>(dim_a2 + dim_a1) / (d + 1);
    double a_minus = (d > 1) ? static_cast<double>(dim_a2 - dim_a1) / (d - 1) : 0.0;

    SwapProjectors sp = swap_and_projectors(d);
    MatrixXcd assembled = 0.5 * (a_plus + a_minus) * MatrixXcd::Identity(d * d, d * d) +
                          0.5 * (a_plus - a_minus) * sp.swap.matrix();
    return {a_plus, a_minus, Operator(std::move(assembled), sp.swap.layout())};
}

double decoupling_threshold(const DensityOperator& rho_ar, const std::vector<std::string>& a,
                            const std::vector<std::string>& r, double eps) {
    require(eps > 0.0, "decoupling threshold: eps must be positive");
    double log_a = std::log2(static_cast<double>(rho_ar.layout().dim_of_set(a)));
    double hmin = h_min_cond(rho_ar, a, r).value;
    return 0.5 * (log_a + hmin) - std::log2(1.0 / eps);
}

MatrixXcd decoupled_block(const MatrixXcd& rho, const MatrixXcd& u, int dim_a1, int dim_a2,
                          int dim_r) {
    int da = dim_a1 * dim_a2;
    MatrixXcd big = Eigen::kroneckerProduct(u, MatrixXcd::Identity(dim_r, dim_r));
    MatrixXcd rot = big * rho * big.adjoint();
    // trace out A2 (middle factor of A1 (x) A2 (x) R)
    int dout = dim_a1 * dim_r;
    MatrixXcd out = MatrixXcd::Zero(dout, dout);
    for (int a1 = 0; a1 < dim_a1; ++a1)
        for (int a1p = 0; a1p < dim_a1; ++a1p)
            for (int r0 = 0; r0 < dim_r; ++r0)
                for (int r1 = 0; r1 < dim_r; ++r1) {
                    Complex s = 0.0;
                    for (int a2 = 0; a2 < dim_a2; ++a2)
                        s += rot((a1 * dim_a2 + a2) * dim_r + r0,
                                 (a1p * dim_a2 + a2) * dim_r + r1);
                    out(a1 * dim_r + r0, a1p * dim_r + r1) = s;
                }
    (void)da;
    return out;
}

namespace {

// Arrange rho with the A group leading and return the raw matrix.
MatrixXcd arrange_ar(const DensityOperator& rho, const std::vector<std::string>& a,
                     const std::vector<std::string>& r, int& da, int& dr) {
    std::vector<std::string> order = a;
    order.insert(order.end(), r.begin(), r.end());
    Operator re = permute_subsystems(rho.op(), order);
    da = rho.layout().dim_of_set(a);
    dr = rho.layout().dim_of_set(r);
    return re.matrix();
}

} // namespace

PurityReport expected_purity(const DensityOperator& rho_ar, const std::vector<std::string>& a,
                             const std::vector<std::string>& r, int dim_a1, int dim_a2,
                             int samples, std::uint64_t seed) {
    int da = 0, dr = 0;
    MatrixXcd rho = arrange_ar(rho_ar, a, r, da, dr);
    require(dim_a1 * dim_a2 == da, "expected_purity: split does not divide |A|");

    MatrixXcd rho_r = MatrixXcd::Zero(dr, dr);
    for (int i = 0; i < dr; ++i)
        for (int j = 0; j < dr; ++j)
            for (int k = 0; k < da; ++k) rho_r(i, j) += rho(k * dr + i, k * dr + j);

    PurityReport rep;
    rep.bound = (rho_r * rho_r).trace().real() / dim_a1 + (rho * rho).trace().real() / dim_a2;

    CounterRng rng(seed, 0xDEC0);
    std::vector<double> vals = parallel_map<double>(samples, [&](int i) {
        CounterRng rs = rng.substream(static_cast<std::uint64_t>(i));
        Operator u = haar_unitary(da, rs);
        MatrixXcd sigma = decoupled_block(rho, u.matrix(), dim_a1, dim_a2, dr);
        return (sigma * sigma).trace().real();
    });
    MeanAccumulator acc;
    for (double v : vals) acc.add(v);
    rep.monte_carlo = acc.mean();
    rep.std_error = acc.std_error();
    rep.within_bound = rep.monte_carlo <= rep.bound + 3.0 * rep.std_error;

    if (da <= 8) {
        // exact Haar integral via the Schur average of the swap observable
        TwirlCoefficients tw = exact_twirl_coefficients(dim_a1, dim_a2);
        SwapProjectors fr = swap_and_projectors(dr);
        MatrixXcd big = Eigen::kroneckerProduct(tw.assembled.matrix(), fr.swap.matrix());
        // arrange (A,A',R,R') -> (A,R,A',R') to pair with rho (x) rho
        SpaceLayout l4({da, da, dr, dr}, {"A", "Ap", "R", "Rp"});
        Operator big_op(big, l4);
        Operator arranged = permute_subsystems(big_op, {"A", "R", "Ap", "Rp"});
        MatrixXcd rr = Eigen::kroneckerProduct(rho, rho);
        rep.exact_haar = (rr * arranged.matrix()).trace().real();
    }
    return rep;
}

DecouplingStats decoupling_experiment(const DecouplingConfig& cfg) {
    int da = 0, dr = 0;
    MatrixXcd rho = arrange_ar(cfg.rho_ar, cfg.a_labels, cfg.r_labels, da, dr);
    require(cfg.dim_a1 * cfg.dim_a2 == da, "decoupling experiment: split does not divide |A|");
    require(cfg.eps > 0.0, "decoupling experiment: eps must be positive");

    MatrixXcd rho_r = MatrixXcd::Zero(dr, dr);
    for (int i = 0; i < dr; ++i)
        for (int j = 0; j < dr; ++j)
            for (int k = 0; k < da; ++k) rho_r(i, j) += rho(k * dr + i, k * dr + j);
    MatrixXcd target =
        Eigen::kroneckerProduct(MatrixXcd::Identity(cfg.dim_a1, cfg.dim_a1) / cfg.dim_a1, rho_r);

    CounterRng rng(cfg.seed, 0xDEC1);
    std::vector<double> vals = parallel_map<double>(cfg.samples, [&](int i) {
        CounterRng rs = rng.substream(static_cast<std::uint64_t>(i));
        Operator u = haar_unitary(da, rs);
        MatrixXcd sigma = decoupled_block(rho, u.matrix(), cfg.dim_a1, cfg.dim_a2, dr);
        return trace_norm(sigma - target);
    });

    DecouplingStats st;
    MeanAccumulator acc;
    for (double v : vals) acc.add(v);
    st.mean_trace_distance = acc.mean();
    st.std_error = acc.std_error();
    st.threshold_log_a1 =
        decoupling_threshold(cfg.rho_ar, cfg.a_labels, cfg.r_labels, cfg.eps);
    st.threshold_satisfied = std::log2(static_cast<double>(cfg.dim_a1)) <= st.threshold_log_a1 + 1e-12;
    st.pass = !st.threshold_satisfied ||
              st.mean_trace_distance <= cfg.eps + 3.0 * st.std_error;
    if (cfg.keep_samples) st.per_sample = std::move(vals);
    return st;
}

std::string decoupling_stats_to_json(const DecouplingConfig& cfg, const DecouplingStats& st) {
    nlohmann::ordered_json j;
    j["config"]["dim_a"] = cfg.dim_a1 * cfg.dim_a2;
    j["config"]["dim_a1"] = cfg.dim_a1;
    j["config"]["dim_a2"] = cfg.dim_a2;
    j["config"]["eps"] = cfg.eps;
    j["config"]["samples"] = cfg.samples;
    j["config"]["seed"] = cfg.seed;
    j["mean"] = st.mean_trace_distance;
    j["std_error"] = st.std_error;
    j["threshold"] = st.threshold_log_a1;
    j["threshold_satisfied"] = st.threshold_satisfied;
    j["pass"] = st.pass;
    return j.dump(2);
}

} // namespace osqit
