#include "osqit/channel.hpp"

#include "osqit/entropy.hpp"
#include "osqit/errors.hpp"
#include "osqit/sdp.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace osqit {

QuantumChannel::QuantumChannel(std::vector<MatrixXcd> kraus, SpaceLayout in_layout,
                               SpaceLayout out_layout)
    : kraus_(std::move(kraus)), in_layout_(std::move(in_layout)),
      out_layout_(std::move(out_layout)) {
    require(!kraus_.empty(), "channel: empty Kraus family");
    int din = in_layout_.total_dim();
    int dout = out_layout_.total_dim();
    MatrixXcd sum = MatrixXcd::Zero(din, din);
    for (const auto& k : kraus_) {
        require(k.rows() == dout && k.cols() == din, "channel: Kraus dimension mismatch");
        sum += k.adjoint() * k;
    }
    require((sum - MatrixXcd::Identity(din, din)).cwiseAbs().maxCoeff() <= kResidualTol,
            "channel: Kraus family is not trace preserving");
}

MatrixXcd QuantumChannel::apply_matrix(const MatrixXcd& rho) const {
    MatrixXcd out = MatrixXcd::Zero(out_dim(), out_dim());
    for (const auto& k : kraus_) out += k * rho * k.adjoint();
    return out;
}

MatrixXcd QuantumChannel::apply_adjoint(const MatrixXcd& x) const {
    MatrixXcd out = MatrixXcd::Zero(in_dim(), in_dim());
    for (const auto& k : kraus_) out += k.adjoint() * x * k;
    return out;
}

QuantumChannel identity_channel(int d, const std::string& label) {
    return QuantumChannel({MatrixXcd::Identity(d, d)}, SpaceLayout::single(d, label),
                          SpaceLayout::single(d, label));
}

QuantumChannel depolarizing_channel(double p, const std::string& label) {
    require(p >= 0.0 && p <= 1.0, "depolarizing: p in [0,1]");
    // Kraus: sqrt(1 - 3p/4) I, sqrt(p)/2 {X, Y, Z}
    MatrixXcd x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    z << 1, 0, 0, -1;
    std::vector<MatrixXcd> ks;
    ks.push_back(std::sqrt(1.0 - 0.75 * p) * MatrixXcd::Identity(2, 2));
    if (p > 0) {
        ks.push_back(0.5 * std::sqrt(p) * x);
        ks.push_back(0.5 * std::sqrt(p) * y);
        ks.push_back(0.5 * std::sqrt(p) * z);
    }
    return QuantumChannel(std::move(ks), SpaceLayout::single(2, label),
                          SpaceLayout::single(2, label));
}

QuantumChannel dephasing_channel(double p, const std::string& label) {
    require(p >= 0.0 && p <= 1.0, "dephasing: p in [0,1]");
    MatrixXcd z(2, 2);
    z << 1, 0, 0, -1;
    std::vector<MatrixXcd> ks;
    ks.push_back(std::sqrt(1.0 - p) * MatrixXcd::Identity(2, 2));
    if (p > 0) ks.push_back(std::sqrt(p) * z);
    return QuantumChannel(std::move(ks), SpaceLayout::single(2, label),
                          SpaceLayout::single(2, label));
}

QuantumChannel random_channel(int d_in, int d_out, int env_dim, CounterRng& rng,
                              const std::string& in_label, const std::string& out_label) {
    require(d_out * env_dim >= d_in, "random channel: isometry needs d_out*env >= d_in");
    // random isometry d_in -> d_out (x) env via QR of a Ginibre block
    int big = d_out * env_dim;
    MatrixXcd g(big, big);
    for (int j = 0; j < big; ++j)
        for (int i = 0; i < big; ++i) g(i, j) = rng.complex_gaussian();
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(big, big);
    MatrixXcd v = q.leftCols(d_in);
    std::vector<MatrixXcd> ks(env_dim, MatrixXcd::Zero(d_out, d_in));
    for (int e = 0; e < env_dim; ++e)
        for (int b = 0; b < d_out; ++b) ks[e].row(b) = v.row(b * env_dim + e);
    return QuantumChannel(std::move(ks), SpaceLayout::single(d_in, in_label),
                          SpaceLayout::single(d_out, out_label));
}

QuantumChannel channel_from_isometry(const Isometry& v) {
    require(v.is_full(1e-9), "channel_from_isometry: not an isometry");
    return QuantumChannel({v.m}, v.in_layout, v.out_layout);
}

MatrixXcd choi_matrix(const QuantumChannel& e) {
    int din = e.in_dim(), dout = e.out_dim();
    MatrixXcd j = MatrixXcd::Zero(dout * din, dout * din);
    for (const auto& k : e.kraus()) {
        // vec(K) arranged (out, in): |K> = sum_{b,a} K[b,a] |b>|a>
        VectorXcd vk(dout * din);
        for (int b = 0; b < dout; ++b)
            for (int a = 0; a < din; ++a) vk(b * din + a) = k(b, a);
        j += vk * vk.adjoint();
    }
    return j;
}

QuantumChannel channel_from_choi(const MatrixXcd& j, const SpaceLayout& in_layout,
                                 const SpaceLayout& out_layout) {
    int din = in_layout.total_dim(), dout = out_layout.total_dim();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(j);
    double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    double cutoff = 1e-11 * std::max(lmax, 1e-300);
    std::vector<MatrixXcd> ks;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double lam = es.eigenvalues()(i);
        if (lam <= cutoff) continue;
        MatrixXcd k(dout, din);
        for (int b = 0; b < dout; ++b)
            for (int a = 0; a < din; ++a) k(b, a) = std::sqrt(lam) * es.eigenvectors()(b * din + a, i);
        ks.push_back(std::move(k));
    }
    return QuantumChannel(std::move(ks), in_layout, out_layout);
}

QuantumChannel kraus_rank_reduce(const QuantumChannel& e) {
    return channel_from_choi(choi_matrix(e), e.in_layout(), e.out_layout());
}

StinespringIsometry stinespring_dilation(const QuantumChannel& e) {
    QuantumChannel r = kraus_rank_reduce(e);
    int env = static_cast<int>(r.kraus().size());
    int din = e.in_dim(), dout = e.out_dim();
    MatrixXcd v(dout * env, din);
    for (int k = 0; k < env; ++k)
        for (int b = 0; b < dout; ++b) v.row(b * env + k) = r.kraus()[k].row(b);
    SpaceLayout out = e.out_layout().concat(SpaceLayout::single(env, "_env"));
    Isometry iso{std::move(v), e.in_layout(), std::move(out)};
    require(iso.is_full(1e-9), "stinespring: dilation failed isometry check");
    return {std::move(iso), env};
}

QuantumChannel complementary_channel(const QuantumChannel& e) {
    StinespringIsometry s = stinespring_dilation(e);
    int din = e.in_dim(), dout = e.out_dim(), env = s.env_dim;
    // Kraus of tr_B: L_b[c, a] = V[(b,c), a]
    std::vector<MatrixXcd> ks(dout, MatrixXcd::Zero(env, din));
    for (int b = 0; b < dout; ++b)
        for (int c = 0; c < env; ++c) ks[b].row(c) = s.v.m.row(b * env + c);
    return QuantumChannel(std::move(ks), e.in_layout(), SpaceLayout::single(env, "_env"));
}

QuantumChannel compose_channels(const QuantumChannel& after, const QuantumChannel& before) {
    require(after.in_dim() == before.out_dim(), "compose: dimension mismatch");
    std::vector<MatrixXcd> ks;
    ks.reserve(after.kraus().size() * before.kraus().size());
    for (const auto& k2 : after.kraus())
        for (const auto& k1 : before.kraus()) ks.push_back(k2 * k1);
    QuantumChannel raw(std::move(ks), before.in_layout(), after.out_layout());
    if (raw.kraus().size() >
        static_cast<std::size_t>(raw.in_dim()) * static_cast<std::size_t>(raw.out_dim()))
        return kraus_rank_reduce(raw);
    return raw;
}

QuantumChannel tensor_channels(const QuantumChannel& a, const QuantumChannel& b) {
    std::vector<MatrixXcd> ks;
    ks.reserve(a.kraus().size() * b.kraus().size());
    for (const auto& ka : a.kraus())
        for (const auto& kb : b.kraus()) ks.push_back(Eigen::kroneckerProduct(ka, kb));
    return QuantumChannel(std::move(ks), a.in_layout().concat(b.in_layout()),
                          a.out_layout().concat(b.out_layout()));
}

DensityOperator apply_channel(const QuantumChannel& e, const DensityOperator& rho,
                              const std::vector<std::string>& on) {
    const SpaceLayout& L = rho.layout();
    require(static_cast<int>(on.size()) == e.in_layout().num_subsystems(),
            "apply_channel: label arity mismatch");
    std::vector<int> dims;
    for (const auto& l : on) dims.push_back(L.dim_of(l));
    require(SpaceLayout(dims, on).total_dim() == e.in_dim(),
            "apply_channel: dimension mismatch");

    // arrange with the channel input as the left factor
    std::vector<std::string> rest;
    for (const auto& l : L.labels())
        if (std::find(on.begin(), on.end(), l) == on.end()) rest.push_back(l);
    std::vector<std::string> order = on;
    order.insert(order.end(), rest.begin(), rest.end());
    Operator arranged = permute_subsystems(rho.op(), order);

    int drest = L.total_dim() / e.in_dim();
    MatrixXcd out = MatrixXcd::Zero(e.out_dim() * drest, e.out_dim() * drest);
    for (const auto& k : e.kraus()) {
        MatrixXcd big = Eigen::kroneckerProduct(k, MatrixXcd::Identity(drest, drest));
        out += big * arranged.matrix() * big.adjoint();
    }

    // output group leads, untouched labels follow in their original order
    SpaceLayout out_left = e.out_layout();
    for (const auto& l : out_left.labels())
        if (std::find(rest.begin(), rest.end(), l) != rest.end())
            require(false, "apply_channel: output label collides with a spectator");
    SpaceLayout lay = out_left.concat(L.sublayout(rest));
    return DensityOperator(Operator(std::move(out), std::move(lay)));
}

DiamondNormResult diamond_norm_choi(const MatrixXcd& j, int d_in, int d_out) {
    if (j.cwiseAbs().maxCoeff() < 1e-14) {
        return {0.0, MatrixXcd::Identity(d_in, d_in) / d_in, 0.0, true};
    }
    int d = d_out * d_in;
    SdpProblem p;
    auto w = p.add_psd_variable("W", d);
    auto sig = p.add_psd_variable("sigma", d_in);
    p.set_objective({{w, 2.0 * j}}, 0.0, /*maximize=*/true);
    // 1_out (x) sigma - W >= 0, arranged (out, in)
    p.add_psd_ineq({SdpProblem::place_tensor_left(MatrixXcd::Identity(d_out, d_out), sig, d_in),
                    SdpProblem::scaled(SdpProblem::place_identity(w, d), -1.0)},
                   MatrixXcd::Zero(d, d));
    p.add_scalar_eq({{sig, MatrixXcd::Identity(d_in, d_in)}}, 1.0);
    SdpSolution s = solve_sdp(p);
    require(s.status != SdpStatus::Infeasible, "diamond norm: SDP reported infeasible");
    return {s.primal_value, s.value(sig), s.duality_gap, s.status == SdpStatus::Optimal};
}

DiamondNormResult diamond_norm(const QuantumChannel& e, const QuantumChannel& f) {
    require(e.in_dim() == f.in_dim() && e.out_dim() == f.out_dim(),
            "diamond norm: channels need equal layouts");
    MatrixXcd j = choi_matrix(e) - choi_matrix(f);
    return diamond_norm_choi(j, e.in_dim(), e.out_dim());
}

CapacityResult entanglement_assisted_capacity(const QuantumChannel& e, double tol) {
    QuantumChannel ec = complementary_channel(e);
    int d = e.in_dim();

    auto entropy_bits = [](const MatrixXcd& m) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
        double h = 0.0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            double x = es.eigenvalues()(i);
            if (x > 1e-15) h -= x * std::log2(x);
        }
        return h;
    };
    // I(B:R) = H(rho) + H(E(rho)) - H(Ec(rho))
    auto objective = [&](const MatrixXcd& rho) {
        return entropy_bits(rho) + entropy_bits(e.apply_matrix(rho)) -
               entropy_bits(ec.apply_matrix(rho));
    };
    // Euclidean gradient: -log2(rho) + E^dag(-log2 E(rho)) - Ec^dag(-log2 Ec(rho))
    // (the 1/ln2 identity parts cancel against trace preservation).
    auto gradient = [&](const MatrixXcd& rho) {
        MatrixXcd g = -matrix_function_psd(rho, OpFunc::Log2) -
                      e.apply_adjoint(matrix_function_psd(e.apply_matrix(rho), OpFunc::Log2)) +
                      ec.apply_adjoint(matrix_function_psd(ec.apply_matrix(rho), OpFunc::Log2));
        return g;
    };

    CounterRng rng(0xCE0000, 5);
    double best = -1e300;
    MatrixXcd best_rho = MatrixXcd::Identity(d, d) / d;
    double best_stat = 1e300;

    for (int start = 0; start < 16; ++start) {
        MatrixXcd rho;
        if (start == 0) {
            rho = MatrixXcd::Identity(d, d) / d;
        } else {
            CounterRng r = rng.substream(start);
            rho = random_density_operator(SpaceLayout::single(d, "A"), r).matrix();
        }
        // keep strictly positive for the exponentiated-gradient update
        rho = 0.98 * rho + 0.02 * MatrixXcd::Identity(d, d) / d;
        double f = objective(rho);
        double eta = 1.0;
        double stat = 1e300;
        for (int it = 0; it < 300; ++it) {
            MatrixXcd g = gradient(rho);
            // project out the trace direction for the stationarity measure
            MatrixXcd gp = g - (g.trace().real() / d) * MatrixXcd::Identity(d, d);
            stat = gp.norm();
            if (stat < tol) break;
            // exponentiated gradient: rho <- exp(log rho + eta g) / tr
            bool moved = false;
            MatrixXcd lg = matrix_function_psd(rho, OpFunc::Log2);
            for (int ls = 0; ls < 20; ++ls) {
                MatrixXcd expo = (lg + eta * g) * std::log(2.0);
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (expo + expo.adjoint()));
                VectorXd ex = (es.eigenvalues().array() - es.eigenvalues().maxCoeff()).exp();
                MatrixXcd cand =
                    es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().adjoint();
                cand /= cand.trace().real();
                cand = 0.999999 * cand + 1e-6 * MatrixXcd::Identity(d, d) / d;
                double fc = objective(cand);
                if (fc > f + 1e-13) {
                    rho = cand;
                    f = fc;
                    moved = true;
                    eta = std::min(eta * 1.5, 64.0);
                    break;
                }
                eta *= 0.5;
            }
            if (!moved) break;
        }
        if (f > best) {
            best = f;
            best_rho = rho;
            best_stat = stat;
        }
    }
    return {best, DensityOperator(best_rho, e.in_layout()), best_stat, best_stat < 1e-3};
}

std::string channel_to_json(const QuantumChannel& e) {
    nlohmann::ordered_json j;
    auto mat_to_json = [](const MatrixXcd& k) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int r = 0; r < k.rows(); ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int c = 0; c < k.cols(); ++c)
                row.push_back({k(r, c).real(), k(r, c).imag()});
            rows.push_back(row);
        }
        return rows;
    };
    j["kraus"] = nlohmann::ordered_json::array();
    for (const auto& k : e.kraus()) j["kraus"].push_back(mat_to_json(k));
    j["in_dims"] = e.in_layout().dims();
    j["out_dims"] = e.out_layout().dims();
    j["in_labels"] = e.in_layout().labels();
    j["out_labels"] = e.out_layout().labels();
    return j.dump(2);
}

QuantumChannel channel_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<int> in_dims = j.at("in_dims").get<std::vector<int>>();
    std::vector<int> out_dims = j.at("out_dims").get<std::vector<int>>();
    std::vector<std::string> in_labels, out_labels;
    if (j.contains("in_labels")) {
        in_labels = j.at("in_labels").get<std::vector<std::string>>();
        out_labels = j.at("out_labels").get<std::vector<std::string>>();
    } else {
        for (std::size_t i = 0; i < in_dims.size(); ++i) in_labels.push_back("A" + std::to_string(i));
        for (std::size_t i = 0; i < out_dims.size(); ++i) out_labels.push_back("B" + std::to_string(i));
    }
    std::vector<MatrixXcd> ks;
    for (const auto& mat : j.at("kraus")) {
        int rows = static_cast<int>(mat.size());
        int cols = static_cast<int>(mat.at(0).size());
        MatrixXcd k(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                k(r, c) = Complex(mat.at(r).at(c).at(0).get<double>(),
                                  mat.at(r).at(c).at(1).get<double>());
        ks.push_back(std::move(k));
    }
    return QuantumChannel(std::move(ks), SpaceLayout(in_dims, in_labels),
                          SpaceLayout(out_dims, out_labels));
}

} // namespace osqit
