#include "osqit/protocol.hpp"

#include "osqit/decoupling.hpp"
#include "osqit/entropy.hpp"
#include "osqit/errors.hpp"
#include "osqit/geometry.hpp"
#include "osqit/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace osqit {

namespace {

// ---- layout surgery (row-major indices are untouched by these) ---------------

PureStateVector relabel(const PureStateVector& psi, const std::string& from,
                        const std::string& to) {
    std::vector<std::string> labels = psi.layout().labels();
    for (auto& l : labels)
        if (l == from) l = to;
    return PureStateVector(psi.amplitudes(), SpaceLayout(psi.layout().dims(), labels));
}

/// Replace `label` (dim d1*d2) by two adjacent labels (d1 most significant).
PureStateVector split_label(const PureStateVector& psi, const std::string& label, int d1,
                            int d2, const std::string& l1, const std::string& l2) {
    std::vector<int> dims;
    std::vector<std::string> labels;
    for (int i = 0; i < psi.layout().num_subsystems(); ++i) {
        if (psi.layout().labels()[i] == label) {
            require(psi.layout().dims()[i] == d1 * d2, "split_label: dimension mismatch");
            dims.push_back(d1);
            labels.push_back(l1);
            dims.push_back(d2);
            labels.push_back(l2);
        } else {
            dims.push_back(psi.layout().dims()[i]);
            labels.push_back(psi.layout().labels()[i]);
        }
    }
    return PureStateVector(psi.amplitudes(), SpaceLayout(dims, labels));
}

/// Merge the adjacent pair (l1, l2) (l1 immediately before l2) into one label.
PureStateVector merge_adjacent(const PureStateVector& psi, const std::string& l1,
                               const std::string& l2, const std::string& merged) {
    int i1 = psi.layout().index_of(l1);
    require(i1 >= 0 && i1 + 1 < psi.layout().num_subsystems() &&
                psi.layout().labels()[i1 + 1] == l2,
            "merge_adjacent: labels must be adjacent");
    std::vector<int> dims;
    std::vector<std::string> labels;
    for (int i = 0; i < psi.layout().num_subsystems(); ++i) {
        if (i == i1) {
            dims.push_back(psi.layout().dims()[i] * psi.layout().dims()[i + 1]);
            labels.push_back(merged);
            ++i;
        } else {
            dims.push_back(psi.layout().dims()[i]);
            labels.push_back(psi.layout().labels()[i]);
        }
    }
    return PureStateVector(psi.amplitudes(), SpaceLayout(dims, labels));
}

/// Maximally entangled state of Schmidt rank l embedded in dims (d1, l).
PureStateVector embedded_ebit(int d1, int l, const std::string& la, const std::string& lb) {
    VectorXcd v = VectorXcd::Zero(static_cast<long>(d1) * l);
    for (int i = 0; i < l; ++i) v(static_cast<long>(i) * l + i) = 1.0 / std::sqrt(double(l));
    return PureStateVector(v, SpaceLayout({d1, l}, {la, lb}));
}

int snap_ceil(double x) { return static_cast<int>(std::ceil(x - 1e-7)); }
int snap_floor(double x) { return static_cast<int>(std::floor(x + 1e-7)); }

// ---- shared merging machinery --------------------------------------------------

struct MergeInstance {
    Isometry support;      // C^rank -> H_mover
    int rank = 1;
    double h0 = 0.0, hmin = 0.0;
    int q = 0, e = 0;
    int dim1 = 1, dim2 = 1, dpad = 1, l = 1;
    Operator u;            // decoupling unitary on dpad
    double best_decoupling = 0.0;
    bool certified = true;
    UhlmannResult uhl;     // E1 = (A2, spect) -> E2 = (B1, Bp, spect)
    PureStateVector sigma; // decoupled global state, order (A1, ref, A2, spect)
    PureStateVector tau;   // merging target, order (A1, ref, B1, Bp, spect)
};

// Build the one-shot merging objects for moving `mover` to the `spect` side.
MergeInstance build_merge_instance(const PureStateVector& psi, const std::string& mover,
                                   const std::string& spect, const std::string& ref,
                                   double eps, int tries, std::uint64_t seed) {
    require(eps > 0.0 && eps < 1.0, "merging: eps must lie in (0,1)");
    MergeInstance mi;

    DensityOperator rho_m = marginal(psi, {mover});
    mi.support = support_isometry(rho_m, "_m");
    mi.rank = mi.support.in_dim();

    Isometry restrict{mi.support.m.adjoint(), psi.layout().sublayout({mover}),
                      SpaceLayout::single(mi.rank, "_m")};
    PureStateVector psi_hat = apply_isometry(restrict, psi);

    mi.h0 = std::log2(static_cast<double>(mi.rank));
    mi.hmin = h_min_cond(marginal(psi_hat, {"_m", ref}), {"_m"}, {ref}).value;
    double log_inv_eps = std::log2(1.0 / eps);
    mi.q = std::max(0, snap_ceil(0.5 * (mi.h0 - mi.hmin) + 2.0 * log_inv_eps));
    mi.e = snap_floor(0.5 * (mi.h0 + mi.hmin) - 2.0 * log_inv_eps);

    int pow2_rank = 1;
    while (pow2_rank < mi.rank) pow2_rank *= 2;
    mi.dim2 = std::min(1 << std::min(mi.q, 20), pow2_rank);
    mi.dim1 = (mi.rank + mi.dim2 - 1) / mi.dim2;
    mi.dpad = mi.dim1 * mi.dim2;
    mi.l = 1 << std::max(mi.e, 0);

    // pad the restricted mover into dim1 * dim2
    MatrixXcd pad = MatrixXcd::Zero(mi.dpad, mi.rank);
    pad.topLeftCorner(mi.rank, mi.rank).setIdentity();
    PureStateVector psi_pad = apply_isometry(
        Isometry{pad, SpaceLayout::single(mi.rank, "_m"), SpaceLayout::single(mi.dpad, "_mp")},
        psi_hat);

    // decoupling search over sampled Haar unitaries
    Operator arranged = permute_subsystems(marginal(psi_pad, {"_mp", ref}).op(), {"_mp", ref});
    int dref = psi.layout().dim_of(ref);
    MatrixXcd rho_ref = MatrixXcd::Zero(dref, dref);
    for (int i = 0; i < dref; ++i)
        for (int j = 0; j < dref; ++j)
            for (int k = 0; k < mi.dpad; ++k)
                rho_ref(i, j) += arranged.matrix()(k * dref + i, k * dref + j);
    MatrixXcd target_block = MatrixXcd::Zero(mi.dim1 * dref, mi.dim1 * dref);
    for (int a = 0; a < mi.dim1; ++a)
        for (int i = 0; i < dref; ++i)
            for (int j = 0; j < dref; ++j)
                target_block(a * dref + i, a * dref + j) =
                    rho_ref(i, j) / static_cast<double>(mi.dim1);

    CounterRng rng(seed, 0x3E6);
    double best = 1e300;
    Operator best_u;
    for (int t = 0; t < std::max(tries, 1); ++t) {
        CounterRng rt = rng.substream(static_cast<std::uint64_t>(t));
        Operator u = haar_unitary(mi.dpad, rt, SpaceLayout::single(mi.dpad, "_mp"));
        MatrixXcd blk =
            decoupled_block(arranged.matrix(), u.matrix(), mi.dim1, mi.dim2, dref);
        double dist = trace_norm(blk - target_block);
        if (dist < best) {
            best = dist;
            best_u = u;
        }
        if (best <= eps * eps * 0.5) break; // comfortably within target
    }
    mi.best_decoupling = best;
    mi.u = best_u;
    mi.certified = (best <= eps * eps + 1e-12) && (mi.l == mi.dim1 || mi.e < 0);
    if (mi.e < 0 && mi.dim1 > 1) mi.certified = false; // target ebit rank deficient

    // decoupled global state, mover split into (A1, A2)
    PureStateVector rotated = apply_on(mi.u, psi_pad, {"_mp"});
    PureStateVector sigma = split_label(rotated, "_mp", mi.dim1, mi.dim2, "A1", "A2");

    // merging target: embedded ebit (x) moved content
    PureStateVector phi = embedded_ebit(mi.dim1, mi.l, "A1", "B1");
    PureStateVector moved = relabel(psi_hat, "_m", "Bp");
    PureStateVector tau = tensor_product(phi, moved);

    mi.sigma = permute_subsystems(sigma, {"A1", ref, "A2", spect});
    mi.tau = permute_subsystems(tau, {"A1", ref, "B1", "Bp", spect});
    mi.uhl = uhlmann_isometry(mi.sigma, mi.tau, {"A1", ref});
    return mi;
}

ProtocolStep local_alice(const std::string& what) {
    return {ProtocolStep::Type::LocalAlice, what, 0};
}
ProtocolStep local_bob(const std::string& what) {
    return {ProtocolStep::Type::LocalBob, what, 0};
}
ProtocolStep send_qubits(int n) { return {ProtocolStep::Type::SendQubits, "", n}; }

} // namespace

// --- embezzling ------------------------------------------------------------------

EmbezzlingState build_embezzling_state(EmbezzlingKind kind, int m) {
    require(m >= 1, "embezzling state: m >= 1");
    double side = std::pow(2.0, m);
    require_resource(side <= kDimensionGuard + 0.5,
                     "embezzling state: 2^m exceeds the dimension guard");
    int n = static_cast<int>(side + 0.5);

    EmbezzlingState st;
    st.kind = kind;
    st.m = m;
    st.delta = std::sqrt(2.0 / m);
    st.side_dim = n;
    st.schmidt.resize(n);

    if (kind == EmbezzlingKind::VanDamHayden) {
        // coefficients proportional to 1/j, j = 1..2^m
        double norm = 0.0;
        for (int j = 1; j <= n; ++j) norm += 1.0 / j;
        for (int j = 1; j <= n; ++j) st.schmidt[j - 1] = (1.0 / j) / norm;
    } else {
        // cyclic sum of |phi>^j (x) ebit^(m-j) with |phi> = |0>|0>; the Schmidt
        // basis is computational and the coefficient of a string depends only
        // on its number of leading zeros:
        //   c(z) = C * sum_{j=0..min(z, m-1)} 2^{-(m-j)/2}
        std::vector<double> amp(m + 1, 0.0);
        for (int z = 0; z <= m; ++z) {
            double s = 0.0;
            for (int j = 0; j <= std::min(z, m - 1); ++j) s += std::pow(2.0, -0.5 * (m - j));
            amp[z] = s;
        }
        std::vector<double> weights; // squared amplitudes with multiplicity
        weights.reserve(n);
        double norm = 0.0;
        for (int z = 0; z < m; ++z) {
            long mult = 1L << (m - z - 1); // strings with exactly z leading zeros
            for (long k = 0; k < mult; ++k) weights.push_back(amp[z] * amp[z]);
            norm += mult * amp[z] * amp[z];
        }
        weights.push_back(amp[m] * amp[m]); // the all-zeros string
        norm += amp[m] * amp[m];
        for (int i = 0; i < n; ++i) st.schmidt[i] = weights[i] / norm;
    }
    std::sort(st.schmidt.begin(), st.schmidt.end(), std::greater<double>());

    if (static_cast<long>(n) * n <= kDimensionGuard) {
        VectorXcd v = VectorXcd::Zero(static_cast<long>(n) * n);
        for (int j = 0; j < n; ++j) v(static_cast<long>(j) * n + j) = std::sqrt(st.schmidt[j]);
        st.vector = PureStateVector(v, SpaceLayout({n, n}, {"Ae", "Be"}));
    }
    return st;
}

EmbezzleResult embezzle_ebits(const EmbezzlingState& mu, int l) {
    require(l >= 1 && (l & (l - 1)) == 0, "embezzle: l must be a power of two");
    EmbezzleResult res;
    res.log_l = 0;
    for (int t = l; t > 1; t >>= 1) ++res.log_l;

    int n = mu.side_dim;
    if (l == 1) {
        res.achieved_p = 0.0;
        res.index_map.resize(n);
        for (int i = 0; i < n; ++i) res.index_map[i] = i;
        Isometry id{MatrixXcd::Identity(n, n), SpaceLayout::single(n, "Ae"),
                    SpaceLayout::single(n, "Ae")};
        res.isometries = {id, Isometry{MatrixXcd::Identity(n, n),
                                       SpaceLayout::single(n, "Be"),
                                       SpaceLayout::single(n, "Be")}};
        return res;
    }

    // target spectrum: each source coefficient split into l equal parts
    struct TargetCoeff {
        double value;
        int src;  // source Schmidt index
        int copy; // which ebit slot
    };
    std::vector<TargetCoeff> target;
    target.reserve(static_cast<std::size_t>(n) * l);
    for (int j = 0; j < n; ++j)
        for (int c = 0; c < l; ++c) target.push_back({mu.schmidt[j] / l, j, c});
    std::stable_sort(target.begin(), target.end(),
                     [](const TargetCoeff& a, const TargetCoeff& b) { return a.value > b.value; });

    double overlap = 0.0;
    res.index_map.resize(n);
    for (int k = 0; k < n; ++k) {
        overlap += std::sqrt(mu.schmidt[k] * target[k].value);
        res.index_map[k] = target[k].src * l + target[k].copy;
    }
    res.achieved_p = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));

    long out_dim = static_cast<long>(n) * l;
    if (out_dim <= 256) {
        MatrixXcd xa = MatrixXcd::Zero(out_dim, n);
        for (int k = 0; k < n; ++k) xa(res.index_map[k], k) = 1.0;
        SpaceLayout out_a({n, l}, {"Ae", "Aout"});
        SpaceLayout out_b({n, l}, {"Be", "Bout"});
        res.isometries = {Isometry{xa, SpaceLayout::single(n, "Ae"), out_a},
                          Isometry{xa, SpaceLayout::single(n, "Be"), out_b}};
    }
    return res;
}

// --- transcript serialization -------------------------------------------------------

std::string transcript_to_json(const ProtocolTranscript& t) {
    nlohmann::ordered_json j;
    j["kind"] = t.kind;
    j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : t.steps) {
        nlohmann::ordered_json step;
        switch (s.type) {
            case ProtocolStep::Type::LocalAlice: step["type"] = "local_alice"; break;
            case ProtocolStep::Type::LocalBob: step["type"] = "local_bob"; break;
            case ProtocolStep::Type::SendQubits: step["type"] = "send_qubits"; break;
            case ProtocolStep::Type::SendCbits: step["type"] = "send_cbits"; break;
            case ProtocolStep::Type::Embezzle: step["type"] = "embezzle"; break;
        }
        if (!s.what.empty()) step["what"] = s.what;
        if (s.count != 0 || s.type == ProtocolStep::Type::SendQubits ||
            s.type == ProtocolStep::Type::SendCbits ||
            s.type == ProtocolStep::Type::Embezzle)
            step["count"] = s.count;
        j["steps"].push_back(step);
    }
    j["q_total"] = t.q_total;
    j["c_total"] = t.c_total;
    j["e_gain_or_cost"] = t.e_gain_or_cost;
    j["achieved_distance"] = t.achieved_distance;
    j["certified"] = t.certified;
    if (t.kind == "split_embezzle") {
        j["embezzle_penalty"] = t.embezzle_penalty;
        j["protocol_distance"] = t.protocol_distance;
        j["realized_delta"] = t.realized_delta;
        j["bands_used"] = t.bands_used;
    }
    return j.dump(2);
}

// --- merging -------------------------------------------------------------------------

ProtocolResult state_merging(const PureStateVector& psi, const std::string& a,
                             const std::string& b, const std::string& r, double eps,
                             int unitary_tries, std::uint64_t seed) {
    MergeInstance mi = build_merge_instance(psi, a, b, r, eps, unitary_tries, seed);

    PureStateVector out = apply_isometry(mi.uhl.v, mi.sigma);
    PureStateVector target = permute_subsystems(mi.tau, out.layout().labels());
    double achieved = purified_distance(out, target);

    ProtocolTranscript t;
    t.kind = "merge";
    t.steps = {local_alice("support restriction, padding and decoupling unitary"),
               send_qubits(mi.q), local_bob("purification-matching isometry")};
    t.q_total = mi.q;
    t.e_gain_or_cost = mi.e;
    t.achieved_distance = achieved;
    t.certified = mi.certified;
    return {std::move(t), out.projector(), out};
}

ProtocolResult state_splitting_max_ent(const PureStateVector& psi, const std::string& a,
                                       const std::string& ap, const std::string& r, double eps,
                                       int unitary_tries, std::uint64_t seed,
                                       const std::string& b_out) {
    MergeInstance mi = build_merge_instance(psi, ap, a, r, eps, unitary_tries, seed);

    // shared entangled resource phi_L on (A1 at Bob, B1 at Alice)
    PureStateVector in0 = tensor_product(psi, embedded_ebit(mi.dim1, mi.l, "A1", "B1"));

    // Alice: restrict A' onto its support and relabel to the isometry's frame
    Isometry restrict{mi.support.m.adjoint(), psi.layout().sublayout({ap}),
                      SpaceLayout::single(mi.rank, "Bp")};
    PureStateVector st1 = apply_isometry(restrict, in0);

    // Alice: reversed purification-matching isometry (B1, Bp, a) -> (A2, a)
    Isometry v_dag{mi.uhl.v.m.adjoint(), mi.uhl.v.out_layout, mi.uhl.v.in_layout};
    PureStateVector st2 = apply_isometry(v_dag, st1);

    // Bob: received A2; reverse the decoupling unitary on (A1, A2)
    PureStateVector st3 = permute_subsystems(
        st2, [&] {
            std::vector<std::string> order{"A1", "A2"};
            for (const auto& l : st2.layout().labels())
                if (l != "A1" && l != "A2") order.push_back(l);
            return order;
        }());
    PureStateVector st4 = merge_adjacent(st3, "A1", "A2", "_mp");
    PureStateVector st5 = apply_on(mi.u.adjoint(), st4, {"_mp"});

    // un-pad and re-embed into the original A' space, renamed b_out
    MatrixXcd unpad = MatrixXcd::Zero(mi.rank, mi.dpad);
    unpad.topLeftCorner(mi.rank, mi.rank).setIdentity();
    PureStateVector st6 = apply_isometry(
        Isometry{unpad, SpaceLayout::single(mi.dpad, "_mp"), SpaceLayout::single(mi.rank, "_m")},
        st5);
    SpaceLayout b_layout = SpaceLayout::single(psi.layout().dim_of(ap), b_out);
    PureStateVector out = apply_isometry(
        Isometry{mi.support.m, SpaceLayout::single(mi.rank, "_m"), b_layout}, st6);

    PureStateVector target =
        permute_subsystems(relabel(psi, ap, b_out), out.layout().labels());
    double achieved = purified_distance(out, target);

    ProtocolTranscript t;
    t.kind = "split_maxent";
    t.steps = {local_alice("support restriction and reversed matching isometry"),
               send_qubits(mi.q), local_bob("reversed decoupling unitary and embedding")};
    t.q_total = mi.q;
    t.e_gain_or_cost = mi.e;
    t.achieved_distance = achieved;
    t.certified = mi.certified;
    return {std::move(t), out.projector(), out};
}

// --- eigenvalue banding -----------------------------------------------------------------

BandingResult eigenvalue_banding(const DensityOperator& rho_ap) {
    int d = rho_ap.dim();
    require(d >= 1, "banding: empty space");
    EighResult e = eigh(rho_ap.op());
    int q_bands = std::max(0, static_cast<int>(std::ceil(2.0 * std::log2(double(d)) - 1.0)));
    double floor_val = std::pow(double(d), -2.0);

    auto band_of = [&](double lam) {
        if (lam <= floor_val * (1.0 + 1e-9)) return q_bands + 1;
        int i = 0;
        while (lam <= std::pow(2.0, -(i + 1)) * (1.0 + 1e-9) && i < q_bands) ++i;
        return i;
    };

    BandingResult res;
    res.q_bands = q_bands;
    res.projectors.assign(q_bands + 2,
                          Operator(MatrixXcd::Zero(d, d), rho_ap.layout()));
    double lmax = std::max(e.eigenvalues.maxCoeff(), 0.0);
    double cutoff = kKernelCutoff * std::max(lmax, 1e-300);
    MatrixXcd assigned = MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        if (e.eigenvalues(k) <= cutoff) continue; // kernel joins the last band below
        int band = band_of(e.eigenvalues(k));
        MatrixXcd p = e.eigenvectors.col(k) * e.eigenvectors.col(k).adjoint();
        res.projectors[band] = Operator(res.projectors[band].matrix() + p, rho_ap.layout());
        assigned += p;
    }
    // kernel completes the junk band so the family resolves the identity
    res.projectors[q_bands + 1] = Operator(
        res.projectors[q_bands + 1].matrix() + MatrixXcd::Identity(d, d) - assigned,
        rho_ap.layout());

    res.probabilities.resize(q_bands + 2);
    for (int i = 0; i <= q_bands + 1; ++i)
        res.probabilities[i] = (res.projectors[i].matrix() * rho_ap.matrix()).trace().real();

    int nb = q_bands + 2;
    MatrixXcd w = MatrixXcd::Zero(static_cast<long>(d) * nb, d);
    for (int i = 0; i < nb; ++i)
        for (int r0 = 0; r0 < d; ++r0)
            for (int c = 0; c < d; ++c) w(static_cast<long>(r0) * nb + i, c) +=
                res.projectors[i].matrix()(r0, c);
    res.w = Isometry{std::move(w), rho_ap.layout(),
                     rho_ap.layout().concat(SpaceLayout::single(nb, "_I"))};
    return res;
}

// --- splitting with embezzling states ------------------------------------------------------

SplitEmbezzleResult state_splitting_embezzling(const PureStateVector& psi_in,
                                               const std::string& a, const std::string& ap,
                                               const std::string& r,
                                               const SplitEmbezzleOptions& opt) {
    require(opt.eps > 0.0 && opt.eps < 1.0, "splitting: eps in (0,1)");
    require(opt.eps_prime >= 0.0 && opt.eps_prime < 1.0, "splitting: eps' in [0,1)");
    require(opt.delta > 0.0, "splitting: delta must be positive");

    int d_ap = psi_in.layout().dim_of(ap);
    SplitEmbezzleResult res;

    // realized embezzling resource (capped by the construction guard)
    int m = std::clamp(static_cast<int>(std::ceil(2.0 / (opt.delta * opt.delta))), 1, 12);
    EmbezzlingState mu = build_embezzling_state(EmbezzlingKind::VanDamHayden, m);
    double delta_real = mu.delta;

    // the max-information term: exact at eps'=0, certified upper bound otherwise
    DensityOperator rho_apr = marginal(psi_in, {ap, r});
    PureStateVector run_state = psi_in;
    std::string spect = a;
    if (opt.eps_prime > 0.0) {
        SmoothEntropyValue sm =
            smooth_quantity(SmoothKind::IMax, rho_apr, opt.eps_prime, {ap}, {r});
        res.imax_term = sm.value;
        if (sm.witness) {
            // run the protocol on a purification of the witness, aligned to the
            // input so the extra error stays within eps'
            DensityOperator w = *sm.witness; // on (ap, r) in arranged order
            PureStateVector wp = purification(w, "_W");
            int wrank = wp.layout().dim_of("_W");
            int d_a = psi_in.layout().dim_of(a);
            PureStateVector psi_padded = psi_in;
            std::string big_a = a;
            if (wrank > d_a) {
                int padd = (wrank + d_a - 1) / d_a;
                PureStateVector zero(VectorXcd::Unit(padd, 0), SpaceLayout::single(padd, "_pad"));
                PureStateVector tens = tensor_product(psi_in, zero);
                std::vector<std::string> order{a, "_pad"};
                for (const auto& l : psi_in.layout().labels())
                    if (l != a) order.push_back(l);
                tens = permute_subsystems(tens, order);
                psi_padded = merge_adjacent(tens, a, "_pad", "_Abig");
                big_a = "_Abig";
            }
            UhlmannResult align = uhlmann_isometry(wp, psi_padded, {ap, r});
            PureStateVector aligned = apply_isometry(align.v, wp);
            run_state = permute_subsystems(aligned, psi_padded.layout().labels());
            spect = big_a;
        }
    } else {
        res.imax_term = i_max(rho_apr, {ap}, {r}).value;
    }

    BandingResult bands = eigenvalue_banding(marginal(run_state, {ap}));
    double loglog = (d_ap >= 2) ? std::log2(std::log2(double(d_ap))) : 0.0;
    res.q_bound = 0.5 * res.imax_term + 2.0 * std::log2(1.0 / opt.eps) + 4.0 + loglog;
    res.distance_bound = opt.eps + opt.eps_prime + delta_real * std::log2(double(d_ap)) +
                         1.0 / std::sqrt(double(d_ap));

    int iq = (d_ap >= 2)
                 ? static_cast<int>(std::ceil(std::log2(std::ceil(2.0 * std::log2(double(d_ap))))))
                 : 0;

    ProtocolTranscript t;
    t.kind = "split_embezzle";
    t.realized_delta = delta_real;
    t.steps.push_back(local_alice("coherent eigenvalue-band measurement"));

    // per-band runs (junk band dropped; its weight subnormalizes the output)
    CounterRng rng(opt.seed, 0x5B);
    PureStateVector assembled;
    bool first = true;
    int max_q = 0;
    bool all_certified = true;
    double max_emb = 0.0;
    int used = 0;

    std::string b_out = "B";
    for (int i = 0; i <= bands.q_bands; ++i) {
        if (bands.probabilities[i] < 1e-12) continue;
        ++used;
        // branch state
        PureStateVector branch = apply_on(bands.projectors[i], run_state, {ap});
        double norm = std::sqrt(branch.squared_norm());
        PureStateVector branch_n(branch.amplitudes() / norm, branch.layout());

        ProtocolResult pr = state_splitting_max_ent(
            branch_n, spect, ap, r, opt.eps, opt.unitary_tries,
            rng.substream(static_cast<std::uint64_t>(i)).next_u64());
        all_certified = all_certified && pr.transcript.certified;
        max_q = std::max(max_q, pr.transcript.q_total);

        int e_i = pr.transcript.e_gain_or_cost;
        if (e_i >= 1) {
            EmbezzleResult emb = embezzle_ebits(mu, 1 << std::min(e_i, 12));
            max_emb = std::max(max_emb, emb.achieved_p);
            t.steps.push_back({ProtocolStep::Type::Embezzle, "band " + std::to_string(i), e_i});
        }

        // phase-align the branch so all overlaps are real nonnegative
        PureStateVector target =
            permute_subsystems(relabel(branch_n, ap, b_out), pr.output_vector.layout().labels());
        Complex ov = overlap(target, pr.output_vector);
        Complex phase = (std::abs(ov) > 1e-14) ? ov / std::abs(ov) : Complex(1.0, 0.0);
        PureStateVector fixed(pr.output_vector.amplitudes() * std::conj(phase),
                              pr.output_vector.layout());

        // band-conditional decode: project the moved system back onto band i
        PureStateVector decoded = apply_on(
            Operator(bands.projectors[i].matrix(), SpaceLayout::single(d_ap, b_out)), fixed,
            {b_out});

        VectorXcd scaled = std::sqrt(bands.probabilities[i]) * decoded.amplitudes();
        if (first) {
            assembled = PureStateVector(scaled, decoded.layout());
            first = false;
        } else {
            PureStateVector aligned = permute_subsystems(decoded, assembled.layout().labels());
            assembled = PureStateVector(assembled.amplitudes() + std::sqrt(bands.probabilities[i]) *
                                                                     aligned.amplitudes(),
                                        assembled.layout());
        }
    }
    require(!first, "splitting: no nonempty eigenvalue band");
    t.steps.push_back(send_qubits(max_q + iq));
    t.steps.push_back(local_bob("band-conditional decoding and band measurement undo"));
    t.bands_used = used;

    // compare against the original input (moved label renamed), including the
    // spectator padding when a smoothing witness was used
    PureStateVector global_target = relabel(
        (spect == a) ? psi_in : [&] {
            // rebuild the padded input target
            int d_a = psi_in.layout().dim_of(a);
            int dbig = run_state.layout().dim_of(spect);
            int padd = dbig / d_a;
            PureStateVector zero(VectorXcd::Unit(padd, 0), SpaceLayout::single(padd, "_pad"));
            PureStateVector tens = tensor_product(psi_in, zero);
            std::vector<std::string> order{a, "_pad"};
            for (const auto& l : psi_in.layout().labels())
                if (l != a) order.push_back(l);
            return merge_adjacent(permute_subsystems(tens, order), a, "_pad", spect);
        }(), ap, b_out);
    global_target = permute_subsystems(global_target, assembled.layout().labels());

    double protocol_distance = purified_distance(assembled, global_target);
    t.protocol_distance = protocol_distance;
    t.embezzle_penalty = max_emb;
    t.achieved_distance = std::min(1.0, protocol_distance + max_emb);
    t.q_total = max_q + iq;
    t.e_gain_or_cost = 0;
    t.certified = all_certified;
    res.transcript = std::move(t);
    res.output = assembled.projector();
    res.output_vector = assembled;
    return res;
}

// --- converse audit --------------------------------------------------------------------------

AuditReport converse_audit(const ProtocolTranscript& t, const DensityOperator& final_state,
                           const std::string& b, const std::string& r) {
    DensityOperator br = partial_trace(final_state, {b, r});
    double tr = br.trace();
    DensityOperator brn(br.matrix() / std::max(tr, 1e-12), br.layout());
    double imax = i_max(brn, {b}, {r}).value;
    double bound = 2.0 * t.q_total;
    return {imax, bound, imax <= bound + 1e-4};
}

// --- teleportation ----------------------------------------------------------------------------

TeleportAccounting teleport_accounting(int qubits) {
    require(qubits >= 0, "teleport accounting: negative qubit count");
    return {2 * qubits, qubits};
}

DensityOperator teleport_qubit(const DensityOperator& rho, const std::string& label) {
    require(rho.layout().dim_of(label) == 2, "teleport: only qubits move through the circuit");
    // Bell basis on (X, Ea): |beta_m> = (pauli_m (x) 1)|phi+>
    MatrixXcd paulis[4];
    paulis[0] = MatrixXcd::Identity(2, 2);
    paulis[1] = MatrixXcd(2, 2);
    paulis[1] << 0, 1, 1, 0;
    paulis[2] = MatrixXcd(2, 2);
    paulis[2] << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    paulis[3] = MatrixXcd(2, 2);
    paulis[3] << 1, 0, 0, -1;

    VectorXcd phi(4);
    phi << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);

    // Kraus on the moving qubit alone: J_m = (sigma_m)_(Bob) (<beta_m| (x) 1)(1_X (x) |phi+>)
    std::vector<MatrixXcd> ks;
    for (int mi = 0; mi < 4; ++mi) {
        VectorXcd beta(4);
        for (int x0 = 0; x0 < 2; ++x0)
            for (int e0 = 0; e0 < 2; ++e0) {
                Complex s = 0.0;
                for (int y = 0; y < 2; ++y) s += paulis[mi](x0, y) * phi(y * 2 + e0);
                beta(x0 * 2 + e0) = s;
            }
        MatrixXcd j = MatrixXcd::Zero(2, 2);
        for (int in = 0; in < 2; ++in)
            for (int out = 0; out < 2; ++out) {
                Complex s = 0.0;
                // <beta_m|_(X,Ea) (x) <out|_(Eb) applied to |in>_X (x) |phi+>_(Ea,Eb)
                for (int ea = 0; ea < 2; ++ea)
                    s += std::conj(beta(in * 2 + ea)) * phi(ea * 2 + out);
                j(out, in) = s;
            }
        ks.push_back(paulis[mi] * j);
    }

    // apply on the requested label
    MatrixXcd acc = MatrixXcd::Zero(rho.dim(), rho.dim());
    std::vector<std::string> order{label};
    for (const auto& l : rho.layout().labels())
        if (l != label) order.push_back(l);
    Operator arranged = permute_subsystems(rho.op(), order);
    int drest = rho.dim() / 2;
    for (const auto& k : ks) {
        MatrixXcd big = MatrixXcd::Zero(rho.dim(), rho.dim());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                big.block(i * drest, j * drest, drest, drest) =
                    k(i, j) * MatrixXcd::Identity(drest, drest);
        acc += big * arranged.matrix() * big.adjoint();
    }
    Operator out(acc, arranged.layout());
    return DensityOperator(permute_subsystems(out, rho.layout().labels()));
}

} // namespace osqit
