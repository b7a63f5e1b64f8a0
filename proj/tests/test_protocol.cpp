#include <catch2/catch_amalgamated.hpp>

#include <osqit/entropy.hpp>
#include <osqit/errors.hpp>
#include <osqit/geometry.hpp>
#include <osqit/linalg.hpp>
#include <osqit/protocol.hpp>

#include "test_util.hpp"

#include <cmath>

using namespace osqit;
using namespace testutil;
using Catch::Approx;

namespace {

// tripartite pure states on labels (A, B, R) / (A, Ap, R)
PureStateVector product_with(const PureStateVector& pair, const std::string& extra, int d) {
    PureStateVector zero(VectorXcd::Unit(d, 0), SpaceLayout::single(d, extra));
    return tensor_product(pair, zero);
}

} // namespace

TEST_CASE("embezzling state construction") {
    SECTION("van Dam-Hayden m=1: amplitudes (1, 1/sqrt2)/sqrt(3/2)") {
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::VanDamHayden, 1);
        REQUIRE(st.side_dim == 2);
        double h2 = 1.0 + 0.5;
        REQUIRE(st.schmidt[0] == Approx(1.0 / h2));
        REQUIRE(st.schmidt[1] == Approx(0.5 / h2));
        REQUIRE(st.vector.has_value());
        REQUIRE(st.vector->squared_norm() == Approx(1.0).margin(1e-12));
    }
    SECTION("m=2: harmonic sum 25/12") {
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::VanDamHayden, 2);
        double h4 = 25.0 / 12.0;
        REQUIRE(st.schmidt[0] == Approx(1.0 / h4));
        REQUIRE(st.schmidt[3] == Approx(0.25 / h4));
    }
    SECTION("normalization at every m") {
        for (int m : {1, 2, 4, 8, 12}) {
            for (auto kind : {EmbezzlingKind::VanDamHayden, EmbezzlingKind::CyclicSum}) {
                EmbezzlingState st = build_embezzling_state(kind, m);
                double total = 0.0;
                for (double s : st.schmidt) total += s;
                REQUIRE(total == Approx(1.0).margin(1e-12));
                REQUIRE(st.delta == Approx(std::sqrt(2.0 / m)));
            }
        }
    }
    SECTION("cyclic m=1 is a plain ebit") {
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::CyclicSum, 1);
        REQUIRE(st.schmidt[0] == Approx(0.5));
        REQUIRE(st.schmidt[1] == Approx(0.5));
    }
    SECTION("cyclic m=2 matches the explicit 2-block construction") {
        // |mu> = C(|ebit>^2 + |00>|ebit>) with coefficients from the text
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::CyclicSum, 2);
        double r2 = std::sqrt(0.5);
        std::vector<double> amp{0.5, 0.5, 0.5 + r2, 0.5 + r2};
        double norm = 0;
        for (double aa : amp) norm += aa * aa;
        std::vector<double> expect;
        for (double aa : amp) expect.push_back(aa * aa / norm);
        std::sort(expect.begin(), expect.end(), std::greater<double>());
        for (int i = 0; i < 4; ++i) REQUIRE(st.schmidt[i] == Approx(expect[i]).margin(1e-12));
    }
    SECTION("guard above m=12") {
        REQUIRE_THROWS_AS(build_embezzling_state(EmbezzlingKind::VanDamHayden, 13),
                          ResourceError);
    }
}

TEST_CASE("embezzling one or more ebits") {
    SECTION("l=1 is free") {
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::VanDamHayden, 4);
        EmbezzleResult r = embezzle_ebits(st, 1);
        REQUIRE(r.achieved_p == 0.0);
    }
    SECTION("one-ebit accuracy sqrt(2/m) on both kinds") {
        for (int m : {2, 4, 8, 12}) {
            for (auto kind : {EmbezzlingKind::VanDamHayden, EmbezzlingKind::CyclicSum}) {
                EmbezzlingState st = build_embezzling_state(kind, m);
                EmbezzleResult r = embezzle_ebits(st, 2);
                REQUIRE(r.achieved_p <= std::sqrt(2.0 / m) + 1e-12);
            }
        }
    }
    SECTION("higher-rank targets scale with delta log L") {
        for (int m : {8, 12}) {
            EmbezzlingState st = build_embezzling_state(EmbezzlingKind::VanDamHayden, m);
            for (int l : {2, 4}) {
                EmbezzleResult r = embezzle_ebits(st, l);
                REQUIRE(r.achieved_p <= std::sqrt(2.0 / m) * std::log2(double(l)) + 1e-12);
            }
        }
    }
    SECTION("dense isometries reproduce the aligned overlap") {
        EmbezzlingState st = build_embezzling_state(EmbezzlingKind::VanDamHayden, 3);
        EmbezzleResult r = embezzle_ebits(st, 2);
        REQUIRE(r.isometries.has_value());
        const auto& [xa, xb] = *r.isometries;
        REQUIRE(xa.is_full());
        PureStateVector moved = apply_isometry(xb, apply_isometry(xa, *st.vector));
        // target mu (x) phi_2 arranged (Ae, Aout, Be, Bout)
        PureStateVector phi = max_entangled(2, "Aout", "Bout");
        PureStateVector target = tensor_product(*st.vector, phi);
        target = permute_subsystems(target, moved.layout().labels());
        double f = std::abs(overlap(moved, target));
        REQUIRE(std::sqrt(1 - f * f) == Approx(r.achieved_p).margin(1e-10));
    }
}

TEST_CASE("state merging") {
    SECTION("maximally entangled with the reference: q=3, e=-2 at eps=1/2") {
        PureStateVector psi = product_with(max_entangled(2, "A", "R"), "B", 2);
        ProtocolResult pr = state_merging(psi, "A", "B", "R", 0.5, 32, 11);
        REQUIRE(pr.transcript.q_total == 3);
        REQUIRE(pr.transcript.e_gain_or_cost == -2);
        REQUIRE(pr.transcript.certified);
        REQUIRE(pr.transcript.achieved_distance <= 0.5 + 1e-9);
    }
    SECTION("A decoupled from R already: q = 2 at eps=1/2") {
        PureStateVector psi = product_with(max_entangled(2, "A", "B"), "R", 2);
        psi = permute_subsystems(psi, {"A", "B", "R"});
        // Hmin(A|R) = Hmin(A) = 1 for the maximally mixed marginal
        ProtocolResult pr = state_merging(psi, "A", "B", "R", 0.5, 32, 12);
        REQUIRE(pr.transcript.q_total == 2);
        REQUIRE(pr.transcript.achieved_distance <= 0.5 + 1e-9);
    }
    SECTION("pure product input: only the overhead remains") {
        PureStateVector psi(VectorXcd::Unit(8, 0), SpaceLayout({2, 2, 2}, {"A", "B", "R"}));
        ProtocolResult pr = state_merging(psi, "A", "B", "R", 0.5, 16, 13);
        REQUIRE(pr.transcript.q_total == 2); // ceil(2 log(1/eps))
        REQUIRE(pr.transcript.achieved_distance < 1e-7);
    }
    SECTION("cost formulas hold on random states") {
        CounterRng rng(611);
        for (int k = 0; k < 10; ++k) {
            CounterRng r = rng.substream(k);
            PureStateVector psi = random_pure_state(SpaceLayout({4, 2, 4}, {"A", "B", "R"}), r);
            double eps = 0.3;
            ProtocolResult pr = state_merging(psi, "A", "B", "R", eps, 48, 7000 + k);
            double h0 = spectral_entropies(marginal(psi, {"A"})).h_0;
            double hmin = h_min_cond(marginal(psi, {"A", "R"}), {"A"}, {"R"}).value;
            int q_expect = static_cast<int>(
                std::ceil(0.5 * (h0 - hmin) + 2 * std::log2(1 / eps) - 1e-7));
            int e_expect = static_cast<int>(
                std::floor(0.5 * (h0 + hmin) - 2 * std::log2(1 / eps) + 1e-7));
            REQUIRE(pr.transcript.q_total == q_expect);
            REQUIRE(pr.transcript.e_gain_or_cost == e_expect);
            if (pr.transcript.certified)
                REQUIRE(pr.transcript.achieved_distance <= eps + 1e-9);
        }
    }
}

TEST_CASE("state splitting with maximally entangled states") {
    SECTION("A' maximally entangled with R: q = 3 at eps=1/2") {
        PureStateVector psi = product_with(max_entangled(2, "Ap", "R"), "A", 2);
        psi = permute_subsystems(psi, {"A", "Ap", "R"});
        ProtocolResult pr = state_splitting_max_ent(psi, "A", "Ap", "R", 0.5, 32, 21);
        REQUIRE(pr.transcript.q_total == 3);
        REQUIRE(pr.transcript.certified);
        REQUIRE(pr.transcript.achieved_distance <= 0.5 + 1e-9);
    }
    SECTION("trivial A' moves nothing") {
        PureStateVector psi = product_with(max_entangled(2, "A", "R"), "Ap", 1);
        psi = permute_subsystems(psi, {"A", "Ap", "R"});
        ProtocolResult pr = state_splitting_max_ent(psi, "A", "Ap", "R", 0.5, 8, 22);
        REQUIRE(pr.transcript.q_total == 2); // pure overhead
        REQUIRE(pr.transcript.achieved_distance < 1e-8);
    }
    SECTION("splitting then merging returns the state to within 2 eps") {
        CounterRng rng(621);
        for (int k = 0; k < 6; ++k) {
            CounterRng r = rng.substream(k);
            PureStateVector psi =
                random_pure_state(SpaceLayout({2, 2, 2}, {"A", "Ap", "R"}), r);
            double eps = 0.35;
            ProtocolResult sp = state_splitting_max_ent(psi, "A", "Ap", "R", eps, 64, 8000 + k);
            if (!sp.transcript.certified) continue;
            // move it back: merge the B part with the A side
            ProtocolResult mg =
                state_merging(sp.output_vector, "B", "A", "R", eps, 64, 9000 + k);
            if (!mg.transcript.certified) continue;
            // merged output holds the moved content in "Bp"; compare marginals
            // of (Bp=former Ap content, R) against the original (Ap, R)
            DensityOperator before = marginal(psi, {"Ap", "R"});
            Operator after =
                permute_subsystems(marginal(mg.output_vector, {"Bp", "R"}).op(), {"Bp", "R"});
            REQUIRE(after.dim() == before.dim());
            double dist = purified_distance(
                DensityOperator(after.matrix(), before.layout()), before);
            REQUIRE(dist <= 2 * eps + 1e-6);
        }
    }
}

TEST_CASE("eigenvalue banding") {
    SECTION("maximally mixed qubit lands in band 1") {
        BandingResult b = eigenvalue_banding(maximally_mixed(2, "Ap"));
        REQUIRE(b.q_bands == 1);
        REQUIRE(b.probabilities[1] == Approx(1.0).margin(1e-12));
        REQUIRE(b.probabilities[0] == Approx(0.0).margin(1e-12));
    }
    SECTION("diag(0.9, 0.1): bands 0 and 3") {
        DensityOperator rho = diag_state({0.9, 0.1}, "Ap");
        BandingResult b = eigenvalue_banding(rho);
        REQUIRE(b.q_bands == 1);
        // with |A'| = 2 only bands 0, 1=Q and 2=Q+1 exist; 0.1 <= 1/4 joins the tail
        REQUIRE(b.probabilities[0] == Approx(0.9).margin(1e-12));
        REQUIRE(b.probabilities[2] == Approx(0.1).margin(1e-12));
    }
    SECTION("dyadic interval arithmetic at |A'| = 16") {
        std::vector<double> evs{0.9, 0.1};
        evs.resize(16, 0.0);
        evs[0] = 0.9;
        evs[1] = 0.1;
        BandingResult b = eigenvalue_banding(diag_state(evs, "Ap"));
        REQUIRE(b.q_bands == 7);
        REQUIRE(b.probabilities[0] == Approx(0.9).margin(1e-12)); // (1/2, 1]
        REQUIRE(b.probabilities[3] == Approx(0.1).margin(1e-12)); // (1/16, 1/8]
    }
    SECTION("projectors resolve the identity and W is an isometry") {
        CounterRng rng(631);
        DensityOperator rho = random_density_operator(SpaceLayout::single(4, "Ap"), rng, 3);
        BandingResult b = eigenvalue_banding(rho);
        MatrixXcd sum = MatrixXcd::Zero(4, 4);
        for (const auto& p : b.projectors) sum += p.matrix();
        REQUIRE(frobenius_diff(sum, MatrixXcd::Identity(4, 4)) < 1e-10);
        REQUIRE(b.w.is_full());
        double total = 0;
        for (double p : b.probabilities) total += p;
        REQUIRE(total == Approx(1.0).margin(1e-9));
    }
    SECTION("tail probability at most 1/|A'| on random states") {
        CounterRng rng(632);
        for (int k = 0; k < 200; ++k) {
            CounterRng r = rng.substream(k);
            DensityOperator rho = random_density_operator(SpaceLayout::single(4, "Ap"), r);
            BandingResult b = eigenvalue_banding(rho);
            REQUIRE(b.probabilities.back() <= 0.25 + 1e-9);
        }
    }
    SECTION("within each band the rank is at most twice the inverse max eigenvalue") {
        // spectral statement behind the per-band cost bound: H0 <= Hmin + 1
        CounterRng rng(633);
        for (int k = 0; k < 100; ++k) {
            CounterRng r = rng.substream(k);
            DensityOperator rho = random_density_operator(SpaceLayout::single(4, "Ap"), r);
            BandingResult b = eigenvalue_banding(rho);
            for (int i = 0; i <= b.q_bands; ++i) {
                if (b.probabilities[i] < 1e-9) continue;
                MatrixXcd blk = b.projectors[i].matrix() * rho.matrix() *
                                b.projectors[i].matrix();
                DensityOperator band_state(0.5 * (blk + blk.adjoint()), rho.layout());
                SpectralEntropies s = spectral_entropies(band_state);
                REQUIRE(s.h_0 <= -std::log2(std::pow(2.0, -s.h_min)) + 1.0 + 1e-6);
            }
        }
    }
}

TEST_CASE("splitting with embezzling states") {
    SECTION("qubit A' maximally entangled with R at eps = eps' = 1/4") {
        PureStateVector psi = product_with(max_entangled(2, "Ap", "R"), "A", 2);
        psi = permute_subsystems(psi, {"A", "Ap", "R"});
        SplitEmbezzleOptions opt;
        opt.eps = 0.25;
        opt.eps_prime = 0.25;
        opt.delta = 0.1;
        opt.seed = 41;
        SplitEmbezzleResult res = state_splitting_embezzling(psi, "A", "Ap", "R", opt);
        // bound instantiation: 1/2 * Imax + 2 log 4 + 4 + loglog 2 <= 9
        REQUIRE(res.q_bound <= 9.0 + 1e-9);
        REQUIRE(res.transcript.q_total <= res.q_bound + 1e-9);
        REQUIRE(res.transcript.achieved_distance <= res.distance_bound + 1e-9);
    }
    SECTION("exact smoothing keeps the certified bounds on random two-qubit movers") {
        CounterRng rng(641);
        int certified = 0, total = 0;
        for (int k = 0; k < 8; ++k) {
            CounterRng r = rng.substream(k);
            PureStateVector psi =
                random_pure_state(SpaceLayout({4, 4, 4}, {"A", "Ap", "R"}), r);
            SplitEmbezzleOptions opt;
            opt.eps = 0.25;
            opt.eps_prime = 0.0;
            opt.delta = 0.25;
            opt.seed = 4200 + k;
            SplitEmbezzleResult res = state_splitting_embezzling(psi, "A", "Ap", "R", opt);
            ++total;
            if (!res.transcript.certified) continue;
            ++certified;
            REQUIRE(res.transcript.q_total <= res.q_bound + 1e-9);
            REQUIRE(res.transcript.achieved_distance <= res.distance_bound + 1e-9);
            // converse audit on every successful run
            AuditReport audit =
                converse_audit(res.transcript, res.output, "B", "R");
            REQUIRE(audit.pass);
        }
        REQUIRE(certified >= (total * 2) / 3);
    }
}

TEST_CASE("converse audit") {
    SECTION("no communication and a product output") {
        ProtocolTranscript t;
        t.q_total = 0;
        CounterRng rng(651);
        DensityOperator prod =
            tensor_product(random_density_operator(SpaceLayout::single(2, "B"), rng),
                           random_density_operator(SpaceLayout::single(2, "R"), rng));
        AuditReport a = converse_audit(t, prod, "B", "R");
        REQUIRE(a.imax_br <= 1e-4);
        REQUIRE(a.pass);
    }
    SECTION("bell transfer with q=3 satisfies 2 <= 6") {
        ProtocolTranscript t;
        t.q_total = 3;
        AuditReport a = converse_audit(t, bell_pair("B", "R").projector(), "B", "R");
        REQUIRE(a.imax_br == Approx(2.0).margin(1e-5));
        REQUIRE(a.pass);
    }
}

TEST_CASE("teleportation") {
    SECTION("accounting: 2 classical bits and 1 ebit per qubit") {
        REQUIRE(teleport_accounting(0).cbits == 0);
        REQUIRE(teleport_accounting(0).ebits == 0);
        REQUIRE(teleport_accounting(3).cbits == 6);
        REQUIRE(teleport_accounting(3).ebits == 3);
    }
    SECTION("the circuit moves arbitrary states exactly") {
        CounterRng rng(661);
        DensityOperator rho = random_density_operator(SpaceLayout::single(2, "X"), rng);
        DensityOperator out = teleport_qubit(rho, "X");
        REQUIRE(frobenius_diff(out.matrix(), rho.matrix()) < 1e-10);
    }
    SECTION("teleporting half an entangled pair keeps the correlations") {
        DensityOperator bell = bell_pair().projector();
        DensityOperator out = teleport_qubit(bell, "A");
        REQUIRE(trace_distance(out, bell) < 1e-10);
    }
}

TEST_CASE("transcript serialization") {
    PureStateVector psi = product_with(max_entangled(2, "A", "R"), "B", 2);
    ProtocolResult pr = state_merging(psi, "A", "B", "R", 0.5, 8, 71);
    std::string j = transcript_to_json(pr.transcript);
    REQUIRE(j.find("\"kind\": \"merge\"") != std::string::npos);
    REQUIRE(j.find("\"q_total\": 3") != std::string::npos);
    REQUIRE(j.find("\"send_qubits\"") != std::string::npos);
    REQUIRE(j.find("\"achieved_distance\"") != std::string::npos);
}
