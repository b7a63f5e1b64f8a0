#include <catch2/catch_amalgamated.hpp>

#include <osqit/entropy.hpp>
#include <osqit/geometry.hpp>
#include <osqit/linalg.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include "test_util.hpp"

#include <cmath>

using namespace osqit;
using namespace testutil;
using Catch::Approx;

namespace {

const std::vector<std::string> A{"A"}, B{"B"};

DensityOperator classically_correlated() {
    MatrixXcd m = MatrixXcd::Zero(4, 4);
    m(0, 0) = 0.5;
    m(3, 3) = 0.5;
    return DensityOperator(m, qubit_pair());
}

} // namespace

TEST_CASE("von Neumann entropy") {
    REQUIRE(von_neumann(maximally_mixed(2)).value == Approx(1.0));
    REQUIRE(von_neumann(diag_state({1.0, 0.0})).value == Approx(0.0).margin(1e-12));
    // scalar-formula oracle
    double expect = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
    REQUIRE(von_neumann(diag_state({0.75, 0.25})).value == Approx(expect).margin(1e-12));
    REQUIRE(expect == Approx(0.8112781).margin(1e-7));
    REQUIRE_THROWS_AS(von_neumann(diag_state({0.5, 0.0})), std::invalid_argument);
}

TEST_CASE("relative entropy") {
    CounterRng rng(301);
    DensityOperator rho = random_density_operator(SpaceLayout::single(2, "A"), rng);
    REQUIRE(relative_entropy(rho, rho).value == Approx(0.0).margin(1e-9));
    REQUIRE(std::isinf(relative_entropy(diag_state({1, 0}), diag_state({0, 1})).value));
    double expect = 0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(0.5 / 0.25);
    REQUIRE(relative_entropy(diag_state({0.5, 0.5}), diag_state({0.75, 0.25})).value ==
            Approx(expect).margin(1e-12));
    REQUIRE(expect == Approx(0.2075187).margin(1e-7));
}

TEST_CASE("conditional entropy and mutual information") {
    SECTION("product state") {
        CounterRng rng(302);
        DensityOperator ra = random_density_operator(SpaceLayout::single(2, "A"), rng);
        DensityOperator rb = random_density_operator(SpaceLayout::single(2, "B"), rng);
        DensityOperator prod = tensor_product(ra, rb);
        REQUIRE(conditional_entropy(prod, A, B).value ==
                Approx(von_neumann(ra).value).margin(1e-9));
        REQUIRE(mutual_information(prod, A, B).value == Approx(0.0).margin(1e-9));
    }
    SECTION("bell state") {
        DensityOperator bell = bell_pair().projector();
        REQUIRE(conditional_entropy(bell, A, B).value == Approx(-1.0).margin(1e-9));
        REQUIRE(mutual_information(bell, A, B).value == Approx(2.0).margin(1e-9));
    }
    SECTION("maximally mixed two qubits") {
        DensityOperator mm(MatrixXcd::Identity(4, 4) / 4.0, qubit_pair());
        REQUIRE(conditional_entropy(mm, A, B).value == Approx(1.0).margin(1e-9));
    }
    SECTION("classically correlated") {
        REQUIRE(mutual_information(classically_correlated(), A, B).value ==
                Approx(1.0).margin(1e-9));
    }
    SECTION("H(A|B) = H(AB) - H(B) on random states") {
        CounterRng rng(303);
        for (int k = 0; k < 50; ++k) {
            CounterRng r = rng.substream(k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double lhs = conditional_entropy(rho, A, B).value;
            double rhs = von_neumann(rho).value -
                         von_neumann(partial_trace(rho, B)).value;
            REQUIRE(lhs == Approx(rhs).margin(1e-9));
        }
    }
}

TEST_CASE("max-relative entropy") {
    SECTION("identical states give zero") {
        CounterRng rng(311);
        DensityOperator rho = random_density_operator(SpaceLayout::single(3, "A"), rng);
        REQUIRE(d_max(rho, rho).value == Approx(0.0).margin(1e-8));
    }
    SECTION("bell state against the product of its marginals gives 2") {
        DensityOperator bell = bell_pair().projector();
        DensityOperator prod = tensor_product(partial_trace(bell, A), partial_trace(bell, B));
        REQUIRE(d_max(bell, prod).value == Approx(2.0).margin(1e-9));
    }
    SECTION("commuting case reduces to the max eigenvalue ratio") {
        REQUIRE(d_max(diag_state({0.5, 0.5}), diag_state({0.25, 0.75})).value ==
                Approx(1.0).margin(1e-10));
    }
    SECTION("support violation is +infinity") {
        REQUIRE(std::isinf(d_max(diag_state({1, 0}), diag_state({0, 1})).value));
    }
}

TEST_CASE("min-relative entropy") {
    CounterRng rng(321);
    SECTION("full-rank first argument gives zero for normalized sigma") {
        DensityOperator rho = random_density_operator(SpaceLayout::single(2, "A"), rng);
        DensityOperator sig = random_density_operator(SpaceLayout::single(2, "A"), rng);
        REQUIRE(d_min(rho, sig).value == Approx(0.0).margin(1e-9));
    }
    SECTION("pure vs maximally mixed") {
        REQUIRE(d_min(diag_state({1, 0}), maximally_mixed(2)).value == Approx(1.0));
    }
    SECTION("orthogonal supports diverge") {
        REQUIRE(std::isinf(d_min(diag_state({1, 0}), diag_state({0, 1})).value));
    }
}

TEST_CASE("conditional min-entropy") {
    SECTION("maximally mixed two qubits saturates the dimension bound") {
        DensityOperator mm(MatrixXcd::Identity(4, 4) / 4.0, qubit_pair());
        REQUIRE(h_min_cond(mm, A, B).value == Approx(1.0).margin(1e-6));
    }
    SECTION("bell state gives -1") {
        REQUIRE(h_min_cond(bell_pair().projector(), A, B).value == Approx(-1.0).margin(1e-6));
    }
    SECTION("pure product gives 0") {
        DensityOperator pp = tensor_product(diag_state({1.0, 0.0}, "A"),
                                            diag_state({1.0, 0.0}, "B"));
        REQUIRE(h_min_cond(pp, A, B).value == Approx(0.0).margin(1e-6));
    }
    SECTION("maximally entangled of rank d gives -log d") {
        for (int d : {2, 3, 4}) {
            DensityOperator me = max_entangled(d).projector();
            REQUIRE(h_min_cond(me, A, B).value ==
                    Approx(-std::log2(double(d))).margin(1e-6));
        }
    }
    SECTION("relative version with sigma_b = rho_b") {
        CounterRng rng(331);
        DensityOperator rho = random_density_operator(qubit_pair(), rng);
        DensityOperator rb = partial_trace(rho, B);
        double rel = h_min_cond(rho, A, B, rb).value;
        double opt = h_min_cond(rho, A, B).value;
        REQUIRE(rel <= opt + 1e-7); // optimized sigma can only help
    }
    SECTION("trivial conditioning system") {
        DensityOperator rho = diag_state({0.9, 0.1});
        REQUIRE(h_min_cond(rho, A, {}).value == Approx(-std::log2(0.9)).margin(1e-12));
    }
}

TEST_CASE("collision entropy") {
    SECTION("maximally mixed two qubits") {
        DensityOperator mm(MatrixXcd::Identity(4, 4) / 4.0, qubit_pair());
        REQUIRE(h_collision(mm, A, B).value == Approx(1.0).margin(1e-4));
    }
    SECTION("pure product gives zero") {
        DensityOperator pp = tensor_product(diag_state({1.0, 0.0}, "A"),
                                            diag_state({1.0, 0.0}, "B"));
        REQUIRE(h_collision(pp, A, B).value == Approx(0.0).margin(1e-4));
    }
    SECTION("optimizer at least matches a Bloch-ball grid search") {
        CounterRng rng(341);
        DensityOperator rho = random_density_operator(qubit_pair(), rng);
        double opt = h_collision(rho, A, B).value;
        // grid over qubit states sigma = (I + r.n sigma_vec)/2
        double best = 1e300;
        for (double rr : {0.0, 0.3, 0.6, 0.9, 0.99})
            for (int it = 0; it < 64; ++it)
                for (int ip = 0; ip < 16; ++ip) {
                    double th = M_PI * it / 63.0, ph = 2 * M_PI * ip / 16.0;
                    MatrixXcd sig = 0.5 * (MatrixXcd::Identity(2, 2) +
                                           rr * std::sin(th) * std::cos(ph) * pauli_x() +
                                           rr * std::sin(th) * std::sin(ph) * pauli_y() +
                                           rr * std::cos(th) * pauli_z());
                    MatrixXcd s4 = matrix_function_psd(sig, OpFunc::PseudoInversePower, 0.25);
                    MatrixXcd big = Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2), s4).eval();
                    MatrixXcd m = big * rho.matrix() * big;
                    best = std::min(best, (m * m).trace().real());
                }
        double grid = -std::log2(best);
        REQUIRE(opt >= grid - 1e-3); // optimizer at least as good as the grid
        REQUIRE(opt <= grid + 0.2);  // and in the same ballpark
    }
}

TEST_CASE("spectral entropies") {
    SECTION("maximally mixed: all four equal log d") {
        for (int d : {2, 3, 4}) {
            SpectralEntropies s = spectral_entropies(maximally_mixed(d));
            double ld = std::log2(double(d));
            REQUIRE(s.h_max == Approx(ld).margin(1e-10));
            REQUIRE(s.h_0 == Approx(ld).margin(1e-10));
            REQUIRE(s.h_r == Approx(ld).margin(1e-10));
            REQUIRE(s.h_min == Approx(ld).margin(1e-10));
        }
    }
    SECTION("diag(0.9, 0.1) scalar formulas") {
        SpectralEntropies s = spectral_entropies(diag_state({0.9, 0.1}));
        REQUIRE(s.h_0 == Approx(1.0));
        REQUIRE(s.h_min == Approx(-std::log2(0.9)));
        REQUIRE(s.h_r == Approx(-std::log2(0.1)));
        REQUIRE(s.h_max == Approx(2 * std::log2(std::sqrt(0.9) + std::sqrt(0.1))));
    }
    SECTION("pure state: all zero") {
        SpectralEntropies s = spectral_entropies(diag_state({1.0, 0.0}));
        REQUIRE(s.h_max == Approx(0.0).margin(1e-10));
        REQUIRE(s.h_0 == Approx(0.0).margin(1e-10));
        REQUIRE(s.h_r == Approx(0.0).margin(1e-10));
        REQUIRE(s.h_min == Approx(0.0).margin(1e-10));
    }
    SECTION("zero operator rejected") {
        MatrixXcd z = MatrixXcd::Zero(2, 2);
        REQUIRE_THROWS_AS(spectral_entropies(DensityOperator(z, SpaceLayout::single(2, "A"))),
                          std::invalid_argument);
    }
}

TEST_CASE("max-information") {
    SECTION("product state gives 0") {
        CounterRng rng(351);
        DensityOperator prod =
            tensor_product(random_density_operator(SpaceLayout::single(2, "A"), rng),
                           random_density_operator(SpaceLayout::single(2, "B"), rng));
        REQUIRE(i_max(prod, A, B).value == Approx(0.0).margin(1e-6));
    }
    SECTION("bell state gives 2") {
        REQUIRE(i_max(bell_pair().projector(), A, B).value == Approx(2.0).margin(1e-6));
    }
    SECTION("classically correlated gives 1 (diagonal-sigma grid oracle)") {
        DensityOperator cc = classically_correlated();
        REQUIRE(i_max(cc, A, B).value == Approx(1.0).margin(1e-6));
        // brute force over diagonal sigma_B
        double best = 1e300;
        for (int i = 1; i < 64; ++i) {
            double s = i / 64.0;
            // Dmax(cc || rho_A (x) diag(s, 1-s)) for commuting diagonals
            double lam = std::max(0.5 / (0.5 * s), 0.5 / (0.5 * (1 - s)));
            best = std::min(best, std::log2(lam));
        }
        REQUIRE(best == Approx(1.0).margin(1e-3));
    }
    SECTION("maximally entangled of rank d gives 2 log d") {
        for (int d : {2, 3}) {
            DensityOperator me = max_entangled(d).projector();
            REQUIRE(i_max(me, A, B).value == Approx(2 * std::log2(double(d))).margin(1e-6));
        }
    }
}

TEST_CASE("spectrum truncation") {
    SECTION("pure state: nothing dropped") {
        TruncationResult t = truncate_spectrum(diag_state({1.0, 0.0}), 0.3);
        REQUIRE(t.dropped == 0);
        REQUIRE(t.projector.trace().real() == Approx(1.0)); // support projector only
    }
    SECTION("diag(0.99, 0.01) at eps 0.3 drops the small eigenvalue") {
        TruncationResult t = truncate_spectrum(diag_state({0.99, 0.01}), 0.3);
        REQUIRE(t.dropped == 1);
        // commuting-truncation formula: F = 0.99, P = sqrt(1 - 0.99^2)
        double expect = std::sqrt(1.0 - 0.99 * 0.99);
        REQUIRE(t.distance == Approx(expect).margin(1e-12));
        REQUIRE(t.distance <= 0.3);
        // oracle: recompute the purified distance directly
        REQUIRE(purified_distance(diag_state({0.99, 0.01}), t.truncated) ==
                Approx(expect).margin(1e-9));
    }
    SECTION("I/2 at eps 0.1: no drop possible") {
        TruncationResult t = truncate_spectrum(maximally_mixed(2), 0.1);
        REQUIRE(t.dropped == 0);
    }
    SECTION("projection-bound consistency on random states") {
        CounterRng rng(361);
        for (int k = 0; k < 100; ++k) {
            CounterRng r = rng.substream(k);
            DensityOperator rho = random_subnormalized(SpaceLayout::single(4, "A"), r);
            double eps = 0.05 + 0.5 * r.uniform();
            TruncationResult t = truncate_spectrum(rho, eps);
            REQUIRE(purified_distance(rho, t.truncated) <= eps + 1e-9);
        }
    }
}

TEST_CASE("smooth quantities") {
    DensityOperator bell = bell_pair().projector();
    DensityOperator mm(MatrixXcd::Identity(4, 4) / 4.0, qubit_pair());

    SECTION("eps=0 collapses to the exact quantities") {
        SmoothEntropyValue h0 = smooth_quantity(SmoothKind::HMinCond, bell, 0.0, A, B);
        REQUIRE(h0.value == Approx(h_min_cond(bell, A, B).value).margin(1e-6));
        SmoothEntropyValue i0 = smooth_quantity(SmoothKind::IMax, bell, 0.0, A, B);
        REQUIRE(i0.value == Approx(i_max(bell, A, B).value).margin(1e-6));
        CounterRng rng(371);
        DensityOperator rho = random_density_operator(qubit_pair(), rng);
        SmoothEntropyValue m0 = smooth_quantity(SmoothKind::HMax, rho, 0.0,
                                                {"A", "B"});
        REQUIRE(m0.value == Approx(spectral_entropies(rho).h_max).margin(1e-6));
    }

    SECTION("smooth min-entropy only grows with eps") {
        for (double eps : {0.05, 0.1, 0.2}) {
            SmoothEntropyValue s = smooth_quantity(SmoothKind::HMinCond, mm, eps, A, B);
            REQUIRE(s.value >= 1.0 - 1e-6); // the ball contains the state itself
            REQUIRE(s.witness.has_value());
            REQUIRE(purified_distance(*s.witness, mm) <= eps + 1e-7);
        }
    }

    SECTION("smooth max-information upper bound is non-increasing in eps") {
        double prev = 1e300;
        for (double eps : {0.0, 0.05, 0.1, 0.2}) {
            SmoothEntropyValue s = smooth_quantity(SmoothKind::IMax, bell, eps, A, B);
            REQUIRE(s.value <= prev + 1e-6);
            REQUIRE(s.witness.has_value());
            REQUIRE(purified_distance(*s.witness, bell) <= eps + 1e-7);
            // certified upper bound: re-evaluating the witness reproduces it
            prev = s.value;
        }
    }

    SECTION("smooth max-entropy shrinks with eps") {
        CounterRng rng(372);
        DensityOperator rho = random_density_operator(SpaceLayout::single(4, "A"), rng);
        double exact = spectral_entropies(rho).h_max;
        SmoothEntropyValue s = smooth_quantity(SmoothKind::HMax, rho, 0.1, {"A"});
        REQUIRE(s.value <= exact + 1e-6);
    }
}

TEST_CASE("entropic inequality batteries") {
    CounterRng rng(381);
    const int n_small = 120; // instances involving SDP solves

    SECTION("dimension bounds and orderings on random two-qubit states") {
        for (int k = 0; k < n_small; ++k) {
            CounterRng r = rng.substream(k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double hmin = h_min_cond(rho, A, B).value;
            double imax = i_max(rho, A, B).value;
            SpectralEntropies sa = spectral_entropies(partial_trace(rho, A));

            // conditional min-entropy sits below the collision entropy
            double hc = h_collision(rho, A, B).value;
            REQUIRE(hmin <= hc + 1e-4);

            // dimension bounds
            REQUIRE(hmin >= -1.0 - 1e-6);             // -log|A| for normalized states
            REQUIRE(imax <= 2.0 + 1e-6);              // 2 log min(|A|,|B|)
            REQUIRE(imax >= sa.h_min - hmin - 1e-6);  // min-entropy difference bound
            REQUIRE(imax <= sa.h_r - hmin + 1e-6);    // spectral difference bound

            // relative-entropy ordering
            DensityOperator sig = random_density_operator(qubit_pair(), r);
            REQUIRE(d_max(rho, sig).value >= relative_entropy(rho, sig).value - 1e-9);
            REQUIRE(d_min(rho, sig).value >= -1e-9);
        }
    }

    SECTION("alternative max-information expression via a conditional state") {
        for (int k = 0; k < n_small; ++k) {
            CounterRng r = rng.substream(500 + k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double imax = i_max(rho, A, B).value;

            DensityOperator rho_a = partial_trace(rho, A);
            int rank = 0;
            {
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho_a.matrix(),
                                                            Eigen::EigenvaluesOnly);
                for (int i = 0; i < 2; ++i)
                    if (es.eigenvalues()(i) > 1e-12) ++rank;
            }
            MatrixXcd inv =
                matrix_function_psd(rho_a.matrix(), OpFunc::PseudoInversePower, 0.5);
            MatrixXcd big = Eigen::kroneckerProduct(inv, MatrixXcd::Identity(2, 2)).eval();
            MatrixXcd cond = big * (rho.matrix() / rank) * big;
            DensityOperator rho_cond(0.5 * (cond + cond.adjoint()), qubit_pair());
            double h0 = std::log2(double(rank));
            double hmin_cond_state = h_min_cond(rho_cond, A, B).value;
            REQUIRE(imax == Approx(h0 - hmin_cond_state).margin(1e-5));
        }
    }

    SECTION("monotonicity under local channels (unitary + mixing)") {
        for (int k = 0; k < 60; ++k) {
            CounterRng r = rng.substream(1000 + k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double before = i_max(rho, A, B).value;
            // local mixing channel: with prob p replace A side by maximally mixed
            double p = r.uniform();
            MatrixXcd mixed =
                (1 - p) * rho.matrix() +
                p * Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2) / 2.0,
                                            partial_trace(rho, B).matrix()).eval();
            double after = i_max(DensityOperator(mixed, qubit_pair()), A, B).value;
            REQUIRE(after <= before + 1e-6);
        }
    }

    SECTION("quasi-convexity of the max-relative entropy") {
        for (int k = 0; k < 200; ++k) {
            CounterRng r = rng.substream(2000 + k);
            SpaceLayout l = SpaceLayout::single(2, "A");
            DensityOperator r1 = random_density_operator(l, r);
            DensityOperator r2 = random_density_operator(l, r);
            DensityOperator s1 = random_density_operator(l, r);
            DensityOperator s2 = random_density_operator(l, r);
            double p = r.uniform();
            MatrixXcd rm = p * r1.matrix() + (1 - p) * r2.matrix();
            MatrixXcd sm = p * s1.matrix() + (1 - p) * s2.matrix();
            double mix = d_max(DensityOperator(rm, l), DensityOperator(sm, l)).value;
            double worst = std::max(d_max(r1, s1).value, d_max(r2, s2).value);
            REQUIRE(mix <= worst + 1e-9);
        }
    }

    SECTION("max-information of classical-quantum extensions") {
        for (int k = 0; k < 30; ++k) {
            CounterRng r = rng.substream(3000 + k);
            DensityOperator r1 = random_density_operator(qubit_pair(), r);
            DensityOperator r2 = random_density_operator(qubit_pair(), r);
            double p = 0.2 + 0.6 * r.uniform();
            // rho_ABI = p r1 (x) |0><0| + (1-p) r2 (x) |1><1|, I appended on A's side
            SpaceLayout big({2, 2, 2}, {"A", "B", "I"});
            MatrixXcd m = MatrixXcd::Zero(8, 8);
            for (int x = 0; x < 4; ++x)
                for (int y = 0; y < 4; ++y) {
                    int ax = x / 2, bx = x % 2, ay = y / 2, by = y % 2;
                    // index in (A,B,I): a*4 + b*2 + i
                    m(ax * 4 + bx * 2 + 0, ay * 4 + by * 2 + 0) += p * r1.matrix()(x, y);
                    m(ax * 4 + bx * 2 + 1, ay * 4 + by * 2 + 1) += (1 - p) * r2.matrix()(x, y);
                }
            DensityOperator cq(m, big);
            double lhs = i_max(cq, {"A", "I"}, {"B"}).value;
            double rhs = std::max(i_max(r1, A, B).value, i_max(r2, A, B).value);
            REQUIRE(lhs >= rhs - 1e-6);
        }
    }

    SECTION("projective measurements can only lower the max-information") {
        for (int k = 0; k < 30; ++k) {
            CounterRng r = rng.substream(4000 + k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double before = i_max(rho, A, B).value;
            Operator u = haar_unitary(2, r, SpaceLayout::single(2, "A"));
            for (int i = 0; i < 2; ++i) {
                MatrixXcd pi = u.matrix().col(i) * u.matrix().col(i).adjoint();
                MatrixXcd big = Eigen::kroneckerProduct(pi, MatrixXcd::Identity(2, 2)).eval();
                MatrixXcd post = big * rho.matrix() * big;
                double prob = post.trace().real();
                if (prob < 1e-9) continue;
                DensityOperator branch(post / prob, qubit_pair());
                REQUIRE(i_max(branch, A, B).value <= before + 1e-6);
            }
        }
    }

    SECTION("adding a subsystem costs at most 2 log |C| (exact smoothing at eps=0)") {
        for (int k = 0; k < 30; ++k) {
            CounterRng r = rng.substream(5000 + k);
            SpaceLayout l3({2, 2, 2}, {"A", "B", "C"});
            DensityOperator rho = random_density_operator(l3, r);
            double abc = i_max(rho, A, {"B", "C"}).value;
            double ab = i_max(partial_trace(rho, {"A", "B"}), A, B).value;
            REQUIRE(abc <= ab + 2.0 + 1e-6);
        }
    }

    SECTION("min-entropy under dominated projections") {
        // If 1 (x) omega >= Pi (1 (x) sigma) Pi then projecting cannot lower
        // the min-entropy relative to the dominating state.
        for (int k = 0; k < 60; ++k) {
            CounterRng r = rng.substream(6000 + k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            DensityOperator sig = random_density_operator(SpaceLayout::single(2, "B"), r);
            // random contraction 0 <= Pi <= 1 on AB
            Operator u = haar_unitary(4, r, qubit_pair());
            MatrixXcd dvals = MatrixXcd::Zero(4, 4);
            for (int i = 0; i < 4; ++i) dvals(i, i) = r.uniform();
            MatrixXcd pi = u.matrix() * dvals * u.matrix().adjoint();
            MatrixXcd t = pi * Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2),
                                                       sig.matrix()).eval() * pi;
            // omega dominating: lambda_max of tr over... choose omega via the
            // smallest c with 1 (x) omega >= T: omega = c * I/2 works for
            // c = 2*||T||; normalize with a scaled Pi instead.
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(t, Eigen::EigenvaluesOnly);
            double c = std::max(es.eigenvalues().maxCoeff(), 1e-12) * 2.0;
            MatrixXcd pi_scaled = pi / std::sqrt(c);
            MatrixXcd omega = MatrixXcd::Identity(2, 2) / 2.0;
            // verify the premise on the scaled contraction
            MatrixXcd prem = Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2), omega).eval() -
                             pi_scaled *
                                 Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2),
                                                         sig.matrix()).eval() *
                                 pi_scaled;
            Eigen::SelfAdjointEigenSolver<MatrixXcd> pcheck(prem, Eigen::EigenvaluesOnly);
            REQUIRE(pcheck.eigenvalues().minCoeff() >= -1e-10);

            MatrixXcd projected = pi_scaled * rho.matrix() * pi_scaled;
            DensityOperator prho(0.5 * (projected + projected.adjoint()), qubit_pair());
            DensityOperator om(omega, SpaceLayout::single(2, "B"));
            double lhs = h_min_cond(prho, A, B, om).value;
            double rhs = h_min_cond(rho, A, B, sig).value;
            REQUIRE(lhs >= rhs - 1e-8);
        }
    }

    SECTION("truncation lemma: smooth max-entropy controls the truncated spectrum") {
        for (int k = 0; k < 20; ++k) {
            CounterRng r = rng.substream(7000 + k);
            DensityOperator rho = random_density_operator(SpaceLayout::single(4, "A"), r);
            double eps = 0.15 + 0.3 * r.uniform();
            TruncationResult t = truncate_spectrum(rho, eps);
            double hmax_eps =
                smooth_quantity(SmoothKind::HMax, rho, eps * eps / 6.0, {"A"}).value;
            SpectralEntropies st = spectral_entropies(t.truncated);
            REQUIRE(hmax_eps >= st.h_r + 2 * std::log2(eps * eps / 6.0) - 1e-5);
        }
    }

    SECTION("smooth max-information against the smooth-entropy difference bound") {
        for (int k = 0; k < 10; ++k) {
            CounterRng r = rng.substream(8000 + k);
            DensityOperator rho = random_density_operator(qubit_pair(), r);
            double eps = 0.3;
            SmoothEntropyValue im = smooth_quantity(SmoothKind::IMax, rho, eps, A, B);
            double d = eps * eps / 48.0;
            double hmax = smooth_quantity(SmoothKind::HMax, rho, d, A).value;
            double hmin = smooth_quantity(SmoothKind::HMinCond, rho, d, A, B).value;
            double bound = hmax - hmin - 2 * std::log2(eps * eps / 24.0);
            REQUIRE(im.value <= bound + 1e-5);
        }
    }
}
