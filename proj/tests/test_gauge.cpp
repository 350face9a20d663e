#include <cmath>
#include <numbers>

#include "chirality_lab/gauge.hpp"
#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/spectral.hpp"
#include "doctest.h"

using namespace chirality_lab;

namespace {

RealField component(const QuatField& q, int c) {
    RealField f(q.grid);
    f.values = q.comp[c];
    return f;
}

double sup(const QuatField& q) {
    double m = 0.0;
    for (const auto& c : q.comp)
        for (double x : c) m = std::max(m, std::abs(x));
    return m;
}

double sup(const QuatMatrixField& M) {
    double m = 0.0;
    for (const auto& e : M.entries) m = std::max(m, sup(e));
    return m;
}

QuatMatrixField scale_for_test(const QuatMatrixField& M, double s) {
    QuatMatrixField out = M;
    for (auto& e : out.entries) e = quat_scale(e, s);
    return out;
}

QuatMatrixField sub_for_test(const QuatMatrixField& a, const QuatMatrixField& b) {
    QuatMatrixField out = a;
    for (std::size_t k = 0; k < a.entries.size(); ++k) out.entries[k] = quat_sub(a.entries[k], b.entries[k]);
    return out;
}

double max_abs_diff(const QuatMatrixField& a, const QuatMatrixField& b) { return sup(sub_for_test(a, b)); }

// Pure quaternion field with band-limited components, scaled so ||grad u||_2 = grad_norm.
QuatMatrixField random_pure(const Grid2& g, Rng& rng, double grad_norm, int max_mode = 3) {
    QuatField u(g);
    for (int c = 1; c < 4; ++c) u.comp[c] = random_band_limited(g, rng, max_mode).values;
    QuatMatrixField U = as_matrix(u);
    U(0, 0) = quat_scale(u, grad_norm / grad_l2(U));
    return U;
}

RealField smooth_angle(const Grid2& g, double grad_norm) {
    RealField a = sample<double>(g, [](double x1, double x2) { return std::sin(x1) * std::cos(2 * x2) + 0.5 * std::cos(x1 - x2); });
    const Vec2Field ga = grad(a);
    return scaled(a, grad_norm / l2(std::vector<RealField>{ga.x1, ga.x2}));
}

}  // namespace

TEST_SUITE("gauge") {
    TEST_CASE("image of the identity and of the i-line subgroup") {
        Grid2 g(64);
        const GaugeImage z = N_apply(quat_constant(g, Quaternion{1.0}));
        CHECK(sup(z.omega) == 0.0);
        CHECK(sup(z.g) == 0.0);

        Rng rng(81);
        const RealField raw = random_band_limited(g, rng, 3);
        const RealField theta = scaled(raw, 0.3 / max_abs(raw));
        QuatField u(g);
        u.comp[1] = theta.values;
        const GaugeImage n = N_apply(quat_exp(u));
        CHECK(max_abs(component(n.omega(0, 0), 1) - laplacian(theta)) < 1e-10);
        CHECK(max_abs(component(n.omega(0, 0), 0)) < 1e-12);
        CHECK(sup(n.g) < 1e-12);
    }

    TEST_CASE("non-unit input is rejected") {
        Grid2 g(16);
        CHECK_THROWS_AS(N_apply(quat_constant(g, Quaternion{1.1})), NotUnitary);
    }

    TEST_CASE("linearization at the identity is second-order accurate") {
        Grid2 g(32);
        Rng rng(82);
        const QuatMatrixField U = random_pure(g, rng, 1.0);
        const GaugeImage lin = L1_apply(U);
        std::vector<double> err;
        for (double t : {1e-2, 5e-3, 2.5e-3}) err.push_back(image_norm(N_apply(hyper_exp(scale_for_test(U, t))) - scaled(lin, t)).total());
        const double order = std::log2(err[0] / err[1]), order2 = std::log2(err[1] / err[2]);
        CHECK(order >= 1.9);
        CHECK(order2 >= 1.9);
    }

    TEST_CASE("first-order solve") {
        Grid2 g(32);
        const QuatMatrixField zero = L1_solve(zero_image(g, 1));
        CHECK(sup(zero) == 0.0);

        GaugeImage wave = zero_image(g, 1);
        const RealField f = sample<double>(g, [](double x1, double x2) { return std::cos(2 * x1 + x2); });
        wave.omega(0, 0).comp[1] = f.values;
        const QuatMatrixField u = L1_solve(wave);
        CHECK(max_abs(component(u(0, 0), 1) + scaled(f, 0.2)) < 1e-13);
        CHECK(max_abs(component(u(0, 0), 2)) < 1e-14);
        CHECK(max_abs(component(u(0, 0), 3)) < 1e-14);

        Rng rng(83);
        GaugeImage rhs = L1_apply(random_pure(g, rng, 1.0));
        const GaugeImage back = L1_apply(L1_solve(rhs));
        CHECK(image_norm(back - rhs).total() < 1e-11 * image_norm(rhs).total());
    }

    TEST_CASE("linearized solve at a gauge") {
        Grid2 g(64);
        Rng rng(84);
        const GaugeImage rhs = L1_apply(random_pure(g, rng, 0.05));
        const auto at_identity = Lq_solve(quat_matrix_identity(g, 1), rhs);
        CHECK(sup(at_identity.U) > 0.0);
        CHECK(max_abs_diff(at_identity.U, L1_solve(rhs)) < 1e-15);

        const QuatMatrixField q0 = hyper_exp(random_pure(g, rng, 0.05));
        const GaugeImage compatible = Lq_apply(q0, random_pure(g, rng, 0.05));
        const auto r = Lq_solve(q0, compatible);
        CHECK(r.iterations <= 20);
        CHECK(r.residual < 1e-10);
        CHECK(r.mean_gap < 1e-10);

        const QuatMatrixField moderate = hyper_exp(random_pure(g, rng, 5.0));
        const auto m = Lq_solve(moderate, compatible);
        MESSAGE("contraction at ||grad q0|| = 5: " << m.contraction);
        CHECK(m.contraction > 0.4);

        const QuatMatrixField large = hyper_exp(random_pure(g, rng, 10.0, 2));
        try {
            Lq_solve(large, compatible);
            FAIL("expected divergence");
        } catch (const GaugeDivergence& e) {
            CHECK(e.contraction > 1.0);
        }
    }

    TEST_CASE("gauge solve: zero target and smallness precondition") {
        Grid2 g(32);
        const GaugeResult r = gauge_solve(zero_image(g, 1));
        CHECK(max_abs_diff(r.P, quat_matrix_identity(g, 1)) == 0.0);
        CHECK(r.residual == 0.0);
        GaugeImage big = zero_image(g, 1);
        big.g(0, 0) = quat_constant(g, Quaternion{0, 0, 1.0, 0});
        CHECK_THROWS_AS(gauge_solve(big), std::invalid_argument);
    }

    TEST_CASE("gauge solve recovers a manufactured image") {
        Grid2 g(64);
        Rng rng(85);
        const QuatMatrixField q_star = hyper_exp(random_pure(g, rng, 0.05));
        const GaugeImage target = N_apply(q_star);
        const GaugeResult r = gauge_solve(target);
        CHECK(r.residual < 1e-8);
        CHECK(r.unitarity < 1e-12);
        CHECK(r.algebra_defect < 1e-12);
        CHECK(r.omega_mean_gap < 1e-12);
        CHECK(r.t_reached == 1.0);
        CHECK(std::isfinite(r.theta_measured));
        CHECK(max_abs(quat_abs(r.q()) - RealField(g, 1.0)) < 1e-12);
    }

    TEST_CASE("property: left invariance and the right i-line action") {
        Grid2 g(32);
        Rng rng(86);
        for (int t = 0; t < 5; ++t) {
            const QuatField q = hyper_exp(random_pure(g, rng, 0.5))(0, 0);
            const GaugeImage base = N_apply(q);
            const Quaternion c = quat_exp(Quaternion{0, rng.normal(), rng.normal(), rng.normal()});
            const GaugeImage left = N_apply(quat_mul(c, q));
            CHECK(image_norm(left - base).total() < 1e-12);

            const double theta = rng.normal();
            const Quaternion e = quat_exp(Quaternion{0, theta, 0, 0});
            const GaugeImage right = N_apply(quat_mul(q, e));
            CHECK(image_norm(GaugeImage{sub_for_test(right.omega, base.omega), QuatMatrixField(g, 1)}).total() < 1e-12);
            // jk components rotate by twice the angle.
            const QuatField rotated = quat_mul(quat_mul(e.conj(), base.g(0, 0)), e);
            CHECK(sup(quat_sub(right.g(0, 0), rotated)) < 1e-12);
        }
    }

    TEST_CASE("gauge potential") {
        Grid2 g(32);
        const GaugePotential one = gauge_potential(quat_matrix_identity(g, 1));
        CHECK(sup(one.chi) == 0.0);

        Rng rng(87);
        Grid2 fine(64);
        const RealField theta = random_band_limited(fine, rng, 3);
        QuatField u(fine);
        u.comp[1] = scaled(theta, 0.5 / max_abs(theta)).values;
        const GaugePotential line = gauge_potential(as_matrix(quat_exp(u)));
        CHECK(max_abs(zeta_field(line)) < 1e-12);
        CHECK(line.curvature_gap < 1e-12);
    }

    TEST_CASE("gauge potential bound is stable under refinement") {
        std::vector<double> ratios;
        for (int n : {32, 64}) {
            Grid2 g(n);
            const GaugeResult r = gauge_solve(planar_gauge_target(smooth_angle(g, 0.05)));
            const GaugePotential z = gauge_potential(r.P);
            CHECK(z.divergence_violation < 1e-8);
            CHECK(z.curvature_gap < 1e-9);
            ratios.push_back(z.bound_ratio);
        }
        MESSAGE("zeta bound ratio (32, 64): " << ratios[0] << ", " << ratios[1]);
        CHECK(std::abs(ratios[1] - ratios[0]) <= 0.1 * ratios[1]);
    }

    TEST_CASE("contraction chain") {
        Grid2 g(32);
        const RealField a = smooth_angle(g, 0.05);
        const GaugeResult r = gauge_solve(planar_gauge_target(a));
        CHECK(contraction_chain(QuatField(g), a, r).degenerate);

        ManufactureParams p;
        p.grid_n = 32;
        p.angle_gradient = 0.05;
        const ChiralitySystem sys = manufacture_solution("adapted_frame", p);
        const GaugeResult gauge = gauge_solve(planar_gauge_target(*sys.angle));
        const auto F = localize({*sys.frak_f}, g.length / 3.0);
        const ContractionReport rep = contraction_chain(F[0], *sys.angle, gauge);
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.factor < 1.0);
        CHECK(std::isfinite(rep.hodge_gap));
        CHECK(rep.equation_residual > 0.0);
    }

    TEST_CASE("contraction factor across seeds and the large-angle control") {
        int below = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const GaugeExperimentRow row = gauge_experiment(0.05, seed, 32);
            CHECK(row.converged);
            below += row.contraction_factor < 1.0 ? 1 : 0;
        }
        CHECK(below == 20);

        GaugeConfig wide;
        wide.eps0 = 2.5;
        const GaugeExperimentRow control = gauge_experiment(2.0, 1, 32, wide);
        MESSAGE("||grad angle|| = 2: converged " << control.converged << ", factor " << control.contraction_factor);
        CHECK(std::isfinite(control.contraction_factor));
    }

    TEST_CASE("epsilon sweep records a monotone trend") {
        std::vector<double> factors;
        for (double eps : {0.01, 0.05, 0.1}) {
            const GaugeExperimentRow row = gauge_experiment(eps, 3, 32);
            CHECK(row.converged);
            CHECK(std::isfinite(row.theta));
            CHECK(row.residual < 1e-8);
            factors.push_back(row.contraction_factor);
        }
        CHECK(factors[0] < factors[1]);
        CHECK(factors[1] < factors[2]);
    }

    TEST_CASE("hyper-unitary exponential") {
        Grid2 g(8);
        Rng rng(88);
        QuatMatrixField U(g, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                QuatField e(g);
                for (int c = (i == j ? 1 : 0); c < 4; ++c) e.comp[c] = random_band_limited(g, rng, 2).values;
                U(i, j) = e;
                if (i != j) U(j, i) = quat_scale(quat_conj(e), -1.0);
            }
        REQUIRE(anti_self_duality(U) < 1e-15);
        CHECK(unitarity_defect(hyper_exp(U)) < 1e-12);
        const QuatMatrixField one = random_pure(g, rng, 1.0);
        CHECK(max_abs_diff(hyper_exp(one), as_matrix(quat_exp(one(0, 0)))) == 0.0);
    }

    TEST_CASE("P gauge: trivial and rejected structures") {
        Grid2 g(16);
        const QuatMatrixField zero(g, 4);
        const PGaugeResult r = P_gauge_structures(zero, zero, {});
        CHECK(max_abs_diff(r.gauge.P, quat_matrix_identity(g, 4)) == 0.0);
        CHECK(sup(r.chi.chi) == 0.0);
        QuatMatrixField bad(g, 4);
        bad(0, 1) = quat_constant(g, Quaternion{0, 0, 0.01, 0});
        CHECK_THROWS_AS(P_gauge_structures(bad, zero, {}), std::invalid_argument);
    }

    TEST_CASE("P gauge on a doubled planar instance") {
        ManufactureParams p;
        p.grid_n = 32;
        p.angle_gradient = 0.05 / std::numbers::sqrt2;
        const ChiralitySystem sys = manufacture_solution("adapted_frame", p);
        const Grid2& g = sys.chirality.grid();
        REQUIRE(dirichlet_norm(*sys.frame) == doctest::Approx(0.05).epsilon(1e-10));
        const auto ft = frame_transform(*sys.frame, 1, sys.u, sys.v);
        const auto pot = omega_pm(*sys.frame, 1);
        ComplexMatrixField A(g, 2, 2), B(g, 2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                A(i, j) = scaled(pot.omega_plus(i, j), 0.5);
                B(i, j) = scaled(pot.omega_minus(i, j) - pot.omega_minus(j, i), 0.25);
            }
        std::vector<GrowingQuat> q;
        const ComplexField zero(g);
        for (const auto& c : ft.f) q.push_back(c.map([&](const ComplexField& x) { return quat_from_pair(x, zero); }));
        const DoubledSystem d = double_system(q, A, B);
        REQUIRE(d.residual < 1e-8);
        const PGaugeResult r = P_gauge_structures(d.Gamma, d.Gamma1, d.G);
        CHECK(r.gauge.residual < 1e-8);
        CHECK(r.gauge.unitarity < 1e-10);
        CHECK(r.absorbed_residual < 1e-7);
        MESSAGE("harmonic part " << r.harmonic << ", chi bound ratio " << r.chi.bound_ratio);
    }
}
