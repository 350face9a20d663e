#include <cmath>
#include <filesystem>

#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/systems.hpp"
#include "doctest.h"

using namespace chirality_lab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

GrowingVector random_periodic(const Grid2& g, Rng& rng, int n) {
    GrowingVector out;
    for (int i = 0; i < n; ++i) out.push_back(periodic(random_band_limited(g, rng, 4)));
    return out;
}

GrowingComplexVector random_complex(const Grid2& g, Rng& rng, int n) {
    GrowingComplexVector out;
    for (int i = 0; i < n; ++i) out.push_back(periodic(random_band_limited_complex(g, rng, 4)));
    return out;
}

ComplexMatrixField random_complex_matrix(const Grid2& g, Rng& rng, int n, bool antisymmetric) {
    ComplexMatrixField M(g, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (antisymmetric && j < i) {
                M(i, j) = -M(j, i);
            } else if (!(antisymmetric && i == j)) {
                M(i, j) = random_band_limited_complex(g, rng, 3, 1.0, false);
            }
        }
    return M;
}

ManufactureParams params(int n, int m, std::uint64_t seed) {
    ManufactureParams p;
    p.dim = n;
    p.plus_count = m;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_SUITE("systems") {
    TEST_CASE("conjugate potential of linear harmonics under the reference involution") {
        // h1 = a.x, h2 = b.x; with grad_perp = (-d2, d1) the conjugates come out as (-h1*, h2*).
        Grid2 g(32);
        const double a1 = 0.7, a2 = -1.3, b1 = 0.4, b2 = 2.1;
        const auto u = linear_potential(g, {a1, b1}, {a2, b2});
        const auto S = make_chirality(identity_field(g, 2), 1);
        const auto cp = conjugate_potential(S.S, u);
        CHECK(cp.residual < 1e-10);
        CHECK(cp.consistent);
        CHECK(max_abs(cp.v[0].slope1 - RealField(g, a2)) < 1e-12);
        CHECK(max_abs(cp.v[0].slope2 - RealField(g, -a1)) < 1e-12);
        CHECK(max_abs(cp.v[1].slope1 - RealField(g, -b2)) < 1e-12);
        CHECK(max_abs(cp.v[1].slope2 - RealField(g, b1)) < 1e-12);
        CHECK(max_abs(cp.v[0].base) < 1e-12);
    }

    TEST_CASE("conjugate potential: constants and inconsistent data") {
        Grid2 g(32);
        const auto S = make_chirality(identity_field(g, 2), 1);
        GrowingVector u{periodic(RealField(g, 3.0)), periodic(RealField(g, -1.0))};
        const auto cp = conjugate_potential(S.S, u);
        CHECK(l2(cp.v) == 0.0);
        Rng rng(51);
        const auto bad = conjugate_potential(S.S, random_periodic(g, rng, 2));
        CHECK_FALSE(bad.consistent);
        CHECK(bad.div_residual > 1e-3);
        CHECK(bad.residual > 1e-3);
        GrowingVector grow{{coordinate_field(g, 1), RealField(g), RealField(g)}, periodic(RealField(g))};
        CHECK_THROWS_AS(conjugate_potential(S.S, grow), std::invalid_argument);
    }

    TEST_CASE("holomorphic splitting residuals") {
        const auto sys = manufacture_solution("constant_S", params(3, 1, 52));
        const auto hs = holo_split_residual(sys);
        CHECK(hs.left < 1e-10);
        CHECK(hs.right < 1e-10);

        Grid2 g(32);
        Rng rng(53);
        const auto f = random_complex(g, rng, 2);
        const auto all_plus = make_chirality(identity_field(g, 2), 2);
        const auto h = holo_split_residual(all_plus, f);
        CHECK(h.right == 0.0);
        CHECK(h.left == doctest::Approx(l2(GrowingComplexVector{d_z(f[0]), d_z(f[1])})).epsilon(1e-12));

        const auto S = make_chirality(random_rotation_field(g, 2, rng, 3, 0.5), 1);
        const auto r = holo_split_residual(S, f);
        CHECK(r.left > 1e-3);
        CHECK(r.right > 1e-3);
    }

    TEST_CASE("planar transform with zero angle splits into the two blocks") {
        Grid2 g(32);
        Rng rng(54);
        const auto u = random_periodic(g, rng, 2), v = random_periodic(g, rng, 2);
        const auto t = n2_transform(RealField(g), u, v);
        const auto hs = holo_split_residual(make_chirality(identity_field(g, 2), 1), complexify(u, v));
        CHECK(t.residual == doctest::Approx(std::hypot(hs.left, hs.right)).epsilon(1e-12));
        const GrowingVector zero{periodic(RealField(g)), periodic(RealField(g))};
        CHECK(n2_transform(random_band_limited(g, rng, 3), zero, zero).residual == 0.0);
    }

    TEST_CASE("planar transform on the adapted-frame construction") {
        const auto sys = manufacture_solution("adapted_frame", params(2, 1, 55));
        REQUIRE(sys.angle.has_value());
        const auto t = n2_transform(*sys.angle, sys.u, sys.v);
        CHECK(t.residual < 1e-9);
        CHECK(t.real_form_residual < 1e-9);
        CHECK(t.combined_residual < 1e-9);
        // The same pair read in the transposed frame convention is not a solution.
        CHECK(n2_transform(-*sys.angle, sys.u, sys.v).residual > 1e-3);
    }

    TEST_CASE("quaternion packing") {
        Grid2 g(8);
        Rng rng(56);
        const auto f = random_complex(g, rng, 2);
        const QuatField q = evaluate(quaternionize(f));
        const ComplexField f0 = evaluate(f[0]), f1 = evaluate(f[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(q.at(i).re == f0[i].real());
            CHECK(q.at(i).i_part == f0[i].imag());
            CHECK(q.at(i).j_part == f1[i].real());
            CHECK(q.at(i).k_part == f1[i].imag());
        }
    }

    TEST_CASE("quaternion residual equals the split complex residual") {
        Grid2 g(32);
        Rng rng(57);
        const GrowingComplexVector zero{periodic(ComplexField(g)), periodic(ComplexField(g))};
        CHECK(quaternion_residual(quaternionize(zero), random_band_limited(g, rng, 3)) == 0.0);
        const GrowingComplexVector constants{periodic(ComplexField(g, {1, 2})), periodic(ComplexField(g, {-3, 0.5}))};
        CHECK(quaternion_residual(quaternionize(constants), RealField(g)) < 1e-10);
        for (int t = 0; t < 5; ++t) {
            const auto f = random_complex(g, rng, 2);
            const RealField a = random_band_limited(g, rng, 4);
            CHECK(rel(quaternion_residual(quaternionize(f), a), split_system_residual(f, a)) < 1e-10);
        }
    }

    TEST_CASE("chain consistency on manufactured and perturbed data") {
        const auto sys = manufacture_solution("adapted_frame", params(2, 1, 58));
        const double q = quaternion_residual(*sys.frak_f, *sys.angle);
        CHECK(q < 1e-9);
        Grid2 g = sys.chirality.grid();
        Rng rng(59);
        GrowingVector u = sys.u;
        u[0] = u[0] + periodic(scaled(random_band_limited(g, rng, 3), 1e-2));
        const auto t = n2_transform(*sys.angle, u, sys.v);
        CHECK(t.residual > 1e-4);
        CHECK(rel(t.residual, quaternion_residual(quaternionize(t.f), *sys.angle)) < 1e-10);
    }

    TEST_CASE("Dirac residual") {
        Grid2 g(32);
        const ComplexField zero(g);
        CHECK(dirac_residual(ComplexField(g, {1, 1}), ComplexField(g, {2, -1}), zero).residual < 1e-10);
        Rng rng(60);
        const ComplexField U = random_band_limited_complex(g, rng, 3);
        CHECK(dirac_residual(zero, zero, U).residual == 0.0);
        const auto r = dirac_residual(random_band_limited_complex(g, rng, 3), random_band_limited_complex(g, rng, 3), U);
        CHECK(r.residual > 1e-3);
        CHECK(r.hypothesis > 1e-3);
        CHECK(dirac_residual(zero, zero, ComplexField(g, {0.5, 0.2})).hypothesis == 0.0);
    }

    TEST_CASE("Dirac residual with growing potentials") {
        Grid2 g(32);
        const ComplexField zero(g), one(g, {1, 0}), i_unit(g, {0, 1});
        const GrowingComplex z{one, i_unit, zero}, zbar{one, scaled(i_unit, -1.0), zero};
        CHECK(dirac_residual(z, zbar, zero).residual < 1e-12);
        CHECK(dirac_residual(zbar, periodic(zero), zero).residual > 0.5);

        Rng rng(62);
        const ComplexField a = random_band_limited_complex(g, rng, 3), b = random_band_limited_complex(g, rng, 3);
        const ComplexField U = random_band_limited_complex(g, rng, 2);
        const auto flat = dirac_residual(a, b, U), grown = dirac_residual(periodic(a), periodic(b), U);
        CHECK(std::abs(flat.residual - grown.residual) < 1e-12 * flat.residual);
        CHECK(flat.hypothesis == grown.hypothesis);
    }

    TEST_CASE("potential pair: identity frame") {
        Grid2 g(16);
        const auto p = omega_pm(identity_field(g, 3), 1);
        CHECK(l2(p.omega_plus) == 0.0);
        CHECK(l2(p.omega_minus) == 0.0);
    }

    TEST_CASE("potential pair: planar rotation") {
        // d Q(a) Q(a)^T = J da with J = [[0,-1],[1,0]]; the minus potential is 2 R d_z a with R = -J.
        Grid2 g(64);
        Rng rng(61);
        RealField a = random_band_limited(g, rng, 2);
        a = scaled(a, 0.4 / max_abs(a));
        const auto p = omega_pm(rotation_field(a), 1);
        const RealField a1 = d1(a), a2 = d2(a);
        CHECK(max_abs(p.omega1(0, 1) + a1) < 1e-11);
        CHECK(max_abs(p.omega1(1, 0) - a1) < 1e-11);
        CHECK(max_abs(p.omega2(1, 0) - a2) < 1e-11);
        CHECK(l2(p.omega_plus) < 1e-11);
        const ComplexField w = d_z(a);
        CHECK(max_abs(p.omega_minus(0, 1) - scaled(w, 2.0)) < 1e-11);
        CHECK(max_abs(p.omega_minus(1, 0) + scaled(w, 2.0)) < 1e-11);
    }

    TEST_CASE("property: potential pair certificates on random frames") {
        Grid2 g(64);
        Rng rng(62);
        for (auto [n, m] : {std::pair{3, 1}, {4, 2}, {5, 3}}) {
            const auto p = omega_pm(random_rotation_field(g, n, rng, 3, 0.6), m);
            CHECK(p.antisymmetry < 1e-12);
            CHECK(p.jacobian_certificate < 1e-9);
            CHECK(p.block_violation == 0.0);
        }
    }

    TEST_CASE("general frame transform vanishes on manufactured solutions") {
        for (auto [n, m] : {std::pair{3, 1}, {4, 2}}) {
            const auto sys = manufacture_solution("conjugated_harmonic", params(n, m, 63 + n));
            CHECK(frame_transform(*sys.frame, m, sys.u, sys.v).residual < 1e-9);
        }
    }

    TEST_CASE("doubled system: structure and reduction steps") {
        Grid2 g(32);
        Rng rng(64);
        const int n = 3;
        std::vector<GrowingQuat> q;
        for (int i = 0; i < n; ++i)
            q.push_back(periodic(quat_from_pair(random_band_limited_complex(g, rng, 3), random_band_limited_complex(g, rng, 3))));
        const auto B = random_complex_matrix(g, rng, n, true);
        const auto A0 = ComplexMatrixField(g, n, n);
        const auto d = double_system(q, A0, B);
        CHECK(d.structure_certificate < 1e-13);
        CHECK(d.steps_residual < 1e-10);
        const auto d2s = double_system(q, random_complex_matrix(g, rng, n, false), B);
        CHECK(d2s.steps_residual < 1e-10);

        const auto zero = double_system(q, A0, ComplexMatrixField(g, n, n));
        CHECK(anti_self_duality(zero.Gamma) == 0.0);
        double gl = 0.0;
        for (const auto& e : zero.Gamma.entries) gl = std::max(gl, l2(e));
        CHECK(gl == 0.0);
        // With B = 0 and A = 0 each of the 2n rows is d_L G_k = 0.
        double s = 0.0;
        for (const auto& c : zero.G) s += std::pow(l2(evaluate(d_L(c))), 2);
        CHECK(zero.residual == doctest::Approx(std::sqrt(s)).epsilon(1e-12));

        auto bad = B;
        bad(0, 1) = bad(0, 1) + ComplexField(g, {1e-6, 0});
        CHECK_THROWS_AS(double_system(q, A0, bad), std::invalid_argument);
    }

    TEST_CASE("doubled system is solved by the frame-transformed manufactured solution") {
        const int n = 3, m = 1;
        const auto sys = manufacture_solution("conjugated_harmonic", params(n, m, 65));
        const auto ft = frame_transform(*sys.frame, m, sys.u, sys.v);
        const auto p = omega_pm(*sys.frame, m);
        const Grid2& g = sys.chirality.grid();
        ComplexMatrixField A(g, n, n), B(g, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                A(i, j) = scaled(p.omega_plus(i, j), 0.5);
                // Antisymmetrize away round-off in the spectral derivative.
                B(i, j) = scaled(p.omega_minus(i, j) - p.omega_minus(j, i), 0.25);
            }
        std::vector<GrowingQuat> q;
        const ComplexField zero(g);
        for (const auto& c : ft.f) q.push_back(c.map([&](const ComplexField& x) { return quat_from_pair(x, zero); }));
        const auto d = double_system(q, A, B);
        CHECK(d.residual < 1e-8);
    }

    TEST_CASE("property: hyper-unitary algebra is closed under commutators") {
        Grid2 g(8);
        Rng rng(66);
        const int dim = 4;
        auto sample_algebra = [&]() {
            QuatMatrixField M(g, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j) {
                    const Quaternion sym{0.0, rng.normal(), rng.normal(), rng.normal()};
                    const double anti = i == j ? 0.0 : rng.normal();
                    M(i, j) = quat_constant(g, Quaternion{anti, sym.i_part, sym.j_part, sym.k_part});
                    M(j, i) = quat_constant(g, Quaternion{-anti, sym.i_part, sym.j_part, sym.k_part});
                }
            return M;
        };
        for (int t = 0; t < 20; ++t) {
            const auto a = sample_algebra(), b = sample_algebra();
            REQUIRE(anti_self_duality(a) < 1e-15);
            CHECK(anti_self_duality(commutator(a, b)) < 1e-12);
        }
        const auto B = random_complex_matrix(g, rng, 2, true);
        std::vector<GrowingQuat> q(2, periodic(QuatField(g)));
        const auto d1s = double_system(q, ComplexMatrixField(g, 2, 2), B);
        const auto d2s = double_system(q, ComplexMatrixField(g, 2, 2), random_complex_matrix(g, rng, 2, true));
        CHECK(anti_self_duality(commutator(d1s.Gamma, d2s.Gamma)) < 1e-12);
    }

    TEST_CASE("energy identity and rewritten equation on manufactured solutions") {
        for (const char* mode : {"constant_S", "conjugated_harmonic", "adapted_frame"}) {
            const auto sys = manufacture_solution(mode, params(3, 2, 67));
            const auto e = energy_identity(sys.chirality, sys.u);
            CHECK(e.difference <= 1e-12 * std::max(1.0, std::abs(e.projector_form)));
            CHECK(rewritten_equation_residual(sys.chirality.S, sys.u) < 1e-10);
        }
        Grid2 g(32);
        Rng rng(68);
        const auto S = make_chirality(random_rotation_field(g, 2, rng, 3, 0.5), 1);
        CHECK(rewritten_equation_residual(S.S, random_periodic(g, rng, 2)) > 1e-3);
    }

    TEST_CASE("manufactured solutions") {
        const auto c = manufacture_solution("constant_S", params(2, 1, 69));
        CHECK(conjugate_potential(c.chirality.S, c.u).div_residual < 1e-10);
        auto p = params(2, 1, 69);
        p.amplitude = 0.0;
        const auto h = manufacture_solution("conjugated_harmonic", p);
        for (int i = 0; i < 2; ++i) {
            CHECK(max_abs(evaluate(h.u[i]) - evaluate(c.u[i])) == 0.0);
            CHECK(max_abs(evaluate(h.v[i]) - evaluate(c.v[i])) == 0.0);
        }
        const auto a = manufacture_solution("adapted_frame", params(2, 1, 70));
        const Vec2Field ga = grad(*a.angle);
        CHECK(l2(std::vector<RealField>{ga.x1, ga.x2}) == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(conjugate_potential(a.chirality.S, a.u).div_residual < 1e-8);
        MESSAGE("adapted_frame energy " << energy_identity(a.chirality, a.u).projector_form);
        CHECK_THROWS_AS(manufacture_solution("bvp", params(2, 1, 1)), std::invalid_argument);
    }

    TEST_CASE("system serialisation writes a manifest and blobs") {
        const auto sys = manufacture_solution("constant_S", params(2, 1, 71));
        const auto dir = std::filesystem::temp_directory_path() / "chirality_lab_system_test";
        save_system(sys, dir.string());
        CHECK(std::filesystem::exists(dir / "manifest.json"));
        CHECK(std::filesystem::file_size(dir / "u0.bin") == 3 * sys.chirality.grid().size() * sizeof(double));
        CHECK(load_chirality((dir / "chirality").string()).m == 1);
        std::filesystem::remove_all(dir);
    }
}
