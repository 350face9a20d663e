#include <cmath>
#include <numbers>

#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/spectral.hpp"
#include "doctest.h"

using namespace chirality_lab;

namespace {
constexpr double kPi = std::numbers::pi;

ComplexField plane_wave(const Grid2& g, int m1, int m2) {
    const double b = 2 * kPi / g.length;
    return sample<cplx>(g, [&](double x, double y) { return std::polar(1.0, b * (m1 * x + m2 * y)); });
}

double rel_err(const ComplexField& a, const ComplexField& b) { return l2(a - b) / std::max(l2(b), 1e-300); }
double rel_err(const RealField& a, const RealField& b) { return l2(a - b) / std::max(l2(b), 1e-300); }

QuatField random_quat_field(const Grid2& g, Rng& rng, int modes) {
    return quat_from_pair(random_band_limited_complex(g, rng, modes), random_band_limited_complex(g, rng, modes));
}
}  // namespace

TEST_SUITE("spectral_ops") {
    TEST_CASE("plane-wave eigenvalues of the complex operators") {
        Grid2 g(64);
        const double b = 2 * kPi / g.length;
        for (auto [m1, m2] : {std::pair{1, 0}, {0, 3}, {-5, 7}, {12, -9}}) {
            const ComplexField w = plane_wave(g, m1, m2);
            const double k1 = b * m1, k2 = b * m2;
            const cplx I(0, 1);
            CHECK(rel_err(d_z(w), scaled(w, 0.5 * (I * k1 + k2))) < 1e-12);
            CHECK(rel_err(d_zbar(w), scaled(w, 0.5 * (I * k1 - k2))) < 1e-12);
            CHECK(rel_err(d_zbar(d_z(w)), scaled(laplacian(w), 0.25)) < 1e-12);
        }
        CHECK(max_abs(d_z(ComplexField(g, cplx(3.0, 1.0)))) < 1e-14);
    }

    TEST_CASE("d_zbar of a real field is the conjugate of d_z") {
        Grid2 g(64);
        Rng rng(5);
        const RealField f = random_band_limited(g, rng, 8);
        CHECK(rel_err(d_zbar(f), conj(d_z(f))) < 1e-13);
    }

    TEST_CASE("round trip transform") {
        Grid2 g(64);
        Rng rng(6);
        const ComplexField f = random_band_limited_complex(g, rng, 20, 0.0, false);
        const auto& P = plan_for(g);
        CHECK(rel_err(P.inverse(P.forward(f)), f) < 1e-13);
    }

    TEST_CASE("quaternion operators reduce to d_z on complex-valued fields") {
        Grid2 g(32);
        Rng rng(7);
        const ComplexField c = random_band_limited_complex(g, rng, 6);
        const QuatField f = quat_from_pair(c, ComplexField(g));
        const ComplexField dz = d_z(c);
        for (const QuatField& r : {d_L(f), d_R(f)}) {
            CHECK(rel_err(quat_first(r), dz) < 1e-14);
            CHECK(l2(quat_second(r)) < 1e-14);
        }
        CHECK(l2(d_L(quat_constant(g, Quaternion::unit_j()))) < 1e-14);
    }

    TEST_CASE("d_L of c j against a finite-difference oracle at one point") {
        // f(x) = c(x) j with c a complex plane wave; oracle builds (d1 f - i * d2 f)/2 from
        // central differences of the closed form and the Hamilton product.
        Grid2 g(32);
        const int m1 = 2, m2 = -3;
        const cplx amp(0.3, -1.1);
        const ComplexField c = scaled(plane_wave(g, m1, m2), amp);
        const QuatField f = quat_from_pair(ComplexField(g), c);
        const QuatField dl = d_L(f);
        const int p = 5, q = 11;
        const double b = 2 * kPi / g.length;
        auto closed = [&](double x, double y) {
            const cplx v = amp * std::polar(1.0, b * (m1 * x + m2 * y));
            return Quaternion::from_pair(0.0, v);
        };
        const double h = 1e-5, x = g.x1(p), y = g.x2(q);
        const Quaternion dx = (1.0 / (2 * h)) * (closed(x + h, y) - closed(x - h, y));
        const Quaternion dy = (1.0 / (2 * h)) * (closed(x, y + h) - closed(x, y - h));
        const Quaternion oracle = 0.5 * (dx - Quaternion::unit_i() * dy);
        CHECK((dl.at(g.index(p, q)) - oracle).norm() < 1e-8);
        // Via i j = -j i the operator acts on the j-slot as d_z: d_L(c j) = (d_z c) j.
        const ComplexField dz = d_z(c);
        CHECK(std::abs(quat_second(dl)[g.index(p, q)] - dz[g.index(p, q)]) < 1e-12);
    }

    TEST_CASE("left and right operators differ only through the j-slot") {
        Grid2 g(32);
        Rng rng(8);
        const QuatField f = random_quat_field(g, rng, 5);
        // Direct definitions from partial derivatives and explicit i-multiplication.
        const QuatField f1 = d1(f), f2 = d2(f);
        const QuatField dl = quat_scale(quat_sub(f1, left_i(f2)), 0.5);
        const QuatField dr = quat_scale(quat_sub(f1, right_i(f2)), 0.5);
        const QuatField dlb = quat_scale(quat_add(f1, left_i(f2)), 0.5);
        const QuatField drb = quat_scale(quat_add(f1, right_i(f2)), 0.5);
        CHECK(l2(quat_sub(d_L(f), dl)) < 1e-12 * l2(dl));
        CHECK(l2(quat_sub(d_R(f), dr)) < 1e-12 * l2(dr));
        CHECK(l2(quat_sub(d_Lbar(f), dlb)) < 1e-12 * l2(dlb));
        CHECK(l2(quat_sub(d_Rbar(f), drb)) < 1e-12 * l2(drb));
        // left_i / right_i agree with the Hamilton product
        const QuatField li = quat_mul(Quaternion::unit_i(), f), ri = quat_mul(f, Quaternion::unit_i());
        CHECK(l2(quat_sub(li, left_i(f))) == 0.0);
        CHECK(l2(quat_sub(ri, right_i(f))) == 0.0);
    }

    TEST_CASE("property: d_L(f j) equals d_Lbar-type shuffle") {
        // f j = (c1 + c2 j) j = -c2 + c1 j, so d_L(f j) = -d_z c2 + (d_z c1) j.
        Grid2 g(32);
        Rng rng(9);
        const QuatField f = random_quat_field(g, rng, 5);
        const QuatField fj = quat_mul(f, Quaternion::unit_j());
        const QuatField lhs = d_L(fj);
        const QuatField rhs = quat_from_pair(-d_z(quat_second(f)), d_z(quat_first(f)));
        CHECK(l2(quat_sub(lhs, rhs)) < 1e-13 * l2(rhs));
        // and d_L f * j agrees because j multiplies from the right
        const QuatField rhs2 = quat_mul(d_L(f), Quaternion::unit_j());
        CHECK(l2(quat_sub(lhs, rhs2)) < 1e-13 * l2(rhs));
    }

    TEST_CASE("inverse Laplacian") {
        Grid2 g(64);
        Rng rng(10);
        const RealField h = random_band_limited(g, rng, 10, 1.0, false);
        CHECK(rel_err(inv_laplacian(laplacian(h)), subtract_mean(h)) < 1e-12);
        CHECK(max_abs(inv_laplacian(RealField(g, 4.0))) < 1e-15);
        const ComplexField w = plane_wave(g, 3, -2);
        CHECK(rel_err(inv_laplacian(w), scaled(w, -1.0 / 13.0)) < 1e-13);
    }

    TEST_CASE("vector calculus identities") {
        Grid2 g(64);
        Rng rng(12);
        const RealField f = random_band_limited(g, rng, 10);
        const double s = l2(laplacian(f));
        CHECK(l2(curl(grad(f))) < 1e-13 * s);
        CHECK(l2(div(grad_perp(f))) < 1e-13 * s);
        CHECK(l2(div(grad(f)) - laplacian(f)) < 1e-13 * s);
    }

    TEST_CASE("Hodge decomposition") {
        Grid2 g(64);
        Rng rng(13);
        const RealField a0 = random_band_limited(g, rng, 8), b0 = random_band_limited(g, rng, 8);
        auto pg = hodge_decompose(grad(a0));
        CHECK(l2(pg.beta) < 1e-13 * l2(a0));
        CHECK(rel_err(pg.alpha, a0) < 1e-12);
        auto pr = hodge_decompose(grad_perp(b0));
        CHECK(l2(pr.alpha) < 1e-13 * l2(b0));
        for (int t = 0; t < 10; ++t) {
            Vec2Field a{random_band_limited(g, rng, 12, 1.0, false), random_band_limited(g, rng, 12, 1.0, false)};
            auto parts = hodge_decompose(a);
            auto rec = hodge_reconstruct(parts);
            const double na = l2(std::vector<RealField>{a.x1, a.x2});
            CHECK(l2(std::vector<RealField>{rec.x1 - a.x1, rec.x2 - a.x2}) < 1e-12 * na);
            auto ga = grad(parts.alpha), gb = grad_perp(parts.beta);
            CHECK(std::abs(inner(ga.x1, gb.x1) + inner(ga.x2, gb.x2)) < 1e-12 * na * na);
        }
    }

    TEST_CASE("Cauchy solve is a right inverse of d_zbar") {
        Grid2 g(64);
        Rng rng(14);
        CHECK(max_abs(cauchy_solve(ComplexField(g))) == 0.0);
        const ComplexField w = plane_wave(g, 4, 1);
        CHECK(rel_err(cauchy_solve(d_zbar(w)), w) < 1e-13);
        const ComplexField gc = random_band_limited_complex(g, rng, 12, 1.0, false);
        const ComplexField h = cauchy_solve(gc);
        CHECK(l2(d_zbar(h) - subtract_mean(gc)) < 1e-12 * l2(gc));
    }

    TEST_CASE("inverse of the squared operator") {
        Grid2 g(64);
        Rng rng(15);
        CHECK(max_abs(inv_dzbar_sq_kernel_apply(ComplexField(g))) == 0.0);
        const ComplexField w = plane_wave(g, 2, 3);
        const double b = 2 * kPi / g.length;
        const cplx sym = 0.5 * (cplx(0, 1) * (b * 2) - b * 3);
        CHECK(rel_err(inv_dzbar_sq_kernel_apply(w), scaled(w, 1.0 / (sym * sym))) < 1e-13);
        const ComplexField gc = random_band_limited_complex(g, rng, 10);
        CHECK(rel_err(d_zbar(d_zbar(inv_dzbar_sq_kernel_apply(gc))), gc) < 1e-12);
    }

    TEST_CASE("tail fraction of band-limited data") {
        Grid2 g(64);
        Rng rng(16);
        CHECK(spectral_tail_fraction(random_band_limited(g, rng, 10)) < 1e-10);
        const RealField rough = random_band_limited(g, rng, 31, 0.0);
        CHECK(spectral_tail_fraction(rough) > 1e-3);
    }

    TEST_CASE("grid mismatch is rejected") {
        CHECK_THROWS_AS(div(Vec2Field{RealField(Grid2(16)), RealField(Grid2(32))}), GridMismatch);
    }
}
