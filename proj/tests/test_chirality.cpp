#include <cmath>
#include <filesystem>
#include <numbers>

#include "chirality_lab/chirality.hpp"
#include "chirality_lab/random_fields.hpp"
#include "doctest.h"

using namespace chirality_lab;

namespace {

constexpr double kPi = std::numbers::pi;

double max_entry_diff(const RealMatrixField& a, const RealMatrixField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.entries.size(); ++k) m = std::max(m, max_abs(a.entries[k] - b.entries[k]));
    return m;
}

// Rescale a generator amplitude until ||grad S||_2 hits the target (energy is close to linear for small data).
ChiralityField chirality_with_energy(const Grid2& g, int n, int m, std::uint64_t seed, double target) {
    double amp = 0.1;
    for (int it = 0; it < 6; ++it) {
        Rng rng(seed);
        const double e = dirichlet_norm(make_chirality(random_rotation_field(g, n, rng, 3, amp), m).S);
        amp *= target / e;
    }
    Rng rng(seed);
    return make_chirality(random_rotation_field(g, n, rng, 3, amp), m);
}

}  // namespace

TEST_SUITE("chirality") {
    TEST_CASE("reference involution") {
        CHECK(s0_matrix(2, 1) == std::vector<double>{1, 0, 0, -1});
        CHECK(s0_matrix(3, 3) == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
        CHECK(s0_matrix(2, 0) == std::vector<double>{-1, 0, 0, -1});
        CHECK_THROWS_AS(s0_matrix(2, 3), std::invalid_argument);
        CHECK_THROWS_AS(s0_matrix(2, -1), std::invalid_argument);
    }

    TEST_CASE("identity frame gives the reference involution") {
        Grid2 g(8);
        const auto c = make_chirality(identity_field(g, 3), 2);
        CHECK(max_entry_diff(c.S, constant_matrix_field(g, 3, 3, s0_matrix(3, 2))) == 0.0);
    }

    TEST_CASE("planar rotation closed form") {
        Grid2 g(32);
        Rng rng(41);
        const RealField a = random_band_limited(g, rng, 4);
        const auto c = chirality_from_angle(a);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            err = std::max(err, std::abs(c.S(0, 0)[i] - std::cos(2 * a[i])));
            err = std::max(err, std::abs(c.S(0, 1)[i] - std::sin(2 * a[i])));
            err = std::max(err, std::abs(c.S(1, 0)[i] - std::sin(2 * a[i])));
            err = std::max(err, std::abs(c.S(1, 1)[i] + std::cos(2 * a[i])));
        }
        CHECK(err < 1e-14);
    }

    TEST_CASE("property: random frames give valid involutions with constant trace and det") {
        Grid2 g(32);
        Rng rng(42);
        for (auto [n, m] : {std::pair{2, 1}, {3, 1}, {4, 2}, {5, 0}, {4, 4}}) {
            const auto c = make_chirality(random_rotation_field(g, n, rng, 4, 0.8), m);
            const auto r = check_invariants(c);
            CHECK(r.holds(1e-12));
        }
    }

    TEST_CASE("non-orthogonal or reflecting frames are rejected") {
        Grid2 g(8);
        auto Q = identity_field(g, 2);
        Q(0, 1)[5] = 0.1;
        CHECK_THROWS_AS(make_chirality(Q, 1), NotOrthogonal);
        auto R = identity_field(g, 2);
        for (auto& v : R(1, 1).values) v = -1.0;
        CHECK_THROWS_AS(make_chirality(R, 1), NotOrthogonal);
    }

    TEST_CASE("projections") {
        Grid2 g(8);
        const auto p0 = projections(make_chirality(identity_field(g, 2), 1));
        CHECK(max_entry_diff(p0.left, constant_matrix_field(g, 2, 2, {1, 0, 0, 0})) == 0.0);
        CHECK(max_entry_diff(p0.right, constant_matrix_field(g, 2, 2, {0, 0, 0, 1})) == 0.0);

        Grid2 h(32);
        Rng rng(43);
        for (auto [n, m] : {std::pair{2, 1}, {4, 1}, {3, 2}}) {
            const auto c = make_chirality(random_rotation_field(h, n, rng, 4, 0.7), m);
            const auto p = projections(c);
            CHECK(max_entry_diff(matmul(p.left, p.left), p.left) < 1e-12);
            CHECK(max_entry_diff(matmul(p.right, p.right), p.right) < 1e-12);
            CHECK(max_entry_diff(matmul(p.left, p.right), RealMatrixField(h, n, n)) < 1e-12);
            // The sum is formed entrywise from (I + S)/2 and (I - S)/2.
            RealMatrixField sum(h, n, n);
            for (std::size_t k = 0; k < sum.entries.size(); ++k) sum.entries[k] = p.left.entries[k] + p.right.entries[k];
            CHECK(max_entry_diff(sum, identity_field(h, n)) <= 1e-16);
            CHECK(projector_rank_range(p.left) == std::pair{m, m});
        }
    }

    TEST_CASE("frame extraction: constant reference involution") {
        Grid2 g(16);
        const auto c = make_chirality(identity_field(g, 3), 1);
        const auto fx = extract_frame(c);
        CHECK(fx.conjugation_residual == 0.0);
        CHECK(max_entry_diff(fx.Q, identity_field(g, 3)) < 1e-15);
        CHECK_FALSE(fx.alignment_failure);
    }

    TEST_CASE("frame extraction reproduces S from a smooth frame") {
        Grid2 g(64);
        for (auto [n, m] : {std::pair{2, 1}, {3, 1}, {4, 2}}) {
            const auto c = chirality_with_energy(g, n, m, 44 + n, 0.3);
            const auto fx = extract_frame(c);
            CHECK(fx.conjugation_residual < 1e-8);
            CHECK_FALSE(fx.alignment_failure);
            CHECK_FALSE(fx.above_threshold);
            CHECK(fx.max_frame_jump < 0.2);
        }
    }

    TEST_CASE("planar energy ratio is exactly one half") {
        // |grad S|^2 = 8 |grad a|^2 and |grad Q(a)|^2 = 2 |grad a|^2.
        Grid2 g(64);
        Rng rng(45);
        const RealField a = scaled(random_band_limited(g, rng, 3), 0.05);
        const auto fx = extract_frame(chirality_from_angle(a));
        CHECK(fx.energy_ratio == doctest::Approx(0.5).epsilon(1e-9));
    }

    TEST_CASE("half-turn frame winding is flagged") {
        // The involution angle 2a turns once along x1, so the eigenframe returns with a sign flip.
        Grid2 g(64);
        const RealField a = sample<double>(g, [&](double x, double) { return 0.5 * x * 2 * kPi / g.length; });
        const auto c = chirality_from_angle(a);
        CHECK(check_invariants(c).holds(1e-12));
        const auto fx = extract_frame(c);
        CHECK(fx.alignment_failure);
        CHECK(fx.max_frame_jump > kPi / 2);
        CHECK(fx.conjugation_residual < 1e-8);
    }

    TEST_CASE("full-turn frame winding is not an obstruction") {
        Grid2 g(64);
        const RealField a = sample<double>(g, [&](double x, double) { return x * 2 * kPi / g.length; });
        const auto fx = extract_frame(chirality_from_angle(a));
        CHECK_FALSE(fx.alignment_failure);
    }

    TEST_CASE("energy comparability over twenty instances") {
        Grid2 g(48);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const double target = 0.05 + 0.45 * (t + 1) / 20.0;
            const int n = 2 + t % 3, m = 1 + (t / 3) % (n - 1);
            const auto fx = extract_frame(chirality_with_energy(g, n, m, Rng::derive(46, t), target));
            REQUIRE(fx.energy_S <= 0.5 + 1e-6);
            CHECK_FALSE(fx.alignment_failure);
            worst = std::max(worst, fx.energy_ratio);
        }
        MESSAGE("empirical frame energy constant C = " << worst);
        CHECK(worst < 2.0);
    }

    TEST_CASE("serialisation round trip") {
        Grid2 g(16, 3.0);
        Rng rng(47);
        const auto c = make_chirality(random_rotation_field(g, 3, rng, 3, 0.5), 2);
        const auto dir = std::filesystem::temp_directory_path() / "chirality_lab_test";
        const std::string base = (dir / "field").string();
        save_chirality(c, base);
        const auto back = load_chirality(base);
        CHECK(back.m == 2);
        CHECK(back.grid() == g);
        CHECK(max_entry_diff(back.S, c.S) == 0.0);
        std::filesystem::remove_all(dir);
    }
}
