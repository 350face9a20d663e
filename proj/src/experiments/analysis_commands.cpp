#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/ellint_2.hpp>

#include "chirality_lab/chirality.hpp"
#include "chirality_lab/compensation.hpp"
#include "chirality_lab/jms.hpp"
#include "chirality_lab/norms.hpp"
#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/spectral.hpp"
#include "chirality_lab/systems.hpp"
#include "common.hpp"

namespace chirality_lab {

using namespace detail;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const ComplexField& a, const ComplexField& b) { return max_abs(a - b); }

double max_diff(const QuatField& a, const QuatField& b) {
    double m = 0.0;
    for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.comp[c][i] - b.comp[c][i]));
    return m;
}

double vec_inner(const Vec2Field& a, const Vec2Field& b) { return inner(a.x1, b.x1) + inner(a.x2, b.x2); }
double vec_l2(const Vec2Field& a) { return l2(std::vector<RealField>{a.x1, a.x2}); }

}  // namespace

RunReport cmd_ops_verify(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const Grid2 g(config.grid_n, config.length);
    const double unit = 2.0 * kPi / g.length;
    const int limit = g.n / 2 - 1;

    std::vector<std::array<int, 2>> modes;
    for (const auto& m : std::vector<std::array<int, 2>>{{1, 0}, {0, 1}, {1, -2}, {-3, 2}, {5, 7}, {-11, 4}})
        if (std::abs(m[0]) <= limit && std::abs(m[1]) <= limit) modes.push_back(m);

    double dz = 0.0, dzbar = 0.0, lap4 = 0.0, left = 0.0, right = 0.0;
    const Quaternion c{0.3, -0.7, 0.2, 0.5}, c2{-0.1, 0.4, 0.9, -0.6};
    for (const auto& m : modes) {
        const double k1 = unit * m[0], k2 = unit * m[1];
        const ComplexField e = sample<cplx>(g, [&](double x, double y) { return std::exp(cplx(0, k1 * x + k2 * y)); });
        const cplx lz(0.5 * k2, 0.5 * k1), lzbar(-0.5 * k2, 0.5 * k1);
        const double ll = -(k1 * k1 + k2 * k2) / 4.0;
        dz = std::max(dz, max_diff(d_z(e), scaled(e, lz)) / std::abs(lz));
        dzbar = std::max(dzbar, max_diff(d_zbar(e), scaled(e, lzbar)) / std::abs(lzbar));
        lap4 = std::max(lap4, std::max(max_diff(d_zbar(d_z(e)), scaled(e, ll)),
                                       max_diff(d_zbar(d_z(e)), scaled(laplacian(e), 0.25))) / std::abs(ll));

        // f = cos(k.x) c + sin(k.x) c2, so d_l f = k_l w with w = -sin(k.x) c + cos(k.x) c2.
        QuatField f(g), w(g);
        for (int p = 0; p < g.n; ++p)
            for (int q = 0; q < g.n; ++q) {
                const double t = k1 * g.x1(p) + k2 * g.x2(q);
                f.set(g.index(p, q), c * Quaternion{std::cos(t), 0, 0, 0} + c2 * Quaternion{std::sin(t), 0, 0, 0});
                w.set(g.index(p, q), c * Quaternion{-std::sin(t), 0, 0, 0} + c2 * Quaternion{std::cos(t), 0, 0, 0});
            }
        const Quaternion i_unit = Quaternion::unit_i();
        const QuatField expect_l = quat_scale(quat_sub(quat_scale(w, k1), quat_scale(quat_mul(i_unit, w), k2)), 0.5);
        const QuatField expect_r = quat_scale(quat_sub(quat_scale(w, k1), quat_scale(quat_mul(w, i_unit), k2)), 0.5);
        const double scale = std::hypot(k1, k2) * (c.norm() + c2.norm());
        left = std::max(left, max_diff(d_L(f), expect_l) / scale);
        right = std::max(right, max_diff(d_R(f), expect_r) / scale);
    }
    report.check("plane_wave_dz_rel", dz, Relation::less, 1e-12, "");
    report.check("plane_wave_dzbar_rel", dzbar, Relation::less, 1e-12, "");
    report.check("plane_wave_dzbar_dz_quarter_laplacian_rel", lap4, Relation::less, 1e-12, "");
    report.check("plane_wave_dL_rel", left, Relation::less, 1e-12, "quaternion-reformulation");
    report.check("plane_wave_dR_rel", right, Relation::less, 1e-12, "quaternion-reformulation");

    Rng rng(Rng::derive(config.seed, 0));
    const RealField r = random_band_limited(g, rng, std::min(limit, 8), 1.0, false);
    const ComplexField z = random_band_limited_complex(g, rng, std::min(limit, 8));
    const auto& plan = plan_for(g);
    const ComplexField back = plan.inverse(plan.forward(z));
    report.check("round_trip_rel", max_abs(back - z) / max_abs(z), Relation::less, 1e-13, "");

    const RealField mz = subtract_mean(r);
    report.check("inverse_laplacian_rel", rel_l2(inv_laplacian(laplacian(r)), mz), Relation::less, 1e-12, "");
    report.check("div_grad_perp", l2(div(grad_perp(r))) / vec_l2(grad(r)), Relation::less, 1e-12, "");
    report.check("curl_grad", l2(curl(grad(r))) / vec_l2(grad(r)), Relation::less, 1e-12, "");
    const ComplexField zm = subtract_mean(z);
    report.check("cauchy_solve_rel", l2(cauchy_solve(d_zbar(z)) - zm) / l2(zm), Relation::less, 1e-12,
                 "cauchy-kernel-solve");
    report.check("inverse_dzbar_squared_rel", l2(inv_dzbar_sq_kernel_apply(d_zbar(d_zbar(z))) - zm) / l2(zm),
                 Relation::less, 1e-12, "inverse-dzbar-squared-kernel");

    const double area = g.area();
    const RealField constant(g, 1.75);
    double lp_const = 0.0;
    for (double p : {1.0, 1.5, 2.0, 4.0})
        lp_const = std::max(lp_const, std::abs(lp_norm(constant, p) / (1.75 * std::pow(area, 1.0 / p)) - 1.0));
    report.check("lp_constant_rel", lp_const, Relation::less, 1e-12, "");
    const double lorentz_const = std::max(std::abs(lorentz_weak_l2(constant) / (1.75 * std::sqrt(area)) - 1.0),
                                          std::abs(lorentz_l21(constant) / (1.75 * std::sqrt(area)) - 1.0));
    report.check("lorentz_constant_rel", lorentz_const, Relation::less, 1e-12, "");
    const double ordering = std::max(lorentz_weak_l2(r) / lp_norm(r, 2), lp_norm(r, 2) / lorentz_l21(r));
    report.check("weak_le_l2_le_l21", ordering, Relation::less_equal, 1.0 + 1e-12, "");
    return finish_report(std::move(report), clock);
}

RunReport cmd_hodge_check(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const Grid2 g(config.grid_n, config.length);
    constexpr int trials = 100;
    std::vector<double> recon(trials), orth(trials), exact(trials);
    parallel_for(trials, [&](int t) {
        Rng rng(Rng::derive(config.seed, t));
        const int modes = std::min(12, g.n / 2 - 1);
        const Vec2Field a{random_band_limited(g, rng, modes, 1.0, false), random_band_limited(g, rng, modes, 1.0, false)};
        const HodgeParts parts = hodge_decompose(a);
        const Vec2Field rec = hodge_reconstruct(parts);
        recon[t] = vec_l2({rec.x1 - a.x1, rec.x2 - a.x2}) / vec_l2(a);
        orth[t] = std::abs(vec_inner(grad(parts.alpha), grad_perp(parts.beta))) / std::pow(vec_l2(a), 2);
        const RealField phi = random_band_limited(g, rng, modes);
        exact[t] = vec_l2(grad_perp(hodge_decompose(grad(phi)).beta)) / vec_l2(grad(phi));
    });
    report.check("reconstruction_rel_max", max_of(recon), Relation::less, 1e-12, "hodge-decomposition");
    report.check("orthogonality_max", max_of(orth), Relation::less, 1e-12, "hodge-decomposition");
    report.check("gradient_has_no_rotated_part_max", max_of(exact), Relation::less, 1e-12, "hodge-decomposition");
    report.record("trials", trials, "hodge-decomposition");
    return finish_report(std::move(report), clock);
}

RunReport cmd_bb_check(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const Grid2 g(config.grid_n, config.length);
    const int modes = std::min(6, g.n / 2 - 1);
    constexpr int trials = 100;

    // Arbitrary seeded splits f = rho grad u + z, g = grad u - f.
    std::vector<double> err(trials), grad_res(trials), ratio_arbitrary(trials), ratio_half(trials), refined(trials);
    Rng base(Rng::derive(config.seed, 1000));
    RealField fixed_u = random_band_limited(g, base, modes);
    fixed_u = scaled(fixed_u, 1.0 / l2(fixed_u));
    const Vec2Field fixed_grad = grad(fixed_u);
    parallel_for(trials, [&](int t) {
        Rng rng(Rng::derive(config.seed, t));
        const RealField u0 = random_band_limited(g, rng, modes);
        const Vec2Field gu = grad(u0);
        const RealField rho = random_band_limited(g, rng, 3, 1.0, false);
        const RealField z1 = random_band_limited(g, rng, modes), z2 = random_band_limited(g, rng, modes);
        const Vec2Field f{subtract_mean(rho * gu.x1 + z1), subtract_mean(rho * gu.x2 + z2)};
        const BBResult r = bb_reconstruct(split_from(f, {gu.x1 - f.x1, gu.x2 - f.x2}));
        err[t] = rel_l2(r.u, u0);
        grad_res[t] = r.diag.gradient_residual;
        ratio_arbitrary[t] = r.diag.ratio;

        // Half-and-half split of one fixed gradient plus seeded divergence-form noise.
        const RealField n1 = random_band_limited(g, rng, modes), n2 = random_band_limited(g, rng, modes);
        const double noise = 0.3 * vec_l2(fixed_grad) / l2(std::vector<RealField>{n1, n2});
        const Vec2Field fh{subtract_mean(scaled(fixed_grad.x1, 0.5) + scaled(n1, noise)),
                           subtract_mean(scaled(fixed_grad.x2, 0.5) + scaled(n2, noise))};
        ratio_half[t] = bb_reconstruct(split_from(fh, {fixed_grad.x1 - fh.x1, fixed_grad.x2 - fh.x2})).diag.ratio;

        const RealField ur = random_band_limited(g, rng, modes), v = random_band_limited(g, rng, modes);
        const Vec2Field gr = grad(ur), gp = grad_perp(v);
        refined[t] = bb_refined_bound(v, {gr.x1 - gp.x1, gr.x2 - gp.x2}).leading_constant;
    });
    report.check("recovery_rel_max", max_of(err), Relation::less, 1e-10, "l2-reconstruction");
    report.check("pipeline_gradient_residual_max", max_of(grad_res), Relation::less, 1e-10, "lp-reconstruction");
    report.check("ratio_finite_min", min_of(ratio_half), Relation::greater, 0.0, "l2-reconstruction");
    report.record("ratio_half_split_mean",
                  std::accumulate(ratio_half.begin(), ratio_half.end(), 0.0) / trials, "l2-reconstruction");
    report.check("ratio_half_split_spread", spread(ratio_half), Relation::less, 0.25, "l2-reconstruction");
    report.record("ratio_arbitrary_split_spread", spread(ratio_arbitrary), "l2-reconstruction");
    report.check("refined_leading_constant_max", max_of(refined), Relation::less_equal, 1.05, "l2-reconstruction");

    // Real part from imaginary part: identity and refinement-stable constant.
    constexpr int instances = 20;
    std::vector<double> id_res(instances), holds(instances), drift(instances), kernel(instances);
    parallel_for(instances, [&](int t) {
        Rng rng(Rng::derive(config.seed, 500 + t));
        const auto re = random_modes(rng, 5, 1.0, true), im = random_modes(rng, 5, 1.0, true);
        double c[2] = {0.0, 0.0}, worst = 0.0;
        bool ok = true;
        for (int k = 0; k < 2; ++k) {
            const Grid2 gk(128 << k, config.length);
            const ComplexField h = make_complex(evaluate_modes(gk, re), evaluate_modes(gk, im));
            const auto d = real_from_imag_bound(h, d_zbar(h));
            worst = std::max(worst, d.identity_residual / d.identity_scale);
            ok = ok && d.inequality_holds;
            c[k] = d.identity_constant;
            if (k == 1) kernel[t] = d.kernel_constant;
        }
        id_res[t] = worst;
        holds[t] = ok ? 1.0 : 0.0;
        drift[t] = std::abs(c[0] - c[1]) / c[1];
    });
    report.check("identity_residual_scaled_max", max_of(id_res), Relation::less, 1e-8, "real-from-imaginary-identity");
    report.check("inequality_holds_fraction", min_of(holds), Relation::greater_equal, 1.0,
                 "real-from-imaginary-identity");
    report.check("constant_refinement_drift_max", max_of(drift), Relation::less, 0.1, "real-from-imaginary-identity");
    report.record("kernel_constant_max", max_of(kernel), "inverse-dzbar-squared-kernel");

    Table t{"ratios", {"trial", "ratio_half_split", "ratio_arbitrary_split"}, {}, std::nullopt};
    for (int i = 0; i < trials; ++i) t.rows.push_back({double(i), ratio_half[i], ratio_arbitrary[i]});
    report.tables.push_back(t);
    return finish_report(std::move(report), clock);
}

RunReport cmd_wente_check(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const Grid2 g(config.grid_n, config.length);
    const double k = 2.0 * kPi / g.length;

    const RealField a = sample<double>(g, [&](double x, double) { return std::sin(k * x); });
    const RealField b = sample<double>(g, [&](double, double y) { return std::sin(k * y); });
    const RealField oracle = sample<double>(g, [&](double x, double y) { return -0.5 * std::cos(k * x) * std::cos(k * y); });
    report.check("two_mode_max_error", max_abs(wente_solve(a, b).phi - oracle), Relation::less, 1e-12, "wente-estimate");

    constexpr int families = 10;
    std::vector<double> sup_spread(families), weak_spread(families);
    Table refine{"refinement", {"family", "grid_n", "sup_ratio", "weak_strong_ratio", "l21_ratio"}, {}, std::nullopt};
    std::vector<std::vector<std::vector<double>>> rows(families);
    parallel_for(families, [&](int f) {
        Rng rng(Rng::derive(config.seed, 200 + f));
        const auto ma = random_modes(rng, 6, 1.5, true), mb = random_modes(rng, 6, 1.5, true);
        std::vector<double> s, w;
        for (int n : {64, 128, 256}) {
            const Grid2 gn(n, config.length);
            const auto d = wente_solve(evaluate_modes(gn, ma), evaluate_modes(gn, mb)).diag;
            s.push_back(d.sup_ratio);
            w.push_back(d.weak_strong_ratio);
            rows[f].push_back({double(f), double(n), d.sup_ratio, d.weak_strong_ratio, d.l21_ratio});
        }
        sup_spread[f] = spread(s);
        weak_spread[f] = spread(w);
    });
    for (const auto& r : rows) refine.rows.insert(refine.rows.end(), r.begin(), r.end());
    report.check("sup_ratio_refinement_spread_max", max_of(sup_spread), Relation::less, 0.1, "wente-estimate");
    report.check("weak_strong_ratio_refinement_spread_max", max_of(weak_spread), Relation::less, 0.1,
                 "wente-estimate");

    // Paired comparison: Jacobian right side against its phase-shuffled copy and against |J| - mean |J|.
    constexpr int trials = 100;
    std::vector<double> shuffled_win(trials), flat_win(trials), gap(trials);
    parallel_for(trials, [&](int t) {
        Rng rng(Rng::derive(config.seed, 300 + t));
        const int modes = std::min(8, g.n / 2 - 1);
        const RealField ta = random_band_limited(g, rng, modes), tb = random_band_limited(g, rng, modes);
        const WenteResult jac = wente_solve(ta, tb);
        const double j_l21 = jac.diag.grad_phi_l21;
        const double s_l21 = poisson_with_diagnostics(phase_shuffle(jac.rhs, Rng::derive(config.seed, 400 + t))).diag.grad_phi_l21;
        const RealField mag = field_map(jac.rhs, [](double v) { return std::abs(v); });
        const double f_l21 = poisson_with_diagnostics(subtract_mean(mag)).diag.grad_phi_l21;
        shuffled_win[t] = j_l21 < s_l21 ? 1.0 : 0.0;
        flat_win[t] = j_l21 < f_l21 ? 1.0 : 0.0;
        gap[t] = s_l21 / j_l21;
    });
    const double shuffled = std::accumulate(shuffled_win.begin(), shuffled_win.end(), 0.0) / trials;
    report.check("jacobian_beats_phase_shuffled_fraction", shuffled, Relation::greater_equal, 0.95, "wente-estimate");
    report.record("jacobian_beats_rectified_fraction", std::accumulate(flat_win.begin(), flat_win.end(), 0.0) / trials,
                  "wente-estimate");
    report.record("shuffled_over_jacobian_l21_median", [&] {
        std::vector<double> s = gap;
        std::nth_element(s.begin(), s.begin() + trials / 2, s.end());
        return s[trials / 2];
    }(), "wente-estimate");
    report.tables.push_back(refine);
    return finish_report(std::move(report), clock);
}

RunReport cmd_bootstrap_demo(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);

    ManufactureParams mp;
    mp.grid_n = std::max(config.grid_n, 64);
    mp.dim = 2;
    mp.plus_count = 1;
    mp.seed = config.seed;
    const ChiralitySystem sys = manufacture_solution("conjugated_harmonic", mp);
    const RealMatrixField& S = sys.chirality.S;
    const Grid2& g = S.grid;
    const int n = S.rows;

    // w = S u; since S is an involution, (grad S) S w = (grad S) u.
    std::vector<RealField> u, w(n, RealField(g));
    for (const auto& c : sys.u) u.push_back(evaluate(c));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[i] = w[i] + S(i, j) * u[j];
    std::vector<RealField> product;
    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < n; ++i) {
            RealField acc(g);
            for (int j = 0; j < n; ++j) acc = acc + (l == 0 ? d1(S(i, j)) : d2(S(i, j))) * u[j];
            product.push_back(acc);
        }
    const RealField w_abs = pointwise_abs(w), product_abs = pointwise_abs(product);
    const double grad_s = dirichlet_norm(S);

    report.record("grid_n_used", mp.grid_n, "chirality-regularity");
    report.check("rewritten_equation_residual", rewritten_equation_residual(S, sys.u), Relation::less, config.tol,
                 "chirality-regularity");
    Table ledger{"exponents", {"p", "p_star", "p_back", "grad_s_l2", "w_lpstar", "product_lp", "holder_ratio"}, {},
                 std::nullopt};
    double worst_back = 0.0, worst_holder = 0.0;
    for (double p : {1.2, 1.5, 1.8, 1.95}) {
        const double p_star = 2.0 * p / (2.0 - p);
        const double back = 2.0 * p_star / (p_star + 2.0);
        const double w_norm = lp_norm(w_abs, p_star), prod = lp_norm(product_abs, p);
        const double ratio = prod / (grad_s * w_norm);
        worst_back = std::max(worst_back, std::abs(back - p));
        worst_holder = std::max(worst_holder, ratio);
        ledger.rows.push_back({p, p_star, back, grad_s, w_norm, prod, ratio});
    }
    report.check("exponent_fixed_point_error", worst_back, Relation::less, 1e-14, "bootstrap-obstruction");
    report.check("holder_ratio_max", worst_holder, Relation::less_equal, 1.0, "bootstrap-obstruction");

    Table loss{"loss", {"q", "image"}, {}, PlotSpec{"exponent map above two", 0, {1}, true, false}};
    double worst_image = 0.0;
    for (double q : {4.0, 8.0, 16.0, 100.0}) {
        const double image = 2.0 * q / (q + 2.0);
        worst_image = std::max(worst_image, image);
        loss.rows.push_back({q, image});
    }
    report.check("loss_map_image_max", worst_image, Relation::less, 2.0, "bootstrap-obstruction");
    report.check("loss_map_at_four", 2.0 * 4.0 / 6.0, Relation::less, 2.0, "bootstrap-obstruction");
    report.tables.push_back(ledger);
    report.tables.push_back(loss);
    return finish_report(std::move(report), clock);
}

namespace {

// int_0^{2 pi} |(sin t, k cos t)| dt as a complete elliptic integral.
double ellipse_perimeter(double k) { return 4.0 * boost::math::ellint_2(std::sqrt(std::max(0.0, 1.0 - k * k))); }

// Independent cross-check of the power-one limit: adaptive pieces on a geometric partition plus
// the analytic far tail.
double power_one_limit_check(const JmsParams& p) {
    auto f = [&](double s) { return std::pow(s, -p.beta) * ellipse_perimeter(1.0 - p.beta / s); };
    double a = std::log(p.r0), total = 0.0;
    while (a < 1e12) {
        const double b = std::max(2.0 * a, a + 4.0);
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
        a = b;
    }
    return total + 2.0 * kPi * std::pow(a, 1.0 - p.beta) / (p.beta - 1.0);
}

}  // namespace

RunReport cmd_jms(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const JmsParams p{config.beta, config.r0, 2};
    const auto adm = check_jms_params(p);
    report.record("min_alpha", adm.min_alpha, "irregular-counterexample");
    report.record("half_bound_met", adm.half_bound ? 1.0 : 0.0, "irregular-counterexample");
    report.check("ellipticity", adm.ellipticity, Relation::greater, 0.0, "irregular-counterexample");

    const auto study = jms_residual_study(p, {128, 256, 512}, 0.2);
    report.check("weak_residual_order", study.weak_order, Relation::greater_equal, 2.0, "irregular-counterexample");
    report.record("strong_residual_order", study.strong_order, "irregular-counterexample");
    report.check("parity_gap", study.parity_gap, Relation::less, 1e-12, "irregular-counterexample");
    Table residuals{"residuals", {"grid_n", "excision", "strong_residual", "weak_residual"}, {},
                    PlotSpec{"residual convergence", 0, {2, 3}, true, true}};
    for (const auto& r : study.rows) residuals.rows.push_back({double(r.grid_n), r.excision, r.strong_residual, r.weak_residual});

    const double limit = jms_gradient_norm_limit(p), check = power_one_limit_check(p);
    report.check("power_one_limit_rel_error", std::abs(limit - check) / check, Relation::less, 1e-6,
                 "irregular-counterexample");
    report.record("power_one_limit", limit, "irregular-counterexample");

    const auto rows_one = jms_norm_divergence(p, {1.0}, {1e-2, 1e-8, 1e-30, 1e-120, 1e-300});
    double increasing = 1.0;
    for (std::size_t i = 1; i < rows_one.size(); ++i)
        if (!(rows_one[i].norm_value > rows_one[i - 1].norm_value && rows_one[i].norm_value < limit)) increasing = 0.0;
    report.check("power_one_partial_norms_increase_below_limit", increasing, Relation::greater_equal, 1.0,
                 "irregular-counterexample");

    const auto rows = jms_norm_divergence(p, {1.5}, {1e-10, 1e-12, 1e-20, 1e-22, 1e-40, 1e-42});
    double slope_err = 0.0;
    for (std::size_t i = 1; i < rows.size(); i += 2)
        slope_err = std::max(slope_err, std::abs(rows[i].fitted_slope - rows[i].analytic_slope) / std::abs(rows[i].analytic_slope));
    report.check("divergence_slope_rel_error_max", slope_err, Relation::less, 0.05, "irregular-counterexample");

    Table norms{"norms", {"p", "beta", "r0", "delta", "norm_value", "fitted_slope"}, {},
                PlotSpec{"partial gradient norms", 3, {4}, true, true}};
    for (const auto* set : {&rows_one, &rows})
        for (const auto& r : *set) norms.rows.push_back({r.p, r.beta, r.r0, r.delta, r.norm_value, r.fitted_slope});

    // Coefficient gradient against fourth-order finite differences at 100 seeded points.
    Rng rng(Rng::derive(config.seed, 0));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(2);
        double r2 = 0.0;
        do {
            x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            r2 = x[0] * x[0] + x[1] * x[1];
        } while (r2 > 1.0 || r2 < 1e-4);
        const auto grad = jms_gradient(x, p);
        double scale = 0.0;
        for (double v : grad) scale = std::max(scale, std::abs(v));
        const double h = 1e-3 * std::sqrt(r2);
        for (int k = 0; k < 2; ++k) {
            auto at = [&](double s) {
                auto y = x;
                y[k] += s;
                return jms_matrix(y, p);
            };
            const auto m2 = at(-2 * h), m1 = at(-h), p1 = at(h), p2 = at(2 * h);
            for (int ij = 0; ij < 4; ++ij) {
                const double fd = (m2[ij] - 8 * m1[ij] + 8 * p1[ij] - p2[ij]) / (12 * h);
                worst = std::max(worst, std::abs(fd - grad[ij * 2 + k]) / scale);
            }
        }
    }
    report.check("coefficient_gradient_fd_rel", worst, Relation::less, 1e-6, "irregular-counterexample");
    report.tables.push_back(norms);
    report.tables.push_back(residuals);
    return finish_report(std::move(report), clock);
}

}  // namespace chirality_lab
