#include <cmath>
#include <numbers>
#include <numeric>

#include "chirality_lab/chirality.hpp"
#include "chirality_lab/gauge.hpp"
#include "chirality_lab/morrey.hpp"
#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/systems.hpp"
#include "common.hpp"

namespace chirality_lab {

using namespace detail;

namespace {

QuatMatrixField map_entries(const QuatMatrixField& M, double s) {
    QuatMatrixField out = M;
    for (auto& e : out.entries) e = quat_scale(e, s);
    return out;
}

QuatMatrixField sum(const QuatMatrixField& a, const QuatMatrixField& b) {
    QuatMatrixField out = a;
    for (std::size_t k = 0; k < a.entries.size(); ++k) out.entries[k] = quat_add(a.entries[k], b.entries[k]);
    return out;
}

double matrix_l2(const QuatMatrixField& M) {
    double s = 0.0;
    for (const auto& e : M.entries) s += std::pow(l2(e), 2);
    return std::sqrt(s);
}

// Anti-self-dual field with band-limited entries.
QuatMatrixField random_algebra(const Grid2& g, Rng& rng, int dim, int max_mode) {
    QuatMatrixField U(g, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            QuatField e(g);
            for (int c = (i == j ? 1 : 0); c < 4; ++c) e.comp[c] = random_band_limited(g, rng, max_mode).values;
            U(i, j) = e;
            if (i != j) U(j, i) = quat_scale(quat_conj(e), -1.0);
        }
    return U;
}

// Error of the first-order expansion of N along P exp(tU) for t, t/2, t/4; returns the smaller order.
double linearization_order(const QuatMatrixField& P, const QuatMatrixField& U, bool at_identity) {
    const GaugeImage base = at_identity ? zero_image(P.grid, P.dim) : N_apply(P);
    const GaugeImage lin = at_identity ? L1_apply(U) : Lq_apply(P, U);
    std::vector<double> err;
    for (double t : {1e-2, 5e-3, 2.5e-3}) {
        const QuatMatrixField moved = matmul(P, hyper_exp(map_entries(U, t)));
        err.push_back(image_norm(N_apply(moved) - base - scaled(lin, t)).total());
    }
    return std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
}

GaugeConfig planar_gauge_config(const ExperimentConfig& config, double eps) {
    GaugeConfig gc;
    gc.eps0 = std::max(gc.eps0, 1.25 * eps);
    gc.tolerance = config.tol;
    return gc;
}

ChiralitySystem planar_system(int grid_n, std::uint64_t seed, double angle_gradient) {
    ManufactureParams mp;
    mp.grid_n = grid_n;
    mp.seed = seed;
    mp.angle_gradient = angle_gradient;
    return manufacture_solution("adapted_frame", mp);
}

ManufactureParams frame_params(const ExperimentConfig& config, int n, int m) {
    ManufactureParams mp;
    mp.grid_n = config.grid_n;
    mp.dim = n;
    mp.plus_count = m;
    mp.seed = config.seed;
    return mp;
}

// A = Omega+ / 2, B = antisymmetrized Omega- / 4 from a frame, then the doubled system.
DoubledSystem doubled_from(const ChiralitySystem& sys, int m) {
    const int n = sys.chirality.n();
    const Grid2& g = sys.chirality.grid();
    const auto ft = frame_transform(*sys.frame, m, sys.u, sys.v);
    const auto pot = omega_pm(*sys.frame, m);
    ComplexMatrixField A(g, n, n), B(g, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A(i, j) = scaled(pot.omega_plus(i, j), 0.5);
            B(i, j) = scaled(pot.omega_minus(i, j) - pot.omega_minus(j, i), 0.25);
        }
    std::vector<GrowingQuat> q;
    const ComplexField zero(g);
    for (const auto& c : ft.f) q.push_back(c.map([&](const ComplexField& x) { return quat_from_pair(x, zero); }));
    return double_system(q, A, B);
}

struct MatrixChainRow {
    double gamma_l2 = kNaN;
    double gauge_residual = kNaN;
    double unitarity = kNaN;
    double absorbed_residual = kNaN;
    double factor = kNaN;
    double bound_ratio = kNaN;
    int steps = 0;
};

// Planar frame doubled into a 4 x 4 hyper-unitary problem, rescaled so that ||Gamma||_2 = gamma_norm.
MatrixChainRow matrix_chain(int grid_n, std::uint64_t seed, double gamma_norm) {
    const DoubledSystem probe = doubled_from(planar_system(grid_n, seed, gamma_norm), 1);
    const double angle_gradient = gamma_norm * gamma_norm / matrix_l2(probe.Gamma);
    const ChiralitySystem sys = planar_system(grid_n, seed, angle_gradient);
    const DoubledSystem d = doubled_from(sys, 1);
    MatrixChainRow row;
    row.gamma_l2 = matrix_l2(d.Gamma);
    GaugeConfig gc;
    gc.eps0 = std::max(1.0, 4.0 * row.gamma_l2);
    const PGaugeResult r = P_gauge_structures(d.Gamma, d.Gamma1, d.G, gc);
    row.gauge_residual = r.gauge.residual;
    row.unitarity = r.gauge.unitarity;
    row.absorbed_residual = r.absorbed_residual;
    row.bound_ratio = r.chi.bound_ratio;
    row.steps = r.gauge.continuation_steps;
    const Grid2& g = sys.chirality.grid();
    const auto F = localize(d.G, g.length / 3.0);
    row.factor = contraction_chain(F, map_entries(sum(d.Gamma, d.Gamma1), -2.0), r.gauge.P).factor;
    return row;
}

GrowingComplex conj_growing(const GrowingComplex& f) {
    return f.map([](const ComplexField& x) { return conj(x); });
}

Table gauge_table(const std::string& name, const std::vector<GaugeExperimentRow>& rows, bool plot) {
    Table t{name, {"eps", "seed", "grid_n", "residual", "theta", "contraction_factor", "steps"}, {}, std::nullopt};
    if (plot) t.plot = PlotSpec{"epsilon sweep", 0, {3, 4, 5}, true, true};
    for (const auto& r : rows)
        t.rows.push_back({r.eps, double(r.seed), double(r.grid_n), r.residual, r.theta, r.contraction_factor, double(r.steps)});
    return t;
}

GrowingQuat holomorphic_pair(const Grid2& g) {
    // f = c + (x1 - i x2) d solves d1 f - i d2 f = 0.
    const QuatField c = quat_constant(g, {1.0, 0.3, -0.2, 0.5});
    const QuatField d = quat_constant(g, {0.1, 0.05, 0.0, 0.02});
    return {d, quat_mul(quat_constant(g, {0.0, -1.0, 0.0, 0.0}), d), c};
}

}  // namespace

RunReport cmd_gauge_solve(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const std::vector<double> eps{0.1 * config.eps0, 0.5 * config.eps0, config.eps0};
    std::vector<GaugeExperimentRow> rows(eps.size());
    parallel_for(static_cast<int>(eps.size()), [&](int i) {
        rows[i] = gauge_experiment(eps[i], config.seed, config.grid_n, planar_gauge_config(config, eps[i]));
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string tag = "eps_" + std::to_string(i);
        report.record(tag, rows[i].eps, "gauge-operator");
        report.check(tag + "_converged", rows[i].converged ? 1.0 : 0.0, Relation::greater_equal, 1.0, "gauge-operator");
        report.check(tag + "_residual", rows[i].residual, Relation::less, config.tol, "gauge-operator");
        report.check(tag + "_steps", rows[i].steps, Relation::less_equal, 64, "gauge-operator");
        report.record(tag + "_theta", rows[i].theta, "gauge-operator");
        report.record(tag + "_contraction_factor", rows[i].contraction_factor, "contraction-chain-planar");
    }

    const ChiralitySystem sys = planar_system(config.grid_n, config.seed, config.eps0);
    const GaugeResult gauge = gauge_solve(planar_gauge_target(*sys.angle), planar_gauge_config(config, config.eps0));
    const Grid2& g = sys.chirality.grid();
    Rng rng(Rng::derive(config.seed, 0));
    QuatField u(g);
    for (int c = 1; c < 4; ++c) u.comp[c] = random_band_limited(g, rng, 3).values;
    QuatMatrixField U = as_matrix(u);
    U = map_entries(U, 1.0 / grad_l2(U));
    report.check("linearization_order_identity", linearization_order(quat_matrix_identity(g, 1), U, true),
                 Relation::greater_equal, 1.9, "gauge-linearization");
    report.check("linearization_order_at_gauge", linearization_order(gauge.P, U, false), Relation::greater_equal, 1.9,
                 "gauge-linearization");
    report.check("unitarity_defect", gauge.unitarity, Relation::less, 1e-10, "gauge-operator");
    const GaugePotential pot = gauge_potential(gauge.P);
    report.record("potential_bound_ratio", pot.bound_ratio, "gauge-potential");
    report.record("potential_grad_l21", pot.grad_l21, "gauge-potential");
    report.check("potential_curvature_gap", pot.curvature_gap / std::max(pot.grad_gauge_sq, 1e-300), Relation::less,
                 1e-8, "gauge-potential");
    report.tables.push_back(gauge_table("sweep", rows, true));
    return finish_report(std::move(report), clock);
}

RunReport cmd_reformulate(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const double tol = config.tol;

    const auto constant = manufacture_solution("constant_S", frame_params(config, 3, 1));
    const auto hc = holo_split_residual(constant);
    report.check("constant_frame_split_left", hc.left, Relation::less, tol, "holomorphic-splitting");
    report.check("constant_frame_split_right", hc.right, Relation::less, tol, "holomorphic-splitting");

    const auto sys = manufacture_solution("conjugated_harmonic", frame_params(config, 3, 1));
    const auto hs = holo_split_residual(sys);
    report.check("frame_split_left", hs.left, Relation::less, tol, "holomorphic-splitting");
    report.check("frame_split_right", hs.right, Relation::less, tol, "holomorphic-splitting");
    const auto cp = conjugate_potential(sys.chirality.S, sys.u, tol);
    report.check("conjugate_potential_residual", cp.residual, Relation::less, tol, "conjugate-potential");
    report.check("divergence_residual", cp.div_residual, Relation::less, tol, "chirality-regularity");
    const auto energy = energy_identity(sys.chirality, sys.u);
    report.check("energy_identity_rel", energy.difference / std::max(1.0, std::abs(energy.projector_form)),
                 Relation::less, 1e-10, "pseudo-riemannian-energy");
    const auto frame = extract_frame(sys.chirality);
    report.check("frame_conjugation_residual", frame.conjugation_residual, Relation::less, 1e-10, "frame-conjugation");
    report.record("frame_energy_ratio", frame.energy_ratio, "frame-conjugation");
    report.check("frame_transform_residual", frame_transform(*sys.frame, 1, sys.u, sys.v).residual, Relation::less, tol,
                 "frame-potentials");
    const auto pot = omega_pm(*sys.frame, 1);
    report.check("frame_potential_antisymmetry", pot.antisymmetry, Relation::less, 1e-12, "frame-potentials");
    report.check("jacobian_certificate", pot.jacobian_certificate, Relation::less, 1e-9, "plus-minus-potentials");
    report.check("block_violation", pot.block_violation, Relation::less_equal, 0.0, "block-sign-rule");
    const auto doubled = doubled_from(sys, 1);
    report.check("doubled_residual", doubled.residual, Relation::less, tol, "doubled-system");
    report.check("doubled_steps_residual", doubled.steps_residual, Relation::less, 1e-10, "doubled-coefficients");
    report.check("gamma_anti_self_duality", anti_self_duality(doubled.Gamma), Relation::less, 1e-13,
                 "anti-self-duality");
    report.record("gamma1_anti_self_duality", anti_self_duality(doubled.Gamma1), "anti-self-duality");

    const auto planar = planar_system(config.grid_n, config.seed, config.eps0);
    const auto t = n2_transform(*planar.angle, planar.u, planar.v);
    report.check("planar_complex_residual", t.residual, Relation::less, tol, "planar-complex-equation");
    report.check("planar_real_form_residual", t.real_form_residual, Relation::less, tol, "adapted-frame-system");
    report.check("planar_combined_residual", t.combined_residual, Relation::less, tol, "adapted-frame-system");
    report.check("quaternion_residual", quaternion_residual(*planar.frak_f, *planar.angle), Relation::less, tol,
                 "quaternion-reformulation");
    const auto dirac = dirac_residual(conj_growing(t.f[1]), t.f[0], d_z(*planar.angle));
    report.check("dirac_residual", dirac.residual, Relation::less, tol, "dirac-form");
    report.check("dirac_hypothesis", dirac.hypothesis, Relation::less, 1e-12, "dirac-form");

    const Grid2 g(config.grid_n, config.length);
    Rng rng(Rng::derive(config.seed, 0));
    double equal = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        GrowingComplexVector f;
        for (int i = 0; i < 2; ++i) f.push_back(periodic(random_band_limited_complex(g, rng, 4)));
        const RealField a = random_band_limited(g, rng, 4);
        const double q = quaternion_residual(quaternionize(f), a), s = split_system_residual(f, a);
        equal = std::max(equal, std::abs(q - s) / std::max({q, s, 1e-300}));
    }
    report.check("quaternion_equals_complex_rel", equal, Relation::less, 1e-10, "quaternion-reformulation");

    double closure = 0.0, unitary = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_algebra(g, rng, 4, 2), b = random_algebra(g, rng, 4, 2);
        closure = std::max(closure, anti_self_duality(commutator(a, b)));
        unitary = std::max(unitary, unitarity_defect(hyper_exp(map_entries(a, 0.5))));
    }
    report.check("algebra_commutator_closure", closure, Relation::less, 1e-12, "hyper-unitary-structure");
    report.check("exponential_unitarity", unitary, Relation::less, 1e-12, "hyper-unitary-structure");
    return finish_report(std::move(report), clock);
}

RunReport cmd_contraction(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    constexpr int seeds = 20;
    std::vector<GaugeExperimentRow> planar(seeds);
    std::vector<MatrixChainRow> matrix(seeds);
    parallel_for(2 * seeds, [&](int k) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(k % seeds);
        if (k < seeds) planar[k] = gauge_experiment(config.eps0, seed, config.grid_n, planar_gauge_config(config, config.eps0));
        else matrix[k - seeds] = matrix_chain(config.grid_n, seed, config.eps0);
    });
    std::vector<double> pf, pc, mf, ma, mr;
    for (const auto& r : planar) {
        pf.push_back(r.contraction_factor);
        pc.push_back(r.converged ? 1.0 : 0.0);
    }
    for (const auto& r : matrix) {
        mf.push_back(r.factor);
        ma.push_back(r.absorbed_residual);
        mr.push_back(r.gauge_residual);
    }
    report.check("planar_converged_min", min_of(pc), Relation::greater_equal, 1.0, "contraction-chain-planar");
    report.check("planar_factor_max", max_of(pf), Relation::less, 1.0, "contraction-chain-planar");
    report.check("matrix_gauge_residual_max", max_of(mr), Relation::less, config.tol, "matrix-gauge-potential");
    report.check("matrix_absorbed_residual_max", max_of(ma), Relation::less, 1e-7, "matrix-gauge-potential");
    report.check("matrix_factor_max", max_of(mf), Relation::less, 1.0, "contraction-chain-matrix");
    report.record("matrix_gamma_l2", matrix.front().gamma_l2, "doubled-coefficients");

    double control = kNaN, control_converged = 0.0;
    try {
        GaugeConfig wide = planar_gauge_config(config, 2.0);
        const auto row = gauge_experiment(2.0, config.seed, config.grid_n, wide);
        control = row.contraction_factor;
        control_converged = row.converged ? 1.0 : 0.0;
    } catch (const std::exception&) {
    }
    report.record("control_large_angle_factor", control, "contraction-chain-planar");
    report.record("control_large_angle_converged", control_converged, "contraction-chain-planar");

    report.tables.push_back(gauge_table("planar", planar, false));
    Table mt{"matrix", {"seed", "gamma_l2", "gauge_residual", "absorbed_residual", "contraction_factor", "steps"}, {},
             std::nullopt};
    for (int s = 0; s < seeds; ++s)
        mt.rows.push_back({double(config.seed + s), matrix[s].gamma_l2, matrix[s].gauge_residual,
                           matrix[s].absorbed_residual, matrix[s].factor, double(matrix[s].steps)});
    report.tables.push_back(mt);
    return finish_report(std::move(report), clock);
}

RunReport cmd_morrey_decay(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const int grid_n = std::max(config.grid_n, 128);
    report.record("grid_n_used", grid_n, "morrey-decay");
    constexpr int seeds = 10;
    std::vector<MorreyStudy> studies(seeds);
    parallel_for(seeds, [&](int s) {
        const auto sys = planar_system(grid_n, config.seed + s, config.eps0);
        const auto gauge = gauge_solve(planar_gauge_target(*sys.angle), planar_gauge_config(config, config.eps0));
        const Grid2& g = sys.chirality.grid();
        studies[s] = morrey_study(gauge.q(), *sys.frak_f, g.length / 2, g.length / 2, dyadic_radii(g));
    });
    std::vector<double> gamma, decay, a_ratio;
    Table seeds_table{"seeds", {"seed", "gamma", "decay_exponent", "harmonic_ratio"}, {}, std::nullopt};
    for (int s = 0; s < seeds; ++s) {
        gamma.push_back(studies[s].gamma);
        decay.push_back(studies[s].decay_exponent);
        for (const auto& st : studies[s].steps) a_ratio.push_back(st.a_ratio);
        seeds_table.rows.push_back({double(config.seed + s), studies[s].gamma, studies[s].decay_exponent,
                                    studies[s].harmonic_ratio});
    }
    report.check("gamma_max", max_of(gamma), Relation::less, 1.0, "morrey-decay");
    report.check("decay_exponent_min", min_of(decay), Relation::greater, 0.0, "chirality-regularity");
    report.record("a_ratio_max", max_of(a_ratio), "morrey-decay");

    Table ladder{"ladder", {"radius", "f_weak", "grad_a", "grad_b", "grad_wente", "gamma", "harmonic_ratio"}, {},
                 PlotSpec{"weak norm on the dyadic ladder", 0, {1, 2, 3}, true, true}};
    for (const auto& st : studies.front().steps)
        ladder.rows.push_back({st.radius, st.f_weak, st.grad_a, st.grad_b, st.grad_wente, st.gamma, st.harmonic_ratio});

    // Harmonic control: P = 1 and f holomorphic, so the whole of B is harmonic.
    const Grid2 g(grid_n, config.length);
    const auto control = morrey_study(quat_constant(g, {1, 0, 0, 0}), holomorphic_pair(g), g.length / 2, g.length / 2,
                                      dyadic_radii(g));
    double worst = 0.0;
    for (const auto& st : control.steps)
        worst = std::max(worst, std::abs(st.harmonic_ratio / harmonic_decay_factor(control.shrink) - 1.0));
    report.check("harmonic_control_rel_error", worst, Relation::less, 0.2, "morrey-decay");
    report.record("harmonic_control_gamma", control.gamma, "morrey-decay");

    const Ball ball{g.length / 2, g.length / 2, 1.2};
    const std::vector<RealField> linear{RealField(g, 0.7), RealField(g, -0.4)};
    report.check("harmonic_sublemma_rel_error",
                 std::abs(harmonic_decay_ratio(linear, ball, 0.5) / harmonic_decay_factor(0.5) - 1.0), Relation::less,
                 0.05, "morrey-decay");

    double negative = kNaN;
    try {
        const auto sys = planar_system(grid_n, config.seed, 2.0);
        GaugeResult gauge;
        try {
            gauge = gauge_solve(planar_gauge_target(*sys.angle), planar_gauge_config(config, 2.0));
        } catch (const GaugeStall& stall) {
            gauge = stall.partial;
        }
        negative = morrey_study(gauge.q(), *sys.frak_f, g.length / 2, g.length / 2, dyadic_radii(g)).gamma;
    } catch (const std::exception&) {
    }
    report.record("control_large_angle_gamma", negative, "morrey-decay");
    report.tables.push_back(seeds_table);
    report.tables.push_back(ladder);
    return finish_report(std::move(report), clock);
}

RunReport cmd_full_chain(const ExperimentConfig& config) {
    const Stopwatch clock;
    RunReport report = begin_report(config);
    const double tol = 1e-7;

    const auto sys = planar_system(config.grid_n, config.seed, config.eps0);
    const auto cp = conjugate_potential(sys.chirality.S, sys.u, tol);
    report.check("conjugate_potential_residual", cp.residual, Relation::less, tol, "conjugate-potential");
    const auto hs = holo_split_residual(sys);
    report.check("split_left", hs.left, Relation::less, tol, "holomorphic-splitting");
    report.check("split_right", hs.right, Relation::less, tol, "holomorphic-splitting");
    const auto t = n2_transform(*sys.angle, sys.u, sys.v);
    report.check("planar_complex_residual", t.residual, Relation::less, tol, "planar-complex-equation");
    report.check("quaternion_residual", quaternion_residual(*sys.frak_f, *sys.angle), Relation::less, tol,
                 "quaternion-reformulation");
    report.check("dirac_residual", dirac_residual(conj_growing(t.f[1]), t.f[0], d_z(*sys.angle)).residual,
                 Relation::less, tol, "dirac-form");
    report.check("rewritten_equation_residual", rewritten_equation_residual(sys.chirality.S, sys.u), Relation::less,
                 tol, "chirality-regularity");

    const auto gauge = gauge_solve(planar_gauge_target(*sys.angle), planar_gauge_config(config, config.eps0));
    report.check("gauge_residual", gauge.residual, Relation::less, tol, "gauge-operator");
    report.record("gauge_theta", gauge.theta_measured, "gauge-operator");
    const Grid2& g = sys.chirality.grid();
    const auto F = localize({*sys.frak_f}, g.length / 3.0);
    const auto chain = contraction_chain(F[0], *sys.angle, gauge);
    report.check("contraction_factor", chain.factor, Relation::less, 1.0, "contraction-chain-planar");
    const auto study = morrey_study(gauge.q(), *sys.frak_f, g.length / 2, g.length / 2, dyadic_radii(g));
    report.check("morrey_gamma", study.gamma, Relation::less, 1.0, "morrey-decay");

    const auto frame_sys = manufacture_solution("conjugated_harmonic", frame_params(config, 3, 1));
    const auto doubled = doubled_from(frame_sys, 1);
    report.check("doubled_structure_certificate", doubled.structure_certificate, Relation::less, 1e-13,
                 "anti-self-duality");
    report.check("doubled_residual", doubled.residual, Relation::less, tol, "doubled-system");
    return finish_report(std::move(report), clock);
}

RunReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    const std::string& e = config.experiment;
    if (e == "ops-verify") return cmd_ops_verify(config);
    if (e == "hodge-check") return cmd_hodge_check(config);
    if (e == "bb-check") return cmd_bb_check(config);
    if (e == "wente-check") return cmd_wente_check(config);
    if (e == "gauge-solve") return cmd_gauge_solve(config);
    if (e == "reformulate") return cmd_reformulate(config);
    if (e == "contraction") return cmd_contraction(config);
    if (e == "morrey-decay") return cmd_morrey_decay(config);
    if (e == "bootstrap-demo") return cmd_bootstrap_demo(config);
    if (e == "jms") return cmd_jms(config);
    return cmd_full_chain(config);
}

}  // namespace chirality_lab
