#include "chirality_lab/compensation.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "chirality_lab/random_fields.hpp"
#include "json.hpp"

namespace chirality_lab {

namespace {

double l2_vec(const Vec2Field& a) { return l2(std::vector<RealField>{a.x1, a.x2}); }

double integral(const ComplexField& f, bool real) {
    double s = 0.0;
    for (const auto& v : f.values) s += real ? v.real() : v.imag();
    return s * f.grid.cell_measure();
}

}  // namespace

Vec2Field implied_f(const SplitGradientData& d) {
    return {d1(d.a1.x1) + d2(d.a2.x1), d1(d.a1.x2) + d2(d.a2.x2)};
}

SplitGradientData split_from(const Vec2Field& f, const Vec2Field& g) {
    const RealField p1 = inv_laplacian(f.x1), p2 = inv_laplacian(f.x2);
    SplitGradientData d;
    d.a1 = {d1(p1), d1(p2)};
    d.a2 = {d2(p1), d2(p2)};
    d.g = g;
    return d;
}

BBResult bb_reconstruct(const SplitGradientData& data) {
    require_same_grid(data.a1.x1.grid, data.g.x1.grid);
    require_same_grid(data.a2.x1.grid, data.g.x1.grid);
    const HodgeParts h1 = hodge_decompose(data.a1), h2 = hodge_decompose(data.a2);
    BBResult out;
    out.w1 = d1(h1.alpha) + d2(h2.alpha);
    out.w2 = d1(h1.beta) + d2(h2.beta);
    // f = grad w1 + grad_perp w2, hence d_zbar(u - w1 - i w2) = (g1 + i g2)/2.
    const ComplexField gc = scaled(make_complex(data.g.x1, data.g.x2), 0.5);
    const ComplexField H = cauchy_solve(gc);
    out.u = subtract_mean(out.w1 + real_part(H));

    const Vec2Field f = implied_f(data);
    auto& dg = out.diag;
    dg.u_l2 = l2(out.u);
    dg.f_neg_sobolev = std::hypot(sobolev_neg_1_2(subtract_mean(f.x1)), sobolev_neg_1_2(subtract_mean(f.x2)));
    dg.g_l1 = lp_norm(pointwise_abs(data.g), 1.0);
    const double denom = dg.f_neg_sobolev + dg.g_l1;
    dg.ratio = denom > 0 ? dg.u_l2 / denom : 0.0;
    const Vec2Field gu = grad(out.u);
    const Vec2Field target{subtract_mean(f.x1 + data.g.x1), subtract_mean(f.x2 + data.g.x2)};
    const double tn = l2_vec(target);
    const double res = l2_vec({gu.x1 - target.x1, gu.x2 - target.x2});
    dg.gradient_residual = tn > 0 ? res / tn : res;
    return out;
}

RealFromImagDiagnostics real_from_imag_bound(const ComplexField& h, const ComplexField& g) {
    require_same_grid(h.grid, g.grid);
    RealFromImagDiagnostics d;
    const ComplexField dh = d_zbar(h);
    const double res = l2(dh - g);
    const double scale = l2(g) + l2(dh);
    d.precondition_residual = scale > 0 ? res / scale : res;
    if (d.precondition_residual > 1e-10)
        throw PreconditionError("real_from_imag_bound: d_zbar h differs from g (relative residual " +
                                    std::to_string(d.precondition_residual) + ")",
                                d.precondition_residual);
    const ComplexField T = inv_dzbar_sq_kernel_apply(g);
    d.re_sq = std::pow(l2(real_part(h)), 2);
    d.im_sq = std::pow(l2(imag_part(h)), 2);
    d.integral_h_sq = integral(h * h, true);
    d.integral_gT = integral(g * T, true);
    const cplx m = field_mean(h);
    d.mean_term = (m * m).real() * h.grid.area();
    d.identity_residual = std::abs(d.integral_h_sq + d.integral_gT - d.mean_term);
    d.g_l1 = lp_norm(pointwise_abs(g), 1.0);
    d.T_sup = max_abs(T);
    d.identity_scale = d.re_sq + d.im_sq + d.g_l1 * d.T_sup;
    d.kernel_constant = d.g_l1 > 0 ? d.T_sup / d.g_l1 : 0.0;
    d.identity_constant = d.g_l1 > 0 ? std::abs(d.integral_gT) / (d.g_l1 * d.g_l1) : 0.0;
    const double rhs = d.im_sq + d.identity_constant * d.g_l1 * d.g_l1 + std::max(0.0, d.mean_term);
    d.inequality_holds = d.re_sq <= rhs + 1e-12 * (d.re_sq + rhs);
    return d;
}

RefinedBoundDiagnostics bb_refined_bound(const RealField& v, const Vec2Field& g) {
    const Vec2Field f = grad_perp(v);
    const BBResult r = bb_reconstruct(split_from(f, g));
    const ComplexField gh = scaled(make_complex(g.x1, g.x2), 0.5);
    const ComplexField T = inv_dzbar_sq_kernel_apply(gh);
    RefinedBoundDiagnostics d;
    d.u_sq = std::pow(l2(r.u), 2);
    d.v_sq = std::pow(l2(subtract_mean(v)), 2);
    d.g_l1 = lp_norm(pointwise_abs(g), 1.0);
    const double bound = lp_norm(pointwise_abs(gh), 1.0) * max_abs(T);
    d.kernel_constant = d.g_l1 > 0 ? bound / (d.g_l1 * d.g_l1) : 0.0;
    d.leading_constant = d.v_sq > 0 ? (d.u_sq - bound) / d.v_sq : 0.0;
    return d;
}

WenteResult poisson_with_diagnostics(const RealField& rhs) {
    WenteResult out;
    out.rhs = rhs;
    out.phi = -inv_laplacian(rhs);
    const Vec2Field gp = grad(out.phi);
    const RealField mag = pointwise_abs(gp);
    out.diag.phi_sup = max_abs(out.phi);
    out.diag.grad_phi_l2 = l2(mag);
    out.diag.grad_phi_l21 = lorentz_l21(mag);
    return out;
}

WenteResult wente_solve(const RealField& a, const RealField& b) {
    require_same_grid(a.grid, b.grid);
    const Vec2Field ga = grad(a), gb = grad_perp(b);
    WenteResult out = poisson_with_diagnostics(ga.x1 * gb.x1 + ga.x2 * gb.x2);
    auto& d = out.diag;
    d.grad_a_l2 = l2_vec(ga);
    d.grad_b_l2 = l2_vec(gb);
    d.grad_a_weak = lorentz_weak_l2(pointwise_abs(ga));
    const double prod = d.grad_a_l2 * d.grad_b_l2;
    d.sup_ratio = prod > 0 ? d.phi_sup / prod : 0.0;
    d.l21_ratio = prod > 0 ? d.grad_phi_l21 / prod : 0.0;
    const double weak = d.grad_a_weak * d.grad_b_l2;
    d.weak_strong_ratio = weak > 0 ? d.grad_phi_l2 / weak : 0.0;
    return out;
}

RealField phase_shuffle(const RealField& f, std::uint64_t seed) {
    const Grid2& g = f.grid;
    const auto& P = plan_for(g);
    const ComplexField spec = P.forward(f);
    ComplexField out(g);
    Rng rng(seed);
    const int n = g.n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const std::size_t idx = g.index(a, b);
            const std::size_t pidx = g.index((n - a) % n, (n - b) % n);
            if (idx == 0) continue;
            const double mag = std::abs(spec[idx]);
            if (idx < pidx) {
                const double phase = 2.0 * std::numbers::pi * rng.uniform();
                out[idx] = std::polar(mag, phase);
                out[pidx] = std::conj(out[idx]);
            } else if (idx == pidx) {
                out[idx] = rng.uniform() < 0.5 ? -mag : mag;
            }
        }
    return real_part(P.inverse(out));
}

std::string DiagnosticsRecord::to_json() const {
    nlohmann::ordered_json j;
    j["lemma"] = lemma;
    j["inputs_hash"] = inputs_hash;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["constant"] = constant;
    j["grid_n"] = grid_n;
    j["seed"] = seed;
    return j.dump();
}

std::string hash_fields(std::initializer_list<const RealField*> fields) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const RealField* f : fields) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(f->values.data());
        const std::size_t nbytes = f->values.size() * sizeof(double);
        for (std::size_t i = 0; i < nbytes; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace chirality_lab
