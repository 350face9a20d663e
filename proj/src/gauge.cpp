#include "chirality_lab/gauge.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>

#include "chirality_lab/norms.hpp"
#include "chirality_lab/spectral.hpp"

namespace chirality_lab {

namespace {

template <class Fn>
QuatMatrixField map_entries(const QuatMatrixField& M, Fn fn) {
    QuatMatrixField out(M.grid, M.dim);
    for (std::size_t k = 0; k < M.entries.size(); ++k) out.entries[k] = fn(M.entries[k]);
    return out;
}

QuatMatrixField add(const QuatMatrixField& a, const QuatMatrixField& b) {
    QuatMatrixField out(a.grid, a.dim);
    for (std::size_t k = 0; k < a.entries.size(); ++k) out.entries[k] = quat_add(a.entries[k], b.entries[k]);
    return out;
}

QuatMatrixField sub(const QuatMatrixField& a, const QuatMatrixField& b) {
    QuatMatrixField out(a.grid, a.dim);
    for (std::size_t k = 0; k < a.entries.size(); ++k) out.entries[k] = quat_sub(a.entries[k], b.entries[k]);
    return out;
}

QuatMatrixField scale(const QuatMatrixField& a, double s) {
    return map_entries(a, [s](const QuatField& x) { return quat_scale(x, s); });
}

QuatMatrixField dm(const QuatMatrixField& a, int axis) {
    return map_entries(a, [axis](const QuatField& x) { return axis == 1 ? d1(x) : d2(x); });
}

QuatField keep_components(const QuatField& x, int first, int last) {
    QuatField out(x.grid);
    for (int c = first; c <= last; ++c) out.comp[c] = x.comp[c];
    return out;
}

std::vector<QuatField> matvec(const QuatMatrixField& M, const std::vector<QuatField>& v) {
    std::vector<QuatField> out;
    for (int i = 0; i < M.dim; ++i) {
        QuatField acc(M.grid);
        for (int j = 0; j < M.dim; ++j) acc = quat_add(acc, quat_mul(M(i, j), v[j]));
        out.push_back(std::move(acc));
    }
    return out;
}

double l2(const std::vector<QuatField>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::pow(chirality_lab::l2(x), 2);
    return std::sqrt(s);
}

double l2(const QuatMatrixField& M) {
    double s = 0.0;
    for (const auto& x : M.entries) s += std::pow(chirality_lab::l2(x), 2);
    return std::sqrt(s);
}

// Projection onto the algebra: (U - conj(U)^T) / 2.
QuatMatrixField to_algebra(const QuatMatrixField& U) { return scale(sub(U, adjoint(U)), 0.5); }

// Means of the j and k components of g over the upper triangle.
Eigen::VectorXd jk_means(const GaugeImage& a) {
    const int d = a.g.dim;
    Eigen::VectorXd v(d * (d + 1));
    int r = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const Quaternion m = field_mean(a.g(i, j));
            v(r++) = m.j_part;
            v(r++) = m.k_part;
        }
    return v;
}

// Image norm with the means of g removed.
double mean_free_norm(const GaugeImage& a) {
    const ImageNorm n = image_norm(a);
    double gm = 0.0;
    for (const auto& e : a.g.entries) {
        const Quaternion m = field_mean(e);
        gm += (m.j_part * m.j_part + m.k_part * m.k_part) * e.grid.area();
    }
    return n.omega + std::sqrt(std::max(0.0, n.g * n.g - gm));
}

// The 1, i part of d1 b1 + d2 b2, differentiating only that part.
QuatMatrixField divergence_one_i(const QuatMatrixField& b1, const QuatMatrixField& b2) {
    QuatMatrixField out(b1.grid, b1.dim);
    const ComplexField zero(b1.grid);
    for (std::size_t k = 0; k < out.entries.size(); ++k)
        out.entries[k] = quat_from_pair(d1(quat_first(b1.entries[k])) + d2(quat_first(b2.entries[k])), zero);
    return out;
}

GaugeImage image_of(const QuatMatrixField& b1, const QuatMatrixField& b2) {
    return {divergence_one_i(b1, b2), keep_jk(sub(b1, times_i(b2)))};
}

GaugeImage lq_apply_with(const LeftLogDerivative& A, const QuatMatrixField& U) {
    return image_of(add(dm(U, 1), commutator(A.a1, U)), add(dm(U, 2), commutator(A.a2, U)));
}

GaugeImage perturbation(const LeftLogDerivative& A, const QuatMatrixField& U) {
    return image_of(commutator(A.a1, U), commutator(A.a2, U));
}

double sup_diff(const QuatMatrixField& a, const QuatMatrixField& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.entries.size(); ++k)
        for (int c = 0; c < 4; ++c)
            for (std::size_t i = 0; i < a.grid.size(); ++i)
                worst = std::max(worst, std::abs(a.entries[k].comp[c][i] - b.entries[k].comp[c][i]));
    return worst;
}

}  // namespace

GaugeImage operator+(const GaugeImage& a, const GaugeImage& b) { return {add(a.omega, b.omega), add(a.g, b.g)}; }
GaugeImage operator-(const GaugeImage& a, const GaugeImage& b) { return {sub(a.omega, b.omega), sub(a.g, b.g)}; }
GaugeImage scaled(const GaugeImage& a, double s) { return {scale(a.omega, s), scale(a.g, s)}; }
GaugeImage zero_image(const Grid2& grid, int dim) { return {QuatMatrixField(grid, dim), QuatMatrixField(grid, dim)}; }

ImageNorm image_norm(const GaugeImage& a) {
    ImageNorm n;
    double w = 0.0;
    for (const auto& e : a.omega.entries)
        for (int c = 0; c < 2; ++c) {
            RealField f(e.grid);
            f.values = e.comp[c];
            const double m = field_mean(f);
            n.omega_mean = std::max(n.omega_mean, std::abs(m));
            const double part = sobolev_neg_1_2(subtract_mean(f)) + std::abs(m) * e.grid.length;
            w += part * part;
        }
    n.omega = std::sqrt(w);
    n.g = l2(a.g);
    for (const auto& e : a.g.entries) {
        const Quaternion m = field_mean(e);
        n.g_mean = std::max({n.g_mean, std::abs(m.j_part), std::abs(m.k_part)});
    }
    return n;
}

QuatMatrixField quat_matrix_identity(const Grid2& grid, int dim) {
    QuatMatrixField out(grid, dim);
    for (int i = 0; i < dim; ++i) out(i, i) = quat_constant(grid, Quaternion{1.0});
    return out;
}

QuatMatrixField as_matrix(const QuatField& q) {
    QuatMatrixField out(q.grid, 1);
    out(0, 0) = q;
    return out;
}

QuatMatrixField adjoint(const QuatMatrixField& M) {
    QuatMatrixField out(M.grid, M.dim);
    for (int i = 0; i < M.dim; ++i)
        for (int j = 0; j < M.dim; ++j) out(i, j) = quat_conj(M(j, i));
    return out;
}

QuatMatrixField keep_one_i(const QuatMatrixField& M) {
    return map_entries(M, [](const QuatField& x) { return keep_components(x, 0, 1); });
}

QuatMatrixField keep_jk(const QuatMatrixField& M) {
    return map_entries(M, [](const QuatField& x) { return keep_components(x, 2, 3); });
}

QuatMatrixField times_i(const QuatMatrixField& M) {
    return map_entries(M, [](const QuatField& x) { return right_i(x); });
}

double unitarity_defect(const QuatMatrixField& P) {
    return sup_diff(matmul(adjoint(P), P), quat_matrix_identity(P.grid, P.dim));
}

double grad_l2(const QuatMatrixField& P) {
    const double a = l2(dm(P, 1)), b = l2(dm(P, 2));
    return std::sqrt(a * a + b * b);
}

QuatMatrixField hyper_exp(const QuatMatrixField& U) {
    const int d = U.dim;
    if (d == 1) return as_matrix(quat_exp(U(0, 0)));
    QuatMatrixField out(U.grid, d);
    Eigen::MatrixXcd M(2 * d, 2 * d);
    for (std::size_t node = 0; node < U.grid.size(); ++node) {
        // q = a + b j  ->  [[a, b], [-conj b, conj a]], a multiplicative embedding.
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const Quaternion q = U(i, j).at(node);
                const cplx a = q.first(), b = q.second();
                M(2 * i, 2 * j) = a;
                M(2 * i, 2 * j + 1) = b;
                M(2 * i + 1, 2 * j) = -std::conj(b);
                M(2 * i + 1, 2 * j + 1) = std::conj(a);
            }
        const Eigen::MatrixXcd E = M.exp();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j).set(node, Quaternion::from_pair(E(2 * i, 2 * j), E(2 * i, 2 * j + 1)));
    }
    return out;
}

LeftLogDerivative left_log_derivative(const QuatMatrixField& P) {
    const QuatMatrixField inv = adjoint(P);
    return {matmul(inv, dm(P, 1)), matmul(inv, dm(P, 2))};
}

GaugeImage N_apply(const QuatMatrixField& P) {
    const double defect = unitarity_defect(P);
    if (defect > 1e-10) throw NotUnitary("N_apply: gauge field is not hyper-unitary (defect " + std::to_string(defect) + ")");
    const LeftLogDerivative A = left_log_derivative(P);
    return {keep_one_i(add(dm(A.a1, 1), dm(A.a2, 2))), keep_jk(sub(A.a1, times_i(A.a2)))};
}

GaugeImage N_apply(const QuatField& q) { return N_apply(as_matrix(q)); }

GaugeImage L1_apply(const QuatMatrixField& U) {
    return image_of(dm(U, 1), dm(U, 2));
}

QuatMatrixField L1_solve(const GaugeImage& rhs) {
    const Grid2& g = rhs.omega.grid;
    QuatMatrixField U(g, rhs.omega.dim);
    for (std::size_t k = 0; k < U.entries.size(); ++k) {
        QuatField& u = U.entries[k];
        for (int c = 0; c < 2; ++c) {
            RealField f(g);
            f.values = rhs.omega.entries[k].comp[c];
            u.comp[c] = inv_laplacian(subtract_mean(f)).values;
        }
        // jk part: d_z(u2 - u3 i) = (a - b i) / 2 with (a, b) the j, k components.
        RealField a(g), b(g);
        a.values = rhs.g.entries[k].comp[2];
        b.values = rhs.g.entries[k].comp[3];
        const ComplexField c = scaled(make_complex(a, -b), 0.5);
        const ComplexField w = conj(cauchy_solve(conj(c)));
        u.comp[2] = real_part(w).values;
        u.comp[3] = (-imag_part(w)).values;
    }
    return to_algebra(U);
}

GaugeImage Lq_apply(const QuatMatrixField& P, const QuatMatrixField& U) {
    return lq_apply_with(left_log_derivative(P), U);
}

LqSolveResult Lq_solve(const QuatMatrixField& P, const GaugeImage& rhs, const LqConfig& config) {
    const Grid2& g = P.grid;
    const int d = P.dim;
    const LeftLogDerivative A = left_log_derivative(P);

    auto richardson = [&](const GaugeImage& r, LqSolveResult& stats) {
        const double r_norm = mean_free_norm(r);
        QuatMatrixField U(g, d);
        if (r_norm == 0.0) return U;
        double prev_inc = 0.0, first_inc = 0.0;
        for (int it = 1; it <= config.max_iterations; ++it) {
            QuatMatrixField U_new = L1_solve(r - perturbation(A, U));
            const double inc = l2(sub(U_new, U));
            if (it == 1) first_inc = inc;
            if (prev_inc > 0.0) stats.contraction = std::max(stats.contraction, inc / prev_inc);
            prev_inc = inc;
            U = std::move(U_new);
            stats.iterations += 1;
            if (!std::isfinite(inc) || inc > 1e3 * first_inc)
                throw GaugeDivergence("Lq_solve diverged (contraction " + std::to_string(stats.contraction) + ")",
                                      stats.contraction, stats.iterations);
            const double u_norm = l2(U);
            if (inc <= 1e-15 * u_norm) return U;
            if (inc > std::sqrt(config.tolerance) * u_norm) continue;
            const double res = mean_free_norm(lq_apply_with(A, U) - r) / r_norm;
            if (res < config.tolerance) return U;
        }
        const double res = mean_free_norm(lq_apply_with(A, U) - r) / r_norm;
        if (res > std::sqrt(config.tolerance))
            throw GaugeDivergence("Lq_solve did not converge in " + std::to_string(config.max_iterations) +
                                      " iterations (contraction " + std::to_string(stats.contraction) + ")",
                                  stats.contraction, stats.iterations);
        return U;
    };

    LqSolveResult out;
    out.U = richardson(rhs, out);
    out.U = to_algebra(out.U);
    const double rn = mean_free_norm(rhs);
    const GaugeImage r = lq_apply_with(A, out.U) - rhs;
    out.residual = rn > 0.0 ? mean_free_norm(r) / rn : 0.0;
    out.mean_gap = jk_means(r).cwiseAbs().maxCoeff();
    return out;
}

QuatField GaugeResult::q() const {
    if (P.dim != 1) throw std::invalid_argument("GaugeResult::q: matrix gauge");
    return P(0, 0);
}

GaugeResult gauge_solve(const GaugeImage& target, const GaugeConfig& config) {
    const Grid2& grid = target.omega.grid;
    const int d = target.omega.dim;
    const double size = image_norm(target).total();
    if (size > config.eps0 * (1.0 + 1e-9))
        throw std::invalid_argument("gauge_solve: target norm " + std::to_string(size) + " exceeds eps0 " +
                                    std::to_string(config.eps0));

    GaugeResult res;
    res.P = quat_matrix_identity(grid, d);
    auto note_defect = [&](const QuatMatrixField& P) {
        const LeftLogDerivative A = left_log_derivative(P);
        res.algebra_defect = std::max({res.algebra_defect, anti_self_duality(A.a1), anti_self_duality(A.a2)});
    };
    // Damped Newton on P <- P exp(lambda U). The jk means of the image are fixed by its mean-free
    // part, so acceptance uses the mean-free norm.
    auto newton = [&](QuatMatrixField& P, double t) {
        auto metric = [](const GaugeImage& r) { return mean_free_norm(r); };
        GaugeImage r = scaled(target, t) - N_apply(P);
        double rn = metric(r);
        int steps = 0;
        for (; rn >= config.tolerance && steps < config.newton_max; ++steps) {
            QuatMatrixField U;
            try {
                U = Lq_solve(P, r, config.lq).U;
            } catch (const GaugeDivergence&) {
                break;
            }
            bool improved = false;
            for (double lambda = 1.0; lambda >= 1.0 / 16.0; lambda *= 0.5) {
                QuatMatrixField P_new = matmul(P, hyper_exp(scale(U, lambda)));
                GaugeImage r_new = scaled(target, t) - N_apply(P_new);
                const double rn_new = metric(r_new);
                if (rn_new < rn) {
                    P = std::move(P_new);
                    r = std::move(r_new);
                    rn = rn_new;
                    improved = true;
                    break;
                }
            }
            note_defect(P);
            if (!improved) break;
        }
        res.newton_steps += steps;
        return rn;
    };
    auto finish = [&]() {
        res.residual_parts = image_norm(target - N_apply(res.P));
        res.residual = res.residual_parts.total();
        res.omega_mean_gap = res.residual_parts.omega_mean;
        res.unitarity = unitarity_defect(res.P);
        res.theta_measured = size > 0.0 ? grad_l2(res.P) / size : 0.0;
    };

    double t = 0.0, dt = config.dt;
    while (t < 1.0) {
        const double t_try = std::min(1.0, t + dt);
        QuatMatrixField P = res.P;
        if (newton(P, t_try) < config.tolerance) {
            res.P = std::move(P);
            t = t_try;
            ++res.continuation_steps;
        } else {
            dt *= 0.5;
            if (dt < config.min_dt) {
                finish();
                res.t_reached = t;
                throw GaugeStall("gauge_solve: continuation stalled at t = " + std::to_string(t), res);
            }
        }
    }
    res.t_reached = 1.0;
    finish();
    return res;
}

GaugePotential gauge_potential(const QuatMatrixField& P) {
    const Grid2& g = P.grid;
    const LeftLogDerivative A = left_log_derivative(P);
    const QuatMatrixField p1 = keep_one_i(A.a1), p2 = keep_one_i(A.a2);
    GaugePotential out;
    out.chi = QuatMatrixField(g, P.dim);
    out.harmonic1 = QuatMatrixField(g, P.dim);
    out.harmonic2 = QuatMatrixField(g, P.dim);
    const QuatMatrixField curv = keep_one_i(commutator(A.a2, A.a1));
    std::vector<RealField> grad_parts;
    double gap = 0.0;
    for (std::size_t k = 0; k < out.chi.entries.size(); ++k)
        for (int c = 0; c < 2; ++c) {
            RealField a(g), b(g), w(g);
            a.values = p1.entries[k].comp[c];
            b.values = p2.entries[k].comp[c];
            w.values = curv.entries[k].comp[c];
            const RealField chi = inv_laplacian(d1(b) - d2(a));
            out.chi.entries[k].comp[c] = chi.values;
            out.harmonic1.entries[k].comp[c].assign(g.size(), field_mean(a));
            out.harmonic2.entries[k].comp[c].assign(g.size(), field_mean(b));
            grad_parts.push_back(d1(chi));
            grad_parts.push_back(d2(chi));
            gap += std::pow(chirality_lab::l2(laplacian(chi) - subtract_mean(w)), 2);
        }
    out.curvature_gap = std::sqrt(gap);
    out.divergence_violation = l2(keep_one_i(add(dm(A.a1, 1), dm(A.a2, 2))));
    out.grad_l21 = lorentz_l21(pointwise_abs(grad_parts));
    out.grad_gauge_sq = std::pow(grad_l2(P), 2);
    out.bound_ratio = out.grad_gauge_sq > 0.0 ? out.grad_l21 / out.grad_gauge_sq : 0.0;
    return out;
}

RealField zeta_field(const GaugePotential& p) {
    RealField z(p.chi.grid);
    z.values = p.chi(0, 0).comp[1];
    return z;
}

ContractionReport contraction_chain(const std::vector<QuatField>& F, const QuatMatrixField& W, const QuatMatrixField& P) {
    if (static_cast<int>(F.size()) != P.dim || W.dim != P.dim)
        throw std::invalid_argument("contraction_chain: dimension mismatch");
    const Grid2& g = P.grid;
    ContractionReport out;
    if (l2(F) == 0.0) {
        out.degenerate = true;
        return out;
    }
    const LeftLogDerivative A = left_log_derivative(P);
    const QuatMatrixField iW = map_entries(W, [](const QuatField& x) { return left_i(x); });
    const QuatMatrixField R1 = sub(sub(A.a1, times_i(A.a2)), W);
    const QuatMatrixField R2 = sub(add(times_i(A.a1), A.a2), iW);
    const auto src_div = matvec(matmul(P, R1), F);
    const auto src_curl = matvec(scale(matmul(P, R2), -1.0), F);
    const auto PF = matvec(P, F);
    std::vector<QuatField> iF;
    for (const auto& x : F) iF.push_back(left_i(x));
    const auto PiF = matvec(P, iF);

    std::vector<RealField> ga, gb, gf, gap;
    double x_sq = 0.0;
    for (std::size_t v = 0; v < F.size(); ++v)
        for (int c = 0; c < 4; ++c) {
            RealField sd(g), sc(g), x1(g), x2(g);
            sd.values = src_div[v].comp[c];
            sc.values = src_curl[v].comp[c];
            x1.values = PF[v].comp[c];
            for (std::size_t i = 0; i < g.size(); ++i) x2[i] = -PiF[v].comp[c][i];
            const RealField a = inv_laplacian(subtract_mean(sd)), b = inv_laplacian(subtract_mean(sc));
            const RealField a1 = d1(a), a2 = d2(a), b1 = d1(b), b2 = d2(b);
            ga.push_back(a1);
            ga.push_back(a2);
            gb.push_back(b1);
            gb.push_back(b2);
            gf.push_back(x1);
            gap.push_back(subtract_mean(x1) - (a1 - b2));
            gap.push_back(subtract_mean(x2) - (a2 + b1));
            x_sq += std::pow(chirality_lab::l2(x1), 2) + std::pow(chirality_lab::l2(x2), 2);
        }
    out.grad_a_weak = lorentz_weak_l2(pointwise_abs(ga));
    out.grad_b_weak = lorentz_weak_l2(pointwise_abs(gb));
    out.gauged_weak = lorentz_weak_l2(pointwise_abs(gf));
    out.factor = (out.grad_a_weak + out.grad_b_weak) / out.gauged_weak;
    out.hodge_gap = chirality_lab::l2(gap) / std::sqrt(x_sq);

    const auto WF = matvec(W, F);
    double eq = 0.0, grad_sq = 0.0;
    for (std::size_t v = 0; v < F.size(); ++v) {
        const QuatField f1 = d1(F[v]), f2 = d2(F[v]);
        eq += std::pow(chirality_lab::l2(quat_add(quat_sub(f1, left_i(f2)), WF[v])), 2);
        grad_sq += std::pow(chirality_lab::l2(f1), 2) + std::pow(chirality_lab::l2(f2), 2);
    }
    out.equation_residual = std::sqrt(eq / grad_sq);
    return out;
}

QuatMatrixField planar_coefficient(const RealField& angle) {
    return as_matrix(quat_from_pair(ComplexField(angle.grid), scaled(d_z(angle), 2.0)));
}

GaugeImage planar_gauge_target(const RealField& angle) {
    GaugeImage t = zero_image(angle.grid, 1);
    t.g = keep_jk(planar_coefficient(angle));
    return t;
}

ContractionReport contraction_chain(const QuatField& F, const RealField& angle, const GaugeResult& gauge) {
    return contraction_chain(std::vector<QuatField>{F}, planar_coefficient(angle), gauge.P);
}

std::vector<QuatField> localize(const std::vector<GrowingQuat>& F, double radius) {
    if (F.empty()) return {};
    const Grid2& g = F.front().base.grid;
    const double c = 0.5 * g.length;
    const RealField bump = sample<double>(g, [&](double x1, double x2) {
        const double s = ((x1 - c) * (x1 - c) + (x2 - c) * (x2 - c)) / (radius * radius);
        return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
    });
    std::vector<QuatField> out;
    for (const auto& f : F) out.push_back(growing_detail::weight(bump, evaluate(f)));
    return out;
}

PGaugeResult P_gauge_structures(const QuatMatrixField& Gamma, const QuatMatrixField& Gamma1,
                                const std::vector<GrowingQuat>& G, const GaugeConfig& config) {
    if (anti_self_duality(Gamma) > 1e-10) throw std::invalid_argument("P_gauge_structures: Gamma is not anti-self-dual");
    if (l2(keep_one_i(Gamma)) > 1e-12)
        throw std::invalid_argument("P_gauge_structures: Gamma must have only j and k components");
    const Grid2& g = Gamma.grid;
    GaugeImage target = zero_image(g, Gamma.dim);
    target.g = scale(Gamma, -2.0);

    PGaugeResult out;
    out.gauge = gauge_solve(target, config);
    const QuatMatrixField& P = out.gauge.P;
    out.chi = gauge_potential(P);
    for (const auto* h : {&out.chi.harmonic1, &out.chi.harmonic2})
        for (const auto& e : h->entries)
            for (int c = 0; c < 2; ++c)
                if (!e.comp[c].empty()) out.harmonic = std::max(out.harmonic, std::abs(e.comp[c][0]));

    if (G.empty()) return out;
    std::vector<GrowingQuat> iG;
    for (const auto& x : G) iG.push_back(x.map([](const QuatField& f) { return left_i(f); }));
    const auto PG = act(P, G), PiG = act(P, iG);
    const QuatMatrixField H = scale(sub(out.chi.harmonic1, times_i(out.chi.harmonic2)), 0.5);
    const QuatMatrixField dl_chi = map_entries(out.chi.chi, [](const QuatField& x) { return left_i(d_L(x)); });
    const QuatMatrixField inner = add(add(scale(dl_chi, -1.0), Gamma1), H);
    const auto rhs = act(scale(matmul(P, inner), 2.0), G);
    std::vector<GrowingQuat> diff, lhs;
    for (std::size_t k = 0; k < G.size(); ++k) {
        lhs.push_back(d1(PG[k]) - d2(PiG[k]));
        diff.push_back(lhs.back() - rhs[k]);
    }
    out.absorbed_residual = chirality_lab::l2(diff) / chirality_lab::l2(lhs);
    return out;
}

GaugeExperimentRow gauge_experiment(double eps, std::uint64_t seed, int grid_n, const GaugeConfig& config) {
    ManufactureParams params;
    params.grid_n = grid_n;
    params.seed = seed;
    params.angle_gradient = eps;
    const ChiralitySystem sys = manufacture_solution("adapted_frame", params);
    GaugeExperimentRow row;
    row.eps = eps;
    row.seed = seed;
    row.grid_n = grid_n;
    GaugeResult gauge;
    try {
        gauge = gauge_solve(planar_gauge_target(*sys.angle), config);
        row.converged = true;
    } catch (const GaugeStall& stall) {
        gauge = stall.partial;
    }
    row.residual = gauge.residual;
    row.theta = gauge.theta_measured;
    row.steps = gauge.continuation_steps;
    const Grid2& g = sys.chirality.grid();
    const auto F = localize({*sys.frak_f}, g.length / 3.0);
    row.contraction_factor = contraction_chain(F[0], *sys.angle, gauge).factor;
    return row;
}

}  // namespace chirality_lab
