#include "chirality_lab/systems.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "chirality_lab/io.hpp"
#include "chirality_lab/random_fields.hpp"
#include "chirality_lab/simd_kernels.hpp"
#include "json.hpp"

namespace chirality_lab {

namespace {

double hypot_all(std::initializer_list<double> xs) {
    double s = 0.0;
    for (double x : xs) s += x * x;
    return std::sqrt(s);
}

GrowingReal zero_growing(const Grid2& g) { return {RealField(g), RealField(g), RealField(g)}; }
GrowingComplex zero_growing_c(const Grid2& g) { return {ComplexField(g), ComplexField(g), ComplexField(g)}; }
GrowingQuat zero_growing_q(const Grid2& g) { return {QuatField(g), QuatField(g), QuatField(g)}; }

GrowingVector partial(const GrowingVector& u, int axis) {
    GrowingVector out;
    for (const auto& c : u) out.push_back(axis == 1 ? d1(c) : d2(c));
    return out;
}

GrowingComplex times(const ComplexField& w, const GrowingComplex& a) {
    return a.map([&](const ComplexField& x) { return w * x; });
}

GrowingComplex conj_g(const GrowingComplex& a) {
    return a.map([](const ComplexField& x) { return conj(x); });
}

GrowingComplex scale_g(const GrowingComplex& a, cplx s) {
    return a.map([s](const ComplexField& x) { return scaled(x, s); });
}

RealMatrixField entrywise_derivative(const RealMatrixField& M, int axis) {
    RealMatrixField out(M.grid, M.rows, M.cols);
    for (std::size_t k = 0; k < M.entries.size(); ++k) out.entries[k] = axis == 1 ? d1(M.entries[k]) : d2(M.entries[k]);
    return out;
}

RealMatrixField s0_field(const Grid2& g, int n, int m) { return constant_matrix_field(g, n, n, s0_matrix(n, m)); }

// Closest involution with the given number of +1 eigenvalues to the grid mean of S.
Eigen::MatrixXd mean_involution(const RealMatrixField& S, int m) {
    const int n = S.rows;
    Eigen::MatrixXd M(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) M(a, b) = field_mean(S(a, b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    Eigen::VectorXd sign(n);
    for (int k = 0; k < n; ++k) sign(k) = k < n - m ? -1.0 : 1.0;
    return es.eigenvectors() * sign.asDiagonal() * es.eigenvectors().transpose();
}

// Periodic corrector w with div(S (A + grad w)) = 0, preconditioned by a constant involution.
std::vector<RealField> solve_corrector(const RealMatrixField& S, int m, const GrowingVector& linear, double tol,
                                       int max_iter, double& residual, int& iterations) {
    const Grid2& g = S.grid;
    const int n = S.rows;
    const Eigen::MatrixXd P = mean_involution(S, m);
    std::vector<RealField> w(n, RealField(g));
    auto current = [&]() {
        GrowingVector u = linear;
        for (int i = 0; i < n; ++i) u[i] = u[i] + periodic(w[i]);
        return u;
    };
    double r0 = -1.0, previous = -1.0;
    for (iterations = 0; iterations <= max_iter; ++iterations) {
        const GrowingVector r = div_s_grad(S, current());
        std::vector<RealField> rr;
        for (const auto& c : r) rr.push_back(c.base);
        residual = l2(rr);
        if (r0 < 0) r0 = residual;
        if (!std::isfinite(residual) || residual > 1e6 * std::max(1.0, r0))
            throw std::runtime_error("manufacture_solution: corrector iteration diverged; reduce the frame amplitude");
        if (residual <= tol * std::max(1.0, r0) || iterations == max_iter) break;
        // Stagnation at the rounding floor.
        if (previous > 0.0 && residual >= previous && residual <= 1e-10 * std::max(1.0, r0)) break;
        previous = residual;
        std::vector<RealField> z;
        for (const auto& c : rr) z.push_back(inv_laplacian(c));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (P(i, j) != 0.0) w[i] = w[i] - scaled(z[j], P(i, j));
    }
    return w;
}

std::string growing_blob(const GrowingReal& a) {
    const std::size_t bytes = a.base.size() * sizeof(double);
    std::string out;
    for (const RealField* f : {&a.slope1, &a.slope2, &a.base})
        out.append(reinterpret_cast<const char*>(f->values.data()), bytes);
    return out;
}

}  // namespace

GrowingVector act(const RealMatrixField& M, const GrowingVector& u) {
    GrowingVector out;
    for (int i = 0; i < M.rows; ++i) {
        GrowingReal acc = zero_growing(M.grid);
        for (int j = 0; j < M.cols; ++j) acc = acc + u[j].map([&](const RealField& x) { return M(i, j) * x; });
        out.push_back(std::move(acc));
    }
    return out;
}

GrowingComplexVector act(const RealMatrixField& M, const GrowingComplexVector& f) {
    GrowingComplexVector out;
    for (int i = 0; i < M.rows; ++i) {
        GrowingComplex acc = zero_growing_c(M.grid);
        for (int j = 0; j < M.cols; ++j) acc = acc + times(to_complex(M(i, j)), f[j]);
        out.push_back(std::move(acc));
    }
    return out;
}

GrowingComplexVector act(const ComplexMatrixField& M, const GrowingComplexVector& f) {
    GrowingComplexVector out;
    for (int i = 0; i < M.rows; ++i) {
        GrowingComplex acc = zero_growing_c(M.grid);
        for (int j = 0; j < M.cols; ++j) acc = acc + times(M(i, j), f[j]);
        out.push_back(std::move(acc));
    }
    return out;
}

GrowingComplexVector complexify(const GrowingVector& re, const GrowingVector& im) {
    GrowingComplexVector out;
    for (std::size_t i = 0; i < re.size(); ++i)
        out.push_back({make_complex(re[i].slope1, im[i].slope1), make_complex(re[i].slope2, im[i].slope2),
                       make_complex(re[i].base, im[i].base)});
    return out;
}

GrowingComplexVector conj(const GrowingComplexVector& f) {
    GrowingComplexVector out;
    for (const auto& c : f) out.push_back(conj_g(c));
    return out;
}

GrowingVector linear_potential(const Grid2& g, const std::vector<double>& slope1, const std::vector<double>& slope2) {
    GrowingVector out;
    for (std::size_t i = 0; i < slope1.size(); ++i) out.push_back({RealField(g, slope1[i]), RealField(g, slope2[i]), RealField(g)});
    return out;
}

GrowingVector div_s_grad(const RealMatrixField& S, const GrowingVector& u) {
    const GrowingVector g1 = act(S, partial(u, 1)), g2 = act(S, partial(u, 2));
    GrowingVector out;
    for (std::size_t i = 0; i < g1.size(); ++i) out.push_back(d1(g1[i]) + d2(g2[i]));
    return out;
}

ConjugatePotential conjugate_potential(const RealMatrixField& S, const GrowingVector& u, double tolerance) {
    const GrowingVector g1 = act(S, partial(u, 1)), g2 = act(S, partial(u, 2));
    const Grid2& g = S.grid;
    double scale = 0.0, slope = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        slope = std::max({slope, growth(g1[i]), growth(g2[i])});
        scale = std::max({scale, max_abs(g1[i].base), max_abs(g2[i].base)});
    }
    if (slope > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("conjugate_potential: grad u must be periodic");
    ConjugatePotential out;
    double res = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const RealField& a1 = g1[i].base;
        const RealField& a2 = g2[i].base;
        GrowingReal v{RealField(g, field_mean(a2)), RealField(g, -field_mean(a1)), inv_laplacian(curl({a1, a2}))};
        const double e1 = l2(-d2(v).base - a1), e2 = l2(d1(v).base - a2);
        // Slopes of d_l v are zero by construction; compare the periodic parts.
        res += e1 * e1 + e2 * e2;
        out.v.push_back(std::move(v));
    }
    out.residual = std::sqrt(res);
    std::vector<RealField> dv;
    for (const auto& c : div_s_grad(S, u)) dv.push_back(evaluate(c));
    out.div_residual = l2(dv);
    out.consistent = out.div_residual <= tolerance * std::max(1.0, scale);
    return out;
}

HoloSplit holo_split_residual(const ChiralityField& S, const GrowingComplexVector& f) {
    const Projections p = projections(S);
    GrowingComplexVector dz, dzb;
    for (const auto& c : f) {
        dz.push_back(d_z(c));
        dzb.push_back(d_zbar(c));
    }
    return {l2(act(p.left, dz)), l2(act(p.right, dzb))};
}

HoloSplit holo_split_residual(const ChiralitySystem& sys) {
    if (sys.f_form != FForm::sum) return holo_split_residual(sys.chirality, complexify(sys.u, sys.v));
    return holo_split_residual(sys.chirality, sys.f);
}

PlanarTransform n2_transform(const RealField& angle, const GrowingVector& u, const GrowingVector& v) {
    if (u.size() != 2 || v.size() != 2) throw std::invalid_argument("n2_transform: two components required");
    const Grid2& g = angle.grid;
    const RealMatrixField Q = rotation_field(angle);
    const GrowingVector fre = act(matmul(s0_field(g, 2, 1), Q), u);
    const GrowingVector fim = act(Q, v);
    PlanarTransform out;
    out.f = complexify(fre, fim);
    const ComplexField w = d_z(angle);
    const GrowingComplex r1 = d_z(out.f[0]) - times(w, conj_g(out.f[1]));
    const GrowingComplex r2 = d_z(out.f[1]) + times(w, conj_g(out.f[0]));
    out.residual = hypot_all({l2(r1), l2(r2)});

    // Real form: J = [[0,-1],[1,0]] and R = -J, with a = d1 angle, b = d2 angle.
    const RealField a = d1(angle), b = d2(angle);
    auto J = [](const GrowingVector& x) { return GrowingVector{x[1].map([](const RealField& f) { return -f; }), x[0]}; };
    auto R = [](const GrowingVector& x) { return GrowingVector{x[1], x[0].map([](const RealField& f) { return -f; })}; };
    auto weight = [](const RealField& c, const GrowingVector& x) {
        GrowingVector o;
        for (const auto& e : x) o.push_back(e.map([&](const RealField& f) { return c * f; }));
        return o;
    };
    auto add = [](const GrowingVector& x, const GrowingVector& y) {
        GrowingVector o;
        for (std::size_t i = 0; i < x.size(); ++i) o.push_back(x[i] + y[i]);
        return o;
    };
    auto sub = [](const GrowingVector& x, const GrowingVector& y) {
        GrowingVector o;
        for (std::size_t i = 0; i < x.size(); ++i) o.push_back(x[i] - y[i]);
        return o;
    };
    const GrowingVector re1 = partial(fre, 1), re2 = partial(fre, 2), im1 = partial(fim, 1), im2 = partial(fim, 2);
    const GrowingVector line1 = sub(add(re1, im2), add(R(weight(a, fre)), J(weight(b, fim))));
    const GrowingVector line2 = sub(sub(im1, re2), add(J(weight(b, fre)), J(weight(a, fim))));
    out.real_form_residual = hypot_all({l2(line1), l2(line2)});

    // (d1 fre + d2 fim) - i (d2 fre - d1 fim) against R (a - i b)(fre - i fim).
    const ComplexField ab = make_complex(a, -b);
    const GrowingComplexVector lhs = complexify(add(re1, im2), sub(im1, re2));
    const GrowingComplexVector fbar = conj(out.f);
    const GrowingComplex c1 = lhs[0] - times(ab, fbar[1]);
    const GrowingComplex c2 = lhs[1] + times(ab, fbar[0]);
    out.combined_residual = hypot_all({l2(c1), l2(c2)});
    return out;
}

PotentialPair omega_pm(const RealMatrixField& Qf, int m) {
    const Grid2& g = Qf.grid;
    const int n = Qf.rows;
    const RealMatrixField S0 = s0_field(g, n, m);
    const RealMatrixField Qt = transpose(Qf);
    const RealMatrixField dQ1 = entrywise_derivative(Qf, 1), dQ2 = entrywise_derivative(Qf, 2);
    PotentialPair p;
    p.omega1 = matmul(dQ1, Qt);
    p.omega2 = matmul(dQ2, Qt);
    const RealMatrixField t1 = matmul(S0, matmul(p.omega1, S0)), t2 = matmul(S0, matmul(p.omega2, S0));
    p.omega_plus = ComplexMatrixField(g, n, n);
    p.omega_minus = ComplexMatrixField(g, n, n);
    const auto sign = s0_matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            p.omega_plus(i, j) = scaled(make_complex(t1(i, j) + p.omega1(i, j), -(t2(i, j) + p.omega2(i, j))), 0.5);
            p.omega_minus(i, j) = scaled(make_complex(t1(i, j) - p.omega1(i, j), -(t2(i, j) - p.omega2(i, j))), 0.5);
            const bool same_block = (i < m) == (j < m);
            p.block_violation = std::max(p.block_violation, max_abs(same_block ? p.omega_minus(i, j) : p.omega_plus(i, j)));
            p.antisymmetry = std::max({p.antisymmetry, max_abs(p.omega1(i, j) + p.omega1(j, i)),
                                       max_abs(p.omega2(i, j) + p.omega2(j, i))});

            RealField jac(g);
            for (int k = 0; k < n; ++k) jac = jac + dQ1(i, k) * dQ2(j, k) - dQ2(i, k) * dQ1(j, k);
            const double sisj = sign[i * n + i] * sign[j * n + j];
            for (int which = 0; which < 2; ++which) {
                const ComplexField& w = which == 0 ? p.omega_plus(i, j) : p.omega_minus(i, j);
                const RealField lhs = d2(real_part(w)) + d1(imag_part(w));
                const double c = which == 0 ? 0.5 * (1.0 + sisj) : 0.5 * (sisj - 1.0);
                p.jacobian_certificate = std::max(p.jacobian_certificate, max_abs(lhs - scaled(jac, c)));
            }
        }
    return p;
}

FrameTransform frame_transform(const RealMatrixField& Qf, int m, const GrowingVector& u, const GrowingVector& v) {
    const int n = Qf.rows;
    FrameTransform out;
    out.f = complexify(act(matmul(s0_field(Qf.grid, n, m), Qf), u), act(Qf, v));
    const PotentialPair p = omega_pm(Qf, m);
    const GrowingComplexVector a = act(p.omega_plus, out.f), b = act(p.omega_minus, conj(out.f));
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = l2(d_z(out.f[i]) - scale_g(a[i] + b[i], 0.5));
        s += r * r;
    }
    out.residual = std::sqrt(s);
    return out;
}

GrowingQuat quaternionize(const GrowingComplexVector& f) {
    if (f.size() != 2) throw std::invalid_argument("quaternionize: two components required");
    return {quat_from_pair(f[0].slope1, f[1].slope1), quat_from_pair(f[0].slope2, f[1].slope2),
            quat_from_pair(f[0].base, f[1].base)};
}

double quaternion_residual(const GrowingQuat& F, const RealField& angle) {
    const Grid2& g = angle.grid;
    const QuatField wj = quat_mul(quat_from_pair(d_z(angle), ComplexField(g)), Quaternion::unit_j());
    const GrowingQuat rhs = F.map([&](const QuatField& x) { return quat_mul(wj, x); });
    return l2(evaluate(d_L(F) + rhs));
}

double split_system_residual(const GrowingComplexVector& f, const RealField& angle) {
    const ComplexField w = d_z(angle);
    const GrowingComplex r1 = d_z(f[0]) - times(w, conj_g(f[1]));
    const GrowingComplex r2 = d_z(f[1]) + times(w, conj_g(f[0]));
    return hypot_all({l2(r1), l2(r2)});
}

DiracResidual dirac_residual(const ComplexField& psi1, const ComplexField& psi2, const ComplexField& U) {
    require_same_grid(psi1.grid, U.grid);
    require_same_grid(psi2.grid, U.grid);
    DiracResidual out;
    const ComplexField top = d_z(psi2) - U * psi1;
    const ComplexField bottom = -d_zbar(psi1) - conj(U) * psi2;
    out.residual = hypot_all({l2(top), l2(bottom)});
    out.hypothesis = l2(imag_part(d_zbar(U)));
    return out;
}

DiracResidual dirac_residual(const GrowingComplex& psi1, const GrowingComplex& psi2, const ComplexField& U) {
    require_same_grid(psi1.base.grid, U.grid);
    require_same_grid(psi2.base.grid, U.grid);
    DiracResidual out;
    const GrowingComplex top = d_z(psi2) - times(U, psi1);
    const GrowingComplex bottom = d_zbar(psi1) + times(conj(U), psi2);
    out.residual = hypot_all({l2(top), l2(bottom)});
    out.hypothesis = l2(imag_part(d_zbar(U)));
    return out;
}

QuatMatrixField matmul(const QuatMatrixField& a, const QuatMatrixField& b) {
    if (a.dim != b.dim) throw std::invalid_argument("matmul: dimension mismatch");
    QuatMatrixField out(a.grid, a.dim);
    const auto& kernels = simd::active_kernels();
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            auto& r = out(i, j).comp;
            double* pr[4] = {r[0].data(), r[1].data(), r[2].data(), r[3].data()};
            for (int k = 0; k < a.dim; ++k) {
                const auto& x = a(i, k).comp;
                const auto& y = b(k, j).comp;
                const double* px[4] = {x[0].data(), x[1].data(), x[2].data(), x[3].data()};
                const double* py[4] = {y[0].data(), y[1].data(), y[2].data(), y[3].data()};
                kernels.quat_mul_add(px, py, pr, a.grid.size());
            }
        }
    return out;
}

QuatMatrixField commutator(const QuatMatrixField& a, const QuatMatrixField& b) {
    const QuatMatrixField ab = matmul(a, b), ba = matmul(b, a);
    QuatMatrixField out(a.grid, a.dim);
    for (std::size_t k = 0; k < out.entries.size(); ++k) out.entries[k] = quat_sub(ab.entries[k], ba.entries[k]);
    return out;
}

double anti_self_duality(const QuatMatrixField& M) {
    double worst = 0.0;
    for (int i = 0; i < M.dim; ++i)
        for (int j = 0; j < M.dim; ++j) {
            const QuatField s = quat_add(quat_conj(M(j, i)), M(i, j));
            for (const auto& c : s.comp)
                for (double x : c) worst = std::max(worst, std::abs(x));
        }
    return worst;
}

std::vector<GrowingQuat> act(const QuatMatrixField& M, const std::vector<GrowingQuat>& G) {
    std::vector<GrowingQuat> out;
    for (int i = 0; i < M.dim; ++i) {
        GrowingQuat acc = zero_growing_q(M.grid);
        for (int j = 0; j < M.dim; ++j) acc = acc + G[j].map([&](const QuatField& x) { return quat_mul(M(i, j), x); });
        out.push_back(std::move(acc));
    }
    return out;
}

DoubledSystem double_system(const std::vector<GrowingQuat>& g, const ComplexMatrixField& A, const ComplexMatrixField& B) {
    const int n = B.rows;
    const Grid2& grid = B.grid;
    double asym = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) asym = std::max(asym, max_abs(B(i, j) + B(j, i)));
    if (asym > 1e-12) throw std::invalid_argument("double_system: B must be antisymmetric (|B + B^T| = " + std::to_string(asym) + ")");
    const Quaternion jq = Quaternion::unit_j();
    const ComplexField zero(grid);

    DoubledSystem out;
    for (const auto& c : g) out.G.push_back(c);
    for (const auto& c : g) out.G.push_back(c.map([&](const QuatField& x) { return quat_mul(x, jq); }));
    out.Gamma = QuatMatrixField(grid, 2 * n);
    out.Gamma1 = QuatMatrixField(grid, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.Gamma(i, n + j) = quat_from_pair(zero, -B(i, j));  // -B_ij j
            out.Gamma(n + i, j) = quat_from_pair(zero, B(i, j));   //  B_ij j
            out.Gamma1(i, j) = quat_from_pair(A(i, j), zero);
            out.Gamma1(n + i, n + j) = quat_from_pair(A(i, j), zero);
        }
    out.structure_certificate = anti_self_duality(out.Gamma);

    const auto gG = act(out.Gamma, out.G), g1G = act(out.Gamma1, out.G);
    double res = 0.0;
    for (int k = 0; k < 2 * n; ++k) {
        const double r = l2(evaluate(d_L(out.G[k]) - gG[k] - g1G[k]));
        res += r * r;
    }
    out.residual = std::sqrt(res);

    // A g - B j g j and A g j + B j g, row by row.
    double steps = 0.0;
    for (int i = 0; i < n; ++i) {
        GrowingQuat top = zero_growing_q(grid), bottom = zero_growing_q(grid);
        for (int j = 0; j < n; ++j) {
            const QuatField a = quat_from_pair(A(i, j), zero), bj = quat_mul(quat_from_pair(B(i, j), zero), jq);
            top = top + g[j].map([&](const QuatField& x) { return quat_sub(quat_mul(a, x), quat_mul(quat_mul(bj, x), jq)); });
            bottom = bottom + g[j].map([&](const QuatField& x) { return quat_add(quat_mul(a, quat_mul(x, jq)), quat_mul(bj, x)); });
        }
        const double r1 = l2(evaluate(top - gG[i] - g1G[i])), r2 = l2(evaluate(bottom - gG[n + i] - g1G[n + i]));
        steps += r1 * r1 + r2 * r2;
    }
    out.steps_residual = std::sqrt(steps);
    return out;
}

EnergyIdentity energy_identity(const ChiralityField& S, const GrowingVector& u) {
    const Projections p = projections(S);
    EnergyIdentity e;
    const double cell = S.grid().cell_measure();
    for (int axis = 1; axis <= 2; ++axis) {
        const GrowingVector du = partial(u, axis);
        const GrowingVector pr = act(p.right, du), pl = act(p.left, du), sdu = act(S.S, du);
        for (std::size_t i = 0; i < du.size(); ++i) {
            const RealField a = evaluate(pr[i]), b = evaluate(pl[i]), c = evaluate(du[i]), d = evaluate(sdu[i]);
            for (std::size_t k = 0; k < a.size(); ++k) {
                e.projector_form += (a[k] * a[k] - b[k] * b[k]) * cell;
                e.metric_form -= c[k] * d[k] * cell;
            }
        }
    }
    e.difference = std::abs(e.projector_form - e.metric_form);
    return e;
}

double rewritten_equation_residual(const RealMatrixField& S, const GrowingVector& u) {
    const GrowingVector w = act(S, u);
    const GrowingVector sw = act(S, w);
    const GrowingVector t1 = act(entrywise_derivative(S, 1), sw), t2 = act(entrywise_derivative(S, 2), sw);
    std::vector<RealField> diff;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const GrowingReal lap = d1(d1(w[i])) + d2(d2(w[i]));
        diff.push_back(evaluate(lap - d1(t1[i]) - d2(t2[i])));
    }
    return l2(diff);
}

ChiralitySystem manufacture_solution(const std::string& mode, const ManufactureParams& params) {
    if (mode != "constant_S" && mode != "conjugated_harmonic" && mode != "adapted_frame")
        throw std::invalid_argument("manufacture_solution: unknown mode '" + mode + "'");
    const Grid2 g(params.grid_n);
    Rng rng(params.seed);
    int n = params.dim, m = params.plus_count;
    if (mode == "adapted_frame") n = 2, m = 1;
    s0_matrix(n, m);

    std::vector<double> a1(n), a2(n);
    for (int i = 0; i < n; ++i) a1[i] = rng.normal(), a2[i] = rng.normal();

    ChiralitySystem sys;
    sys.mode = mode;
    RealMatrixField Qf;
    if (mode == "constant_S") {
        Qf = identity_field(g, n);
    } else if (mode == "conjugated_harmonic") {
        Qf = random_rotation_field(g, n, rng, params.max_mode, params.amplitude);
    } else {
        RealField angle = random_band_limited(g, rng, params.max_mode);
        const Vec2Field ga = grad(angle);
        angle = scaled(angle, params.angle_gradient / l2(std::vector<RealField>{ga.x1, ga.x2}));
        Qf = rotation_field(angle);
        sys.angle = angle;
    }
    sys.chirality = make_chirality(transpose(Qf), m);
    sys.frame = Qf;

    const GrowingVector linear = linear_potential(g, a1, a2);
    sys.u = linear;
    if (mode != "constant_S") {
        const auto w = solve_corrector(sys.chirality.S, m, linear, params.tolerance, params.max_iterations,
                                       sys.corrector_residual, sys.corrector_iterations);
        for (int i = 0; i < n; ++i) sys.u[i] = sys.u[i] + periodic(w[i]);
    }
    sys.v = conjugate_potential(sys.chirality.S, sys.u).v;
    if (mode == "adapted_frame") {
        sys.f = n2_transform(*sys.angle, sys.u, sys.v).f;
        sys.f_form = FForm::frame;
        sys.frak_f = quaternionize(sys.f);
    } else {
        sys.f = complexify(sys.u, sys.v);
        sys.f_form = FForm::sum;
    }
    return sys;
}

void save_system(const ChiralitySystem& sys, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_chirality(sys.chirality, (fs::path(dir) / "chirality").string());
    nlohmann::ordered_json man;
    man["mode"] = sys.mode;
    man["f_form"] = sys.f_form == FForm::sum ? "u+iv" : "S0 Qf u + i Qf v";
    man["n"] = sys.chirality.n();
    man["m"] = sys.chirality.m;
    man["grid_n"] = sys.chirality.grid().n;
    man["length"] = sys.chirality.grid().length;
    man["layout"] = "per component: slope1, slope2, base; value = x1*slope1 + x2*slope2 + base";
    man["corrector_residual"] = sys.corrector_residual;
    auto files = nlohmann::ordered_json::array();
    files.push_back("chirality.json");
    files.push_back("chirality.bin");
    for (std::size_t i = 0; i < sys.u.size(); ++i) {
        const std::string un = "u" + std::to_string(i) + ".bin", vn = "v" + std::to_string(i) + ".bin";
        atomic_write((fs::path(dir) / un).string(), growing_blob(sys.u[i]));
        atomic_write((fs::path(dir) / vn).string(), growing_blob(sys.v[i]));
        files.push_back(un);
        files.push_back(vn);
    }
    man["files"] = files;
    atomic_write((fs::path(dir) / "manifest.json").string(), man.dump(2) + "\n");
}

}  // namespace chirality_lab
