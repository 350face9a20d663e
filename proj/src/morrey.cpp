#include "chirality_lab/morrey.hpp"

#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "chirality_lab/spectral.hpp"

namespace chirality_lab {

namespace {

// Factorized negative five-point Laplacian on the nodes inside one ball.
class BallLaplacian {
public:
    BallLaplacian(const Grid2& g, const Ball& ball) : grid_(g), nodes_(ball_indices(g, ball)) {
        const int n = g.n;
        std::vector<int> slot(g.size(), -1);
        for (std::size_t k = 0; k < nodes_.size(); ++k) slot[nodes_[k]] = static_cast<int>(k);
        const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
        std::vector<Eigen::Triplet<double>> t;
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            const int p = static_cast<int>(nodes_[k] / n), q = static_cast<int>(nodes_[k] % n);
            t.emplace_back(k, k, 4.0 * inv_h2);
            const int nb[4][2] = {{p + 1, q}, {p - 1, q}, {p, q + 1}, {p, q - 1}};
            for (const auto& c : nb) {
                const int s = slot[g.index((c[0] + n) % n, (c[1] + n) % n)];
                if (s >= 0) t.emplace_back(k, s, -inv_h2);
            }
        }
        Eigen::SparseMatrix<double> m(nodes_.size(), nodes_.size());
        m.setFromTriplets(t.begin(), t.end());
        solver_.compute(m);
        if (solver_.info() != Eigen::Success) throw std::runtime_error("ball Laplacian factorization failed");
    }

    RealField solve(const RealField& rhs) const {
        Eigen::VectorXd b(nodes_.size());
        for (std::size_t k = 0; k < nodes_.size(); ++k) b[k] = -rhs[nodes_[k]];
        const Eigen::VectorXd x = solver_.solve(b);
        RealField u(grid_);
        for (std::size_t k = 0; k < nodes_.size(); ++k) u[nodes_[k]] = x[k];
        return u;
    }

private:
    Grid2 grid_;
    std::vector<std::size_t> nodes_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

RealField component(const QuatField& q, int c) {
    RealField f(q.grid);
    f.values = q.comp[c];
    return f;
}

double weak_norm(const std::vector<RealField>& parts, const Ball& b) {
    return lorentz_weak_l2(pointwise_abs(parts), b);
}

}  // namespace

RealField dirichlet_poisson_ball(const RealField& rhs, const Ball& ball) { return BallLaplacian(rhs.grid, ball).solve(rhs); }

std::vector<RealField> central_gradient(const RealField& f) {
    const Grid2& g = f.grid;
    const int n = g.n;
    const double inv = 0.5 / g.spacing();
    RealField a(g), b(g);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            a(p, q) = (f((p + 1) % n, q) - f((p + n - 1) % n, q)) * inv;
            b(p, q) = (f(p, (q + 1) % n) - f(p, (q + n - 1) % n)) * inv;
        }
    }
    return {a, b};
}

double harmonic_decay_ratio(const std::vector<RealField>& components, const Ball& ball, double shrink) {
    const Ball inner{ball.center_x1, ball.center_x2, shrink * ball.radius};
    const Ball reference{ball.center_x1, ball.center_x2, 0.75 * ball.radius};
    const double den = weak_norm(components, reference);
    return den > 0.0 ? weak_norm(components, inner) / den : 0.0;
}

std::vector<double> dyadic_radii(const Grid2& g, double shrink) {
    std::vector<double> r;
    for (double x = g.length / 4.0; x * shrink >= 2.0 * g.spacing() - 1e-12; x *= shrink) r.push_back(x);
    return r;
}

MorreyStudy morrey_study(const QuatField& P, const GrowingQuat& f, double center_x1, double center_x2,
                         const std::vector<double>& radii, double shrink) {
    if (!(shrink > 0.0 && shrink < 0.75)) throw std::invalid_argument("shrink factor must lie in (0, 3/4)");
    const Grid2& g = P.grid;
    const QuatField F = evaluate(f), dF1 = evaluate(d1(f)), dF2 = evaluate(d2(f));
    const QuatField iF = left_i(F);
    const QuatField dP1 = d1(P), dP2 = d2(P);
    const QuatField PF = quat_mul(P, F), PiF = quat_mul(P, iF);
    const QuatField d1PF = quat_add(quat_mul(dP1, F), quat_mul(P, dF1));
    const QuatField d2PF = quat_add(quat_mul(dP2, F), quat_mul(P, dF2));
    const QuatField d1PiF = quat_add(quat_mul(dP1, iF), quat_mul(P, left_i(dF1)));
    const QuatField d2PiF = quat_add(quat_mul(dP2, iF), quat_mul(P, left_i(dF2)));
    const QuatField source_a = quat_sub(d1PF, d2PiF);
    const QuatField source_b = quat_scale(quat_add(d1PiF, d2PF), -1.0);
    const RealField f_abs = quat_abs(F);

    MorreyStudy study;
    study.shrink = shrink;
    for (double r : radii) {
        if (r > g.length / 4.0 + 1e-12) throw std::invalid_argument("radius exceeds a quarter of the cell");
        const Ball ball{center_x1, center_x2, r};
        const Ball inner{center_x1, center_x2, shrink * r};
        const BallLaplacian lap(g, ball);
        std::vector<RealField> grad_a, grad_b, grad_wente, grad_harmonic;
        for (int c = 0; c < 4; ++c) {
            const auto ga = central_gradient(lap.solve(component(source_a, c)));
            const RealField gb1 = component(PiF, c) * RealField(g, -1.0) - ga[1];
            const RealField gb2 = ga[0] - component(PF, c);
            const auto gw = central_gradient(lap.solve(component(source_b, c)));
            grad_a.insert(grad_a.end(), ga.begin(), ga.end());
            grad_b.push_back(gb1);
            grad_b.push_back(gb2);
            grad_wente.insert(grad_wente.end(), gw.begin(), gw.end());
            grad_harmonic.push_back(gb1 - gw[0]);
            grad_harmonic.push_back(gb2 - gw[1]);
        }
        MorreyStep s;
        s.radius = r;
        s.f_weak = lorentz_weak_l2(f_abs, ball);
        s.f_weak_inner = lorentz_weak_l2(f_abs, inner);
        s.grad_a = weak_norm(grad_a, ball);
        s.grad_b = weak_norm(grad_b, ball);
        s.grad_a_inner = weak_norm(grad_a, inner);
        s.grad_b_inner = weak_norm(grad_b, inner);
        s.grad_wente = weak_norm(grad_wente, ball);
        s.harmonic_ratio = harmonic_decay_ratio(grad_harmonic, ball, shrink);
        if (s.f_weak > 0.0) {
            s.gamma = (s.grad_a_inner + s.grad_b_inner) / (std::numbers::sqrt2 * s.f_weak);
            s.direct_ratio = s.f_weak_inner / s.f_weak;
            s.a_ratio = s.grad_a / s.f_weak;
        }
        study.gamma = std::max(study.gamma, s.gamma);
        study.steps.push_back(s);
    }
    if (!study.steps.empty()) study.harmonic_ratio = study.steps.back().harmonic_ratio;
    study.decay_exponent = std::numeric_limits<double>::quiet_NaN();
    if (radii.size() >= 4) study.decay_exponent = morrey_profile(f_abs, center_x1, center_x2, radii).alpha;
    return study;
}

}  // namespace chirality_lab
