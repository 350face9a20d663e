#pragma once

#include <vector>

#include "chirality_lab/field.hpp"
#include "chirality_lab/growing.hpp"
#include "chirality_lab/norms.hpp"

namespace chirality_lab {

// Five-point Dirichlet problem on the nodes strictly inside the ball: Laplace_h u = rhs there and
// u = 0 on every other node. Sparse Cholesky.
RealField dirichlet_poisson_ball(const RealField& rhs, const Ball& ball);

// Periodic second-order central differences.
std::vector<RealField> central_gradient(const RealField& f);

// ||g||_{2,inf}(B(c, shrink r)) / ||g||_{2,inf}(B(c, 3r/4)) for a vector field g given by components.
double harmonic_decay_ratio(const std::vector<RealField>& components, const Ball& ball, double shrink);
inline double harmonic_decay_factor(double shrink) { return 4.0 * shrink / 3.0; }

struct MorreyStep {
    double radius = 0.0;
    double f_weak = 0.0;         // ||f||_{2,inf}(B(r))
    double f_weak_inner = 0.0;   // ||f||_{2,inf}(B(shrink r))
    double grad_a = 0.0;         // ||grad A||_{2,inf}(B(r))
    double grad_b = 0.0;
    double grad_a_inner = 0.0;   // on B(shrink r)
    double grad_b_inner = 0.0;
    double grad_wente = 0.0;     // ||grad beta_2||_{2,inf}(B(r))
    double harmonic_ratio = 0.0; // harmonic_decay_ratio of grad beta_1
    double gamma = 0.0;          // (grad_a_inner + grad_b_inner) / (sqrt 2 f_weak)
    double direct_ratio = 0.0;   // f_weak_inner / f_weak
    double a_ratio = 0.0;        // grad_a / f_weak
};

struct MorreyStudy {
    std::vector<MorreyStep> steps;
    double shrink = 0.5;
    double gamma = 0.0;            // largest one-step ratio over the ladder
    double decay_exponent = 0.0;   // fitted slope of log ||f||_{2,inf}(B(r)) against log r
    double harmonic_ratio = 0.0;   // at the smallest radius
};

// Splitting on each ball B(c, r): Laplace A = d1(Pf) - d2(Pif) with A = 0 on the boundary,
// grad B = (-Pif - d2 A, d1 A - Pf), B = beta_1 + beta_2 with beta_2 the Dirichlet solution of
// Laplace beta_2 = -d1(Pif) - d2(Pf). P is a unit quaternion field; f may grow linearly.
// Radii must keep the balls away from the cell boundary.
MorreyStudy morrey_study(const QuatField& P, const GrowingQuat& f, double center_x1, double center_x2,
                         const std::vector<double>& radii, double shrink = 0.5);

// Dyadic ladder from a quarter of the cell while the inner ball keeps a radius of two grid spacings.
std::vector<double> dyadic_radii(const Grid2& g, double shrink = 0.5);

}  // namespace chirality_lab
