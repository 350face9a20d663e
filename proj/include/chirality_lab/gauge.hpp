#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chirality_lab/systems.hpp"

namespace chirality_lab {

// Gauge fields are hyper-unitary quaternion matrix fields P (conj(P)^T P = I); the unit
// quaternion case is dim = 1. Algebra fields U are anti-self-dual (conj(U)^T = -U).

class NotUnitary : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Image pair: omega carries the real and i components of every entry, g the j and k components.
struct GaugeImage {
    QuatMatrixField omega;
    QuatMatrixField g;
};
GaugeImage operator+(const GaugeImage& a, const GaugeImage& b);
GaugeImage operator-(const GaugeImage& a, const GaugeImage& b);
GaugeImage scaled(const GaugeImage& a, double s);
GaugeImage zero_image(const Grid2& grid, int dim);

struct ImageNorm {
    double omega = 0.0;       // homogeneous W^{-1,2} of the mean-free part plus L2 of the mean
    double omega_mean = 0.0;  // largest |mean| over entries and components
    double g = 0.0;           // L2
    double g_mean = 0.0;      // largest |mean| of a j or k component
    double total() const { return omega + g; }
};
ImageNorm image_norm(const GaugeImage& a);

QuatMatrixField quat_matrix_identity(const Grid2& grid, int dim);
QuatMatrixField as_matrix(const QuatField& q);
QuatMatrixField adjoint(const QuatMatrixField& M);
QuatMatrixField keep_one_i(const QuatMatrixField& M);  // real and i components
QuatMatrixField keep_jk(const QuatMatrixField& M);     // j and k components
QuatMatrixField times_i(const QuatMatrixField& M);     // every entry multiplied by i on the right
double unitarity_defect(const QuatMatrixField& P);     // max |conj(P)^T P - I|
double grad_l2(const QuatMatrixField& P);              // ||grad P||_2 over all entries
// Pointwise exponential of an algebra field.
QuatMatrixField hyper_exp(const QuatMatrixField& U);

struct LeftLogDerivative {
    QuatMatrixField a1;  // P^{-1} d1 P
    QuatMatrixField a2;  // P^{-1} d2 P
};
LeftLogDerivative left_log_derivative(const QuatMatrixField& P);

// (Pi_1i(d1 A1 + d2 A2), Pi_jk(A1 - A2 i)) with A = P^{-1} grad P. Throws NotUnitary above 1e-10.
GaugeImage N_apply(const QuatMatrixField& P);
GaugeImage N_apply(const QuatField& q);

// Linearization at the identity: (Pi_1i Laplace U, Pi_jk(d1 U - d2 U i)).
GaugeImage L1_apply(const QuatMatrixField& U);
// Mean-free algebra field U with L1_apply(U) equal to the mean-free part of rhs.
QuatMatrixField L1_solve(const GaugeImage& rhs);

// Linearization at P along P exp(tU): A_l is replaced by A_l + d_l U + [A_l, U].
GaugeImage Lq_apply(const QuatMatrixField& P, const QuatMatrixField& U);

struct LqConfig {
    int max_iterations = 200;
    double tolerance = 1e-13;  // relative to the mean-free norm of rhs
};

struct LqSolveResult {
    QuatMatrixField U;
    int iterations = 0;
    double contraction = 0.0;
    double residual = 0.0;     // mean-free part of Lq_apply(P, U) - rhs, relative
    double mean_gap = 0.0;     // largest jk mean of Lq_apply(P, U) - rhs
};

class GaugeDivergence : public std::runtime_error {
public:
    GaugeDivergence(const std::string& what, double contraction_factor, int iterations_done)
        : std::runtime_error(what), contraction(contraction_factor), iterations(iterations_done) {}
    double contraction;
    int iterations;
};

// Preconditioned iteration U <- L1^{-1}(rhs - (Lq - L1) U) on the mean-free equations. On the torus
// the jk means of Lq U are fixed by its mean-free part; mean_gap reports the incompatible remainder.
// Throws GaugeDivergence when the iteration grows or stalls; contraction is the largest ratio of
// successive update norms.
LqSolveResult Lq_solve(const QuatMatrixField& P, const GaugeImage& rhs, const LqConfig& config = {});

struct GaugeConfig {
    double eps0 = 0.1;          // smallness bound on the target
    double tolerance = 1e-8;    // image residual (omega + g norms)
    double dt = 1.0 / 16.0;
    double min_dt = 1e-4;
    int newton_max = 12;
    LqConfig lq{60, 1e-12};
};

struct GaugeResult {
    QuatMatrixField P;
    double residual = 0.0;
    ImageNorm residual_parts;
    double theta_measured = 0.0;   // ||grad P||_2 / ||target||
    int continuation_steps = 0;
    int newton_steps = 0;
    double t_reached = 0.0;
    double unitarity = 0.0;
    double algebra_defect = 0.0;   // largest anti-self-duality defect of P^{-1} grad P over all iterates
    double omega_mean_gap = 0.0;   // max |mean of the omega residual|

    QuatField q() const;  // dim 1 only
};

class GaugeStall : public std::runtime_error {
public:
    GaugeStall(const std::string& what, GaugeResult best) : std::runtime_error(what), partial(std::move(best)) {}
    GaugeResult partial;
};

// Continuation along t * target with damped Newton steps P <- P exp(lambda U) on the mean-free image.
// Throws std::invalid_argument above eps0 and GaugeStall when the step falls below min_dt.
GaugeResult gauge_solve(const GaugeImage& target, const GaugeConfig& config = {});

struct GaugePotential {
    QuatMatrixField chi;        // real and i components; Pi_1i A1 = -d2 chi + h1, Pi_1i A2 = d1 chi + h2
    QuatMatrixField harmonic1;  // constant parts h1, h2
    QuatMatrixField harmonic2;
    double divergence_violation = 0.0;  // ||Pi_1i div A||_2
    double grad_l21 = 0.0;              // ||grad chi||_{L^{2,1}}
    double grad_gauge_sq = 0.0;         // ||grad P||_2^2
    double bound_ratio = 0.0;           // grad_l21 / grad_gauge_sq
    double curvature_gap = 0.0;         // ||Laplace chi - Pi_1i [A2, A1]||_2 (Jacobian form of the source)
};
GaugePotential gauge_potential(const QuatMatrixField& P);
// i component of the scalar potential.
RealField zeta_field(const GaugePotential& p);

struct ContractionReport {
    double factor = 0.0;             // (||grad A||_{2,inf} + ||grad B||_{2,inf}) / ||P F||_{2,inf}
    double grad_a_weak = 0.0;
    double grad_b_weak = 0.0;
    double gauged_weak = 0.0;        // ||P F||_{2,inf}
    double equation_residual = 0.0;  // ||d1 F - i d2 F + W F|| / ||grad F||
    double hodge_gap = 0.0;          // distance of the actual (PF, -PiF) from mean + grad A + grad_perp B, relative
    bool degenerate = false;         // F vanishes
};

// Equation d1 F - i d2 F = -W F. A solves Laplace A = P((A1 - A2 i) - W)F and B solves
// Laplace B = -P(A1 i + A2 - i W)F, both equation-derived.
ContractionReport contraction_chain(const std::vector<QuatField>& F, const QuatMatrixField& W, const QuatMatrixField& P);
ContractionReport contraction_chain(const QuatField& F, const RealField& angle, const GaugeResult& gauge);

// 2 d_z(angle) j as a 1x1 coefficient, and the matching target (0, W).
QuatMatrixField planar_coefficient(const RealField& angle);
GaugeImage planar_gauge_target(const RealField& angle);

// Smooth bump of the given radius about the centre of the cell times the evaluated field.
std::vector<QuatField> localize(const std::vector<GrowingQuat>& F, double radius);

struct PGaugeResult {
    GaugeResult gauge;
    GaugePotential chi;
    double absorbed_residual = 0.0;  // relative residual of the absorbed identity on G
    double harmonic = 0.0;           // largest harmonic constant
};

// Gauge with target (0, -2 Gamma), the potential chi, and the identity
// d1(PG) - d2(PiG) = 2P(-i d_L chi + Gamma1 + H)G with H = (h1 - h2 i)/2.
PGaugeResult P_gauge_structures(const QuatMatrixField& Gamma, const QuatMatrixField& Gamma1,
                                const std::vector<GrowingQuat>& G, const GaugeConfig& config = {});

struct GaugeExperimentRow {
    double eps = 0.0;
    std::uint64_t seed = 0;
    int grid_n = 0;
    double residual = 0.0;
    double theta = 0.0;
    double contraction_factor = 0.0;
    int steps = 0;
    bool converged = false;
};
// Planar chain: adapted-frame solution with ||grad angle||_2 = eps, gauge, localized contraction.
GaugeExperimentRow gauge_experiment(double eps, std::uint64_t seed, int grid_n, const GaugeConfig& config = {});

}  // namespace chirality_lab
