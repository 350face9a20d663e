#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chirality_lab/chirality.hpp"
#include "chirality_lab/growing.hpp"

namespace chirality_lab {

using GrowingVector = std::vector<GrowingReal>;
using GrowingComplexVector = std::vector<GrowingComplex>;

// Pointwise matrix actions on growing vectors.
GrowingVector act(const RealMatrixField& M, const GrowingVector& u);
GrowingComplexVector act(const RealMatrixField& M, const GrowingComplexVector& f);
GrowingComplexVector act(const ComplexMatrixField& M, const GrowingComplexVector& f);
GrowingComplexVector complexify(const GrowingVector& re, const GrowingVector& im);
GrowingComplexVector conj(const GrowingComplexVector& f);

// u_i = a1_i x1 + a2_i x2 with constant slopes.
GrowingVector linear_potential(const Grid2& g, const std::vector<double>& slope1, const std::vector<double>& slope2);

// Components of div(S grad u).
GrowingVector div_s_grad(const RealMatrixField& S, const GrowingVector& u);

struct ConjugatePotential {
    GrowingVector v;
    double residual = 0.0;        // ||grad_perp v - S grad u||_2
    double div_residual = 0.0;    // ||div(S grad u)||_2
    bool consistent = false;      // div_residual below the tolerance
};

// v with grad_perp v = S grad u: constant-slope part from the mean of S grad u,
// periodic part inv_laplacian(curl(S grad u)). Requires grad u periodic.
ConjugatePotential conjugate_potential(const RealMatrixField& S, const GrowingVector& u, double tolerance = 1e-10);

enum class FForm { sum, frame };  // f = u + i v, or f = S0 Qf u + i Qf v

struct ChiralitySystem {
    ChiralityField chirality;
    std::optional<RealMatrixField> frame;  // Qf with S = Qf^T S0 Qf
    std::optional<RealField> angle;        // n = 2: Qf = rotation_field(angle)
    GrowingVector u;
    GrowingVector v;
    GrowingComplexVector f;
    FForm f_form = FForm::sum;
    std::optional<GrowingQuat> frak_f;
    std::string mode;
    double corrector_residual = 0.0;
    int corrector_iterations = 0;
};

struct HoloSplit {
    double left = 0.0;   // ||P_L d_z f||_2
    double right = 0.0;  // ||P_R d_zbar f||_2
};
HoloSplit holo_split_residual(const ChiralityField& S, const GrowingComplexVector& f);
HoloSplit holo_split_residual(const ChiralitySystem& sys);

struct PlanarTransform {
    GrowingComplexVector f;   // S0 Q(angle) u + i Q(angle) v
    double residual = 0.0;    // ||d_z f - R d_z(angle) conj f||_2, R = [[0,1],[-1,0]]
    double real_form_residual = 0.0;   // the two real vector equations before complexification
    double combined_residual = 0.0;    // their complex combination (2 d_z f against 2 R d_z(angle) conj f)
};
PlanarTransform n2_transform(const RealField& angle, const GrowingVector& u, const GrowingVector& v);

struct PotentialPair {
    RealMatrixField omega1;  // (d1 Qf) Qf^T
    RealMatrixField omega2;  // (d2 Qf) Qf^T
    ComplexMatrixField omega_plus;
    ComplexMatrixField omega_minus;
    double jacobian_certificate = 0.0;   // max |(d2 Re + d1 Im) Omega - explicit Jacobian sum|
    double block_violation = 0.0;        // max entry outside the expected blocks
    double antisymmetry = 0.0;           // max |Omega^l + (Omega^l)^T|
};
PotentialPair omega_pm(const RealMatrixField& Qf, int m);

struct FrameTransform {
    GrowingComplexVector f;  // S0 Qf u + i Qf v
    double residual = 0.0;   // ||d_z f - Omega+ f / 2 - Omega- conj f / 2||_2
};
FrameTransform frame_transform(const RealMatrixField& Qf, int m, const GrowingVector& u, const GrowingVector& v);

// u1 + v1 i + u2 j + v2 k from f = (u1 + i v1, u2 + i v2).
GrowingQuat quaternionize(const GrowingComplexVector& f);
// ||d_L F + d_z(angle) j F||_2 in quaternion arithmetic.
double quaternion_residual(const GrowingQuat& F, const RealField& angle);
// Aggregated residual of the split complex system, computed with complex arithmetic only.
double split_system_residual(const GrowingComplexVector& f, const RealField& angle);

struct DiracResidual {
    double residual = 0.0;    // ||D Psi - diag(U, conj U) Psi||_2
    double hypothesis = 0.0;  // ||Im d_zbar U||_2
};
// D = [[0, d_z], [-d_zbar, 0]].
DiracResidual dirac_residual(const ComplexField& psi1, const ComplexField& psi2, const ComplexField& U);
// Same with potentials that may grow linearly.
DiracResidual dirac_residual(const GrowingComplex& psi1, const GrowingComplex& psi2, const ComplexField& U);

// Square matrix of quaternion fields, row-major.
struct QuatMatrixField {
    Grid2 grid;
    int dim = 0;
    std::vector<QuatField> entries;
    QuatMatrixField() = default;
    QuatMatrixField(const Grid2& g, int d) : grid(g), dim(d), entries(d * d, QuatField(g)) {}
    QuatField& operator()(int i, int j) { return entries[i * dim + j]; }
    const QuatField& operator()(int i, int j) const { return entries[i * dim + j]; }
};

QuatMatrixField matmul(const QuatMatrixField& a, const QuatMatrixField& b);
QuatMatrixField commutator(const QuatMatrixField& a, const QuatMatrixField& b);  // ab - ba
// max over nodes and entries of |conj(M)^T + M|.
double anti_self_duality(const QuatMatrixField& M);
std::vector<GrowingQuat> act(const QuatMatrixField& M, const std::vector<GrowingQuat>& G);

struct DoubledSystem {
    std::vector<GrowingQuat> G;  // (g^1..g^n, g^1 j..g^n j)
    QuatMatrixField Gamma;       // [[0, -B j], [B j, 0]]
    QuatMatrixField Gamma1;      // diag(A, A)
    double structure_certificate = 0.0;  // anti_self_duality(Gamma)
    double residual = 0.0;               // ||d_L G - (Gamma + Gamma1) G||_2
    double steps_residual = 0.0;         // doubled right side against the two single-row forms
};
// Throws std::invalid_argument unless B_ij = -B_ji to 1e-12.
DoubledSystem double_system(const std::vector<GrowingQuat>& g, const ComplexMatrixField& A, const ComplexMatrixField& B);

struct EnergyIdentity {
    double projector_form = 0.0;  // int |P_R grad u|^2 - |P_L grad u|^2
    double metric_form = 0.0;     // -int <grad u, S grad u>
    double difference = 0.0;
};
EnergyIdentity energy_identity(const ChiralityField& S, const GrowingVector& u);

// ||Laplace(S u) - div((grad S) S (S u))||_2: vanishes when div(S grad u) = 0.
double rewritten_equation_residual(const RealMatrixField& S, const GrowingVector& u);

struct ManufactureParams {
    int grid_n = 64;
    int dim = 2;
    int plus_count = 1;
    std::uint64_t seed = 1;
    double amplitude = 0.3;        // frame generator amplitude (conjugated_harmonic)
    double angle_gradient = 0.05;  // ||grad angle||_2 (adapted_frame)
    int max_mode = 3;
    double tolerance = 1e-13;
    int max_iterations = 5000;
};

// Modes: constant_S, conjugated_harmonic, adapted_frame. Throws std::invalid_argument on unknown mode.
ChiralitySystem manufacture_solution(const std::string& mode, const ManufactureParams& params);

// chirality blob, one blob per growing component, and manifest.json under dir.
void save_system(const ChiralitySystem& sys, const std::string& dir);

}  // namespace chirality_lab
