#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "chirality_lab/field.hpp"
#include "chirality_lab/norms.hpp"
#include "chirality_lab/spectral.hpp"

namespace chirality_lab {

// grad u = f + g with f_j = sum_k d_k a^k_j.
struct SplitGradientData {
    Vec2Field a1;  // a^1 = (a^1_1, a^1_2)
    Vec2Field a2;  // a^2 = (a^2_1, a^2_2)
    Vec2Field g;
};

Vec2Field implied_f(const SplitGradientData& d);
// Divergence-form potentials reproducing a mean-zero vector field f: a^k_j = d_k inv_laplacian(f_j).
SplitGradientData split_from(const Vec2Field& f, const Vec2Field& g);

struct BBDiagnostics {
    double u_l2 = 0.0;
    double f_neg_sobolev = 0.0;  // upper bound via the stored potentials
    double g_l1 = 0.0;
    double ratio = 0.0;          // ||u||_2 / (||f||_{W^{-1,2}} + ||g||_1)
    double gradient_residual = 0.0;  // ||grad u - (f + g - mean)||_2 relative
};

struct BBResult {
    RealField u;
    RealField w1;
    RealField w2;
    BBDiagnostics diag;
};

BBResult bb_reconstruct(const SplitGradientData& data);

class PreconditionError : public std::runtime_error {
public:
    PreconditionError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct RealFromImagDiagnostics {
    double re_sq = 0.0;             // ||Re h||^2
    double im_sq = 0.0;             // ||Im h||^2
    double integral_h_sq = 0.0;     // Re int h^2
    double integral_gT = 0.0;       // Re int g T
    double mean_term = 0.0;         // Re(mean(h)^2) * area
    double identity_residual = 0.0; // |Re int h^2 + Re int g T - mean_term|
    double identity_scale = 0.0;    // ||h||^2 + ||g||_1 ||T||_inf
    double g_l1 = 0.0;
    double T_sup = 0.0;
    double kernel_constant = 0.0;    // ||T||_inf / ||g||_1
    double identity_constant = 0.0;  // |Re int g T| / ||g||_1^2
    bool inequality_holds = false;
    double precondition_residual = 0.0;
};

// Requires d_zbar h = g to 1e-10 relative; throws PreconditionError otherwise.
RealFromImagDiagnostics real_from_imag_bound(const ComplexField& h, const ComplexField& g);

struct RefinedBoundDiagnostics {
    double u_sq = 0.0;
    double v_sq = 0.0;
    double g_l1 = 0.0;
    double kernel_constant = 0.0;
    double leading_constant = 0.0;  // (||u||^2 - C ||g||_1^2) / ||v||^2
};

// Data grad u = grad_perp v + g: the constant in front of ||v||^2.
RefinedBoundDiagnostics bb_refined_bound(const RealField& v, const Vec2Field& g);

struct WenteDiagnostics {
    double phi_sup = 0.0;
    double grad_phi_l2 = 0.0;
    double grad_phi_l21 = 0.0;
    double grad_a_l2 = 0.0;
    double grad_b_l2 = 0.0;
    double grad_a_weak = 0.0;
    double sup_ratio = 0.0;         // ||phi||_inf / (||grad a||_2 ||grad b||_2)
    double l21_ratio = 0.0;         // ||grad phi||_{2,1} / (||grad a||_2 ||grad b||_2)
    double weak_strong_ratio = 0.0; // ||grad phi||_2 / (||grad a||_{2,inf} ||grad b||_2)
};

struct WenteResult {
    RealField phi;
    RealField rhs;  // grad a . grad_perp b
    WenteDiagnostics diag;
};

// phi = -inv_laplacian(grad a . grad_perp b).
WenteResult wente_solve(const RealField& a, const RealField& b);
// Solution of -Laplace phi = rhs with the same diagnostics apart from the input-gradient ratios.
WenteResult poisson_with_diagnostics(const RealField& rhs);

// Field with the Fourier magnitudes of f and phases drawn from the seed (kept real, mean-zero).
RealField phase_shuffle(const RealField& f, std::uint64_t seed);

struct DiagnosticsRecord {
    std::string lemma;
    std::string inputs_hash;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    int grid_n = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

// FNV-1a over the raw value bytes, hex encoded.
std::string hash_fields(std::initializer_list<const RealField*> fields);

}  // namespace chirality_lab
