#pragma once

#include <memory>
#include <vector>

#include "chirality_lab/field.hpp"

namespace chirality_lab {

// FFT plan plus wavenumber tables for one grid. Immutable after construction.
class SpectralPlan {
public:
    explicit SpectralPlan(const Grid2& grid);
    ~SpectralPlan();
    SpectralPlan(const SpectralPlan&) = delete;
    SpectralPlan& operator=(const SpectralPlan&) = delete;

    const Grid2& grid() const { return grid_; }

    // Unnormalized forward transform; inverse divides by n^2.
    ComplexField forward(const ComplexField& f) const;
    ComplexField inverse(const ComplexField& spec) const;
    ComplexField forward(const RealField& f) const;

    // Pointwise symbol application in Fourier space, result in physical space.
    ComplexField apply(const ComplexField& f, const std::vector<cplx>& symbol) const;
    ComplexField apply(const ComplexField& f, const std::vector<double>& symbol) const;
    RealField apply_real(const RealField& f, const std::vector<cplx>& symbol) const;  // real part of result
    RealField apply_real(const RealField& f, const std::vector<double>& symbol) const;

    // Full wavenumbers k = 2 pi m / L, and the same with the Nyquist index zeroed.
    const std::vector<double>& k1() const { return k1_; }
    const std::vector<double>& k2() const { return k2_; }
    const std::vector<double>& k1_odd() const { return k1o_; }
    const std::vector<double>& k2_odd() const { return k2o_; }
    // Signed integer mode index along one axis for storage index p.
    int mode(int p) const { return p <= grid_.n / 2 ? p : p - grid_.n; }

    // Precomputed symbols.
    const std::vector<cplx>& sym_d1() const { return d1_; }
    const std::vector<cplx>& sym_d2() const { return d2_; }
    const std::vector<cplx>& sym_dz() const { return dz_; }
    const std::vector<cplx>& sym_dzbar() const { return dzbar_; }
    const std::vector<double>& sym_laplacian() const { return lap_; }
    const std::vector<double>& sym_inv_laplacian() const { return inv_lap_; }
    const std::vector<cplx>& sym_inv_dzbar() const { return inv_dzbar_; }
    const std::vector<cplx>& sym_inv_dzbar_sq() const { return inv_dzbar_sq_; }

private:
    Grid2 grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<double> k1_, k2_, k1o_, k2o_;
    std::vector<cplx> d1_, d2_, dz_, dzbar_, inv_dzbar_, inv_dzbar_sq_;
    std::vector<double> lap_, inv_lap_;
};

// Shared plan cache keyed by grid; creation is serialized.
const SpectralPlan& plan_for(const Grid2& grid);

// ---- real and complex derivatives ----
RealField d1(const RealField& f);
RealField d2(const RealField& f);
ComplexField d1(const ComplexField& f);
ComplexField d2(const ComplexField& f);
ComplexField d_z(const ComplexField& f);
ComplexField d_zbar(const ComplexField& f);
ComplexField d_z(const RealField& f);
ComplexField d_zbar(const RealField& f);

// ---- quaternion Cauchy-Riemann-Fueter operators (left / right multiplication by i) ----
QuatField d1(const QuatField& f);
QuatField d2(const QuatField& f);
QuatField d_L(const QuatField& f);
QuatField d_R(const QuatField& f);
QuatField d_Lbar(const QuatField& f);
QuatField d_Rbar(const QuatField& f);
QuatField left_i(const QuatField& f);   // i * f
QuatField right_i(const QuatField& f);  // f * i

// ---- vector calculus ----
struct Vec2Field {
    RealField x1;
    RealField x2;
};
Vec2Field grad(const RealField& f);
Vec2Field grad_perp(const RealField& f);  // (-d2 f, d1 f)
RealField div(const Vec2Field& a);
RealField curl(const Vec2Field& a);  // d1 a2 - d2 a1
RealField laplacian(const RealField& f);
ComplexField laplacian(const ComplexField& f);
RealField inv_laplacian(const RealField& f);
ComplexField inv_laplacian(const ComplexField& f);

struct HodgeParts {
    RealField alpha;
    RealField beta;
    double mean1 = 0.0;
    double mean2 = 0.0;
};
HodgeParts hodge_decompose(const Vec2Field& a);
Vec2Field hodge_reconstruct(const HodgeParts& parts);

// Mean-zero h with d_zbar h = g - mean(g).
ComplexField cauchy_solve(const ComplexField& g);
// Mean-zero T with d_zbar d_zbar T = g - mean(g): the inverse of the squared Cauchy-Riemann operator.
ComplexField inv_dzbar_sq_kernel_apply(const ComplexField& g);

// Fraction of spectral energy outside the central two-thirds box.
double spectral_tail_fraction(const RealField& f);
double spectral_tail_fraction(const ComplexField& f);

}  // namespace chirality_lab
