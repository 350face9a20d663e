#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirality_lab {

// Radial coefficient a_ij(x) = delta_ij + alpha(|x|)(delta_ij - x_i x_j / |x|^2) with
// alpha(r) = -beta n / ((n-1) log(r0/r)) + beta(beta+1) / ((n-1) log(r0/r)^2),
// and the solution u(x) = x_1 / (|x|^n log(r0/r)^beta) of div(A grad u) = 0.
struct JmsParams {
    double beta = 1.5;
    double r0 = std::exp(4.0);
    int n = 2;
};

class InvalidJmsParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct JmsAdmissibility {
    double min_alpha = 0.0;         // over 0 < r <= 1
    double min_alpha_radius = 0.0;
    bool half_bound = false;        // min_alpha >= -1/2
    double ellipticity = 0.0;       // 1 + min(0, min_alpha)
};

// Throws InvalidJmsParams unless beta > 1, r0 > 1, n >= 2 and the tangential eigenvalue stays positive.
JmsAdmissibility check_jms_params(const JmsParams& p);

double jms_alpha(double r, const JmsParams& p);
double jms_alpha_derivative(double r, const JmsParams& p);

// x has p.n entries and must not be the origin (std::invalid_argument).
// Matrix is row-major n x n; the gradient tensor entry d a_ij / d x_k sits at (i*n + j)*n + k.
std::vector<double> jms_matrix(const std::vector<double>& x, const JmsParams& p);
std::vector<double> jms_gradient(const std::vector<double>& x, const JmsParams& p);
double jms_solution(const std::vector<double>& x, const JmsParams& p);
std::vector<double> jms_solution_gradient(const std::vector<double>& x, const JmsParams& p);
// A grad u.
std::vector<double> jms_flux(const std::vector<double>& x, const JmsParams& p);

struct JmsResidualRow {
    int grid_n = 0;
    double excision = 0.0;
    double strong_residual = 0.0;  // max |div_h flux| / max(|D1 F1| + |D2 F2|) over the annulus
    double weak_residual = 0.0;    // max over the battery of |int A grad_h u . grad phi| / int |A grad_h u||grad phi|

    static std::string csv_header() { return "grid_n,excision,strong_residual,weak_residual"; }
    std::string csv_row() const;
};

struct JmsResidualReport {
    std::vector<JmsResidualRow> rows;
    double strong_order = 0.0;  // -slope of log residual against log N
    double weak_order = 0.0;
    double parity_gap = 0.0;    // max |I(phi) + I(phi reflected in x_1)| relative
    int battery_size = 0;
};

// Cell-centred grids on [-1, 1]^2 (the origin is never a node), fourth-order central differences of
// the closed forms, midpoint quadrature against smooth bumps supported in excision < |x| < 1. n = 2.
JmsResidualReport jms_residual_study(const JmsParams& p, const std::vector<int>& grids, double excision);

// int_0^{2 pi} (sin^2 t + (1 - beta/s)^2 cos^2 t)^{power/2} dt, the angular factor of |grad u|^power
// at log(r0/r) = s.
double jms_angular_factor(double power, double s, const JmsParams& p);

// ||grad u||_{L^power(delta < |x| < outer)} by radial quadrature in s = log(r0/r). n = 2.
double jms_gradient_norm(double power, double delta, const JmsParams& p, double outer = 1.0);
// power = 1 with delta -> 0.
double jms_gradient_norm_limit(const JmsParams& p, double outer = 1.0);
// Local log-log slope of ||grad u||_{L^power(delta < |x| < outer)} in delta from the leading
// asymptotics r^{1-2 power} log(r0/r)^{-power beta}.
double jms_asymptotic_slope(double power, double delta, const JmsParams& p);

struct JmsNormRow {
    double p = 0.0;
    double beta = 0.0;
    double r0 = 0.0;
    double delta = 0.0;
    double norm_value = 0.0;
    double fitted_slope = NAN;     // against the previous delta
    double analytic_slope = NAN;   // asymptotic slope at the geometric mean of the two deltas

    static std::string csv_header() { return "p,beta,r0,delta,norm_value,fitted_slope"; }
    std::string csv_row() const;
};

// Throws std::invalid_argument unless every power is in [1, 2) and deltas decrease in (0, 1).
std::vector<JmsNormRow> jms_norm_divergence(const JmsParams& p, const std::vector<double>& powers,
                                            const std::vector<double>& deltas);

// int_{|x| < 1} (1 / (|x| log(r0/|x|)))^2 dx by radial quadrature; bounds ||grad a_ij||_2^2 up to a constant.
double jms_coefficient_gradient_bound_sq(const JmsParams& p);

}  // namespace chirality_lab
