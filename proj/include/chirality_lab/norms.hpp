#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chirality_lab/field.hpp"
#include "chirality_lab/spectral.hpp"

namespace chirality_lab {

struct Ball {
    double center_x1 = 0.0;
    double center_x2 = 0.0;
    double radius = 0.0;
};

struct NormReport {
    std::string name;
    double value = 0.0;
    int grid_n = 0;
    std::optional<Ball> region;

    static std::string csv_header() { return "name,grid_n,region_center_x,region_center_y,region_r,value"; }
    std::string csv_row() const;
};

// Pointwise magnitudes of vector-valued data.
RealField pointwise_abs(const RealField& f);
RealField pointwise_abs(const ComplexField& f);
RealField pointwise_abs(const Vec2Field& f);
RealField pointwise_abs(const QuatField& f);
RealField pointwise_abs(const std::vector<RealField>& fs);

// Radius clamp on the torus (L/2 - spacing) and wrap-around membership mask.
double max_ball_radius(const Grid2& g);
std::vector<std::size_t> ball_indices(const Grid2& g, const Ball& b);

double lp_norm(const RealField& f, double p, const std::optional<Ball>& region = std::nullopt);
double lorentz_weak_l2(const RealField& f, const std::optional<Ball>& region = std::nullopt);
double lorentz_l21(const RealField& f, const std::optional<Ball>& region = std::nullopt);
// Zero mode dropped; rejects data whose mean exceeds 1e-10 of the L2 norm.
double sobolev_neg_1_2(const RealField& f);
double sobolev_neg_1_2(const ComplexField& f);

struct MorreyProfile {
    std::vector<double> radii;
    std::vector<double> values;
    double alpha = 0.0;         // fitted slope of log value vs log r
    double fit_residual = 0.0;  // rms of log residuals
    bool degenerate = false;
};
MorreyProfile morrey_profile(const RealField& f, double center_x1, double center_x2, const std::vector<double>& radii);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace chirality_lab
