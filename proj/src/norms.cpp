#include "chirality_lab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "chirality_lab/simd_kernels.hpp"

namespace chirality_lab {

std::string NormReport::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << name << ',' << grid_n << ',';
    if (region)
        os << region->center_x1 << ',' << region->center_x2 << ',' << region->radius;
    else
        os << ",,";
    os << ',' << value;
    return os.str();
}

RealField pointwise_abs(const RealField& f) { return field_map(f, [](double v) { return std::abs(v); }); }
RealField pointwise_abs(const ComplexField& f) { return field_map(f, [](cplx v) { return std::abs(v); }); }
RealField pointwise_abs(const Vec2Field& f) {
    return field_zip(f.x1, f.x2, [](double a, double b) { return std::hypot(a, b); });
}
RealField pointwise_abs(const QuatField& f) { return quat_abs(f); }
RealField pointwise_abs(const std::vector<RealField>& fs) {
    if (fs.empty()) throw std::invalid_argument("pointwise_abs: empty list");
    RealField out(fs[0].grid);
    for (const auto& f : fs) {
        require_same_grid(f.grid, out.grid);
        for (std::size_t i = 0; i < f.size(); ++i) out[i] += f[i] * f[i];
    }
    for (auto& v : out.values) v = std::sqrt(v);
    return out;
}

double max_ball_radius(const Grid2& g) { return 0.5 * g.length - g.spacing(); }

std::vector<std::size_t> ball_indices(const Grid2& g, const Ball& b) {
    const double r = std::min(b.radius, max_ball_radius(g));
    const double L = g.length;
    auto wrap = [L](double d) {
        d = std::fmod(d, L);
        if (d < 0) d += L;
        return std::min(d, L - d);
    };
    std::vector<std::size_t> idx;
    const double r2 = r * r;
    for (int p = 0; p < g.n; ++p) {
        const double dx = wrap(g.x1(p) - b.center_x1);
        if (dx > r) continue;
        for (int q = 0; q < g.n; ++q) {
            const double dy = wrap(g.x2(q) - b.center_x2);
            if (dx * dx + dy * dy <= r2) idx.push_back(g.index(p, q));
        }
    }
    return idx;
}

namespace {

std::vector<double> gather_abs(const RealField& f, const std::optional<Ball>& region) {
    std::vector<double> v;
    if (region) {
        for (std::size_t i : ball_indices(f.grid, *region)) v.push_back(std::abs(f[i]));
    } else {
        v.reserve(f.size());
        for (double x : f.values) v.push_back(std::abs(x));
    }
    return v;
}

std::vector<double> decreasing_rearrangement(const RealField& f, const std::optional<Ball>& region) {
    std::vector<double> v = gather_abs(f, region);
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

}  // namespace

double lp_norm(const RealField& f, double p, const std::optional<Ball>& region) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
    const std::vector<double> v = gather_abs(f, region);
    double s = 0.0;
    if (p == 2.0) {
        s = simd::active_kernels().sum_sq(v.data(), v.size());
    } else if (p == 1.0) {
        for (double x : v) s += x;
    } else {
        for (double x : v) s += std::pow(x, p);
    }
    return std::pow(s * f.grid.cell_measure(), 1.0 / p);
}

double lorentz_weak_l2(const RealField& f, const std::optional<Ball>& region) {
    const std::vector<double> v = decreasing_rearrangement(f, region);
    const double cm = f.grid.cell_measure();
    double best = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) best = std::max(best, v[k] * std::sqrt(static_cast<double>(k + 1) * cm));
    return best;
}

double lorentz_l21(const RealField& f, const std::optional<Ball>& region) {
    const std::vector<double> v = decreasing_rearrangement(f, region);
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double kk = static_cast<double>(k + 1);
        s += v[k] * (std::sqrt(kk) - std::sqrt(kk - 1.0));
    }
    return s * f.grid.spacing();
}

double sobolev_neg_1_2(const ComplexField& f) {
    const Grid2& g = f.grid;
    const cplx m = field_mean(f);
    const double nrm = l2(f);
    if (std::abs(m) > 1e-10 * nrm)
        throw std::invalid_argument("sobolev_neg_1_2: input has a nonzero mean; subtract the mean first");
    const auto& P = plan_for(g);
    const ComplexField spec = P.forward(f);
    const double inv_n2 = 1.0 / static_cast<double>(g.size());
    double s = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double k2 = P.k1()[i] * P.k1()[i] + P.k2()[i] * P.k2()[i];
        if (k2 == 0.0) continue;
        s += std::norm(spec[i] * inv_n2) / k2;
    }
    return std::sqrt(s * g.area());
}

double sobolev_neg_1_2(const RealField& f) { return sobolev_neg_1_2(to_complex(f)); }

LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    fit.intercept = my - fit.slope * mx;
    double r = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        r += e * e;
    }
    fit.rms_residual = std::sqrt(r / n);
    return fit;
}

MorreyProfile morrey_profile(const RealField& f, double cx, double cy, const std::vector<double>& radii) {
    if (radii.size() < 4) throw std::invalid_argument("morrey_profile: at least 4 radii are required");
    MorreyProfile prof;
    const double rmax = max_ball_radius(f.grid);
    std::vector<double> lx, ly;
    for (double r : radii) {
        if (!(r > 0.0) || r > rmax) throw std::invalid_argument("morrey_profile: radius outside (0, L/2 - h]");
        const double v = lorentz_weak_l2(f, Ball{cx, cy, r});
        prof.radii.push_back(r);
        prof.values.push_back(v);
        if (v > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(v));
        }
    }
    if (lx.size() < 4) {
        prof.degenerate = true;
        prof.alpha = std::numeric_limits<double>::quiet_NaN();
        return prof;
    }
    const LineFit fit = least_squares_line(lx, ly);
    prof.alpha = fit.slope;
    prof.fit_residual = fit.rms_residual;
    return prof;
}

}  // namespace chirality_lab
