#include "chirality_lab/jms.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "chirality_lab/norms.hpp"

namespace chirality_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double radius_of(const std::vector<double>& x, const JmsParams& p) {
    if (static_cast<int>(x.size()) != p.n) throw std::invalid_argument("point dimension does not match n");
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 == 0.0) throw std::invalid_argument("coefficient and solution are singular at the origin");
    return std::sqrt(r2);
}

double log_ratio(double r, const JmsParams& p) { return std::log(p.r0 / r); }

void require_planar(const JmsParams& p) {
    if (p.n != 2) throw std::invalid_argument("grid and quadrature studies are planar (n = 2)");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// exp(1 - 1/(1 - t^2)) on |t| < 1 and its derivative.
double bump(double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; }
double bump_derivative(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double d = 1.0 - t * t;
    return bump(t) * (-2.0 * t / (d * d));
}

struct TestBump {
    double c1, c2, half_width;
    std::array<double, 2> gradient(double x1, double x2) const {
        const double t1 = (x1 - c1) / half_width, t2 = (x2 - c2) / half_width;
        return {bump_derivative(t1) * bump(t2) / half_width, bump(t1) * bump_derivative(t2) / half_width};
    }
};

// Three rings of eight bumps with square supports inside excision < |x| < 1.
std::vector<TestBump> bump_battery(double excision) {
    constexpr double half_width = 0.1;
    const double reach = half_width * std::numbers::sqrt2 + 0.01;
    const double inner = excision + reach, outer = 1.0 - reach;
    if (inner > outer) throw std::invalid_argument("excision leaves no room for test functions");
    std::vector<TestBump> out;
    for (double c : {inner, 0.5 * (inner + outer), outer}) {
        for (int k = 0; k < 8; ++k) {
            const double t = 0.3 + k * kPi / 4.0;
            out.push_back({c * std::cos(t), c * std::sin(t), half_width});
        }
    }
    return out;
}

double fourth_order(double fm2, double fm1, double fp1, double fp2, double h) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

double gauss_panels(const auto& f, double a, double b, double panel_width) {
    if (b <= a) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width)));
    const double w = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        total += boost::math::quadrature::gauss<double, 20>::integrate(f, a + i * w, a + (i + 1) * w);
    }
    return total;
}

}  // namespace

JmsAdmissibility check_jms_params(const JmsParams& p) {
    if (!(p.beta > 1.0)) throw InvalidJmsParams("beta must exceed 1");
    if (!(p.r0 > 1.0)) throw InvalidJmsParams("r0 must exceed 1 so that log(r0/r) > 0 on (0, 1]");
    if (p.n < 2) throw InvalidJmsParams("dimension must be at least 2");
    // alpha is a quadratic in 1/log(r0/r), which ranges over (0, 1/log r0].
    const double lin = -p.beta * p.n / (p.n - 1.0);
    const double quad = p.beta * (p.beta + 1.0) / (p.n - 1.0);
    const double s_max = 1.0 / std::log(p.r0);
    const double s_star = std::min(-lin / (2.0 * quad), s_max);
    JmsAdmissibility a;
    a.min_alpha = lin * s_star + quad * s_star * s_star;
    a.min_alpha_radius = p.r0 * std::exp(-1.0 / s_star);
    a.half_bound = a.min_alpha >= -0.5;
    a.ellipticity = 1.0 + std::min(0.0, a.min_alpha);
    if (a.ellipticity <= 0.0) throw InvalidJmsParams("tangential eigenvalue 1 + alpha is not positive on (0, 1]");
    return a;
}

double jms_alpha(double r, const JmsParams& p) {
    const double s = 1.0 / log_ratio(r, p);
    return (-p.beta * p.n * s + p.beta * (p.beta + 1.0) * s * s) / (p.n - 1.0);
}

double jms_alpha_derivative(double r, const JmsParams& p) {
    const double s = 1.0 / log_ratio(r, p);
    // d(1/L)/dr = 1/(r L^2)
    return (-p.beta * p.n * s * s + 2.0 * p.beta * (p.beta + 1.0) * s * s * s) / ((p.n - 1.0) * r);
}

std::vector<double> jms_matrix(const std::vector<double>& x, const JmsParams& p) {
    const double r = radius_of(x, p);
    const double a = jms_alpha(r, p);
    const int n = p.n;
    std::vector<double> m(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = i == j ? 1.0 : 0.0;
            m[i * n + j] = d + a * (d - (x[i] / r) * (x[j] / r));
        }
    }
    return m;
}

std::vector<double> jms_gradient(const std::vector<double>& x, const JmsParams& p) {
    const double r = radius_of(x, p);
    const double a = jms_alpha(r, p), da = jms_alpha_derivative(r, p);
    const int n = p.n;
    std::vector<double> e(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) e[k] = x[k] / r;
    std::vector<double> t(static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double dij = i == j ? 1.0 : 0.0;
            for (int k = 0; k < n; ++k) {
                const double dik = i == k ? 1.0 : 0.0, djk = j == k ? 1.0 : 0.0;
                const double radial = da * e[k] * (dij - e[i] * e[j]);
                const double proj = (dik * e[j] + djk * e[i] - 2.0 * e[k] * e[i] * e[j]) / r;
                t[(i * n + j) * n + k] = radial - a * proj;
            }
        }
    }
    return t;
}

double jms_solution(const std::vector<double>& x, const JmsParams& p) {
    const double r = radius_of(x, p);
    return x[0] / (std::pow(r, p.n) * std::pow(log_ratio(r, p), p.beta));
}

std::vector<double> jms_solution_gradient(const std::vector<double>& x, const JmsParams& p) {
    const double r = radius_of(x, p);
    const double L = log_ratio(r, p);
    const double g = 1.0 / (std::pow(r, p.n) * std::pow(L, p.beta));
    const double dg = g * (-p.n + p.beta / L) / r;
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (k == 0 ? g : 0.0) + x[0] * dg * x[k] / r;
    return out;
}

std::vector<double> jms_flux(const std::vector<double>& x, const JmsParams& p) {
    const auto m = jms_matrix(x, p);
    const auto g = jms_solution_gradient(x, p);
    const int n = p.n;
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) f[i] += m[i * n + j] * g[j];
    }
    return f;
}

std::string JmsResidualRow::csv_row() const {
    return std::to_string(grid_n) + "," + fmt(excision) + "," + fmt(strong_residual) + "," + fmt(weak_residual);
}

std::string JmsNormRow::csv_row() const {
    return fmt(p) + "," + fmt(beta) + "," + fmt(r0) + "," + fmt(delta) + "," + fmt(norm_value) + "," +
           fmt(fitted_slope);
}

JmsResidualReport jms_residual_study(const JmsParams& p, const std::vector<int>& grids, double excision) {
    require_planar(p);
    check_jms_params(p);
    if (!(excision > 0.0 && excision < 1.0)) throw std::invalid_argument("excision must lie in (0, 1)");
    const auto battery = bump_battery(excision);
    JmsResidualReport report;
    report.battery_size = static_cast<int>(battery.size());

    for (int N : grids) {
        if (N < 8 || N % 2 != 0) throw std::invalid_argument("grid size must be even and at least 8");
        const double h = 2.0 / N;
        auto node = [h](int i) { return -1.0 + (i + 0.5) * h; };

        double strong_num = 0.0, strong_den = 0.0;
        std::vector<double> integral(battery.size(), 0.0), magnitude(battery.size(), 0.0);
        std::vector<double> mirrored(battery.size(), 0.0);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                const double x1 = node(i), x2 = node(j);
                const double r = std::hypot(x1, x2);
                if (r <= excision || r >= 1.0) continue;

                auto flux = [&](double a, double b) { return jms_flux({a, b}, p); };
                const double d1f1 = fourth_order(flux(x1 - 2 * h, x2)[0], flux(x1 - h, x2)[0], flux(x1 + h, x2)[0],
                                                 flux(x1 + 2 * h, x2)[0], h);
                const double d2f2 = fourth_order(flux(x1, x2 - 2 * h)[1], flux(x1, x2 - h)[1], flux(x1, x2 + h)[1],
                                                 flux(x1, x2 + 2 * h)[1], h);
                strong_num = std::max(strong_num, std::abs(d1f1 + d2f2));
                strong_den = std::max(strong_den, std::abs(d1f1) + std::abs(d2f2));

                auto u = [&](double a, double b) { return jms_solution({a, b}, p); };
                const double g1 = fourth_order(u(x1 - 2 * h, x2), u(x1 - h, x2), u(x1 + h, x2), u(x1 + 2 * h, x2), h);
                const double g2 = fourth_order(u(x1, x2 - 2 * h), u(x1, x2 - h), u(x1, x2 + h), u(x1, x2 + 2 * h), h);
                const auto m = jms_matrix({x1, x2}, p);
                const double F1 = m[0] * g1 + m[1] * g2, F2 = m[2] * g1 + m[3] * g2;
                for (std::size_t b = 0; b < battery.size(); ++b) {
                    const auto gp = battery[b].gradient(x1, x2);
                    integral[b] += (F1 * gp[0] + F2 * gp[1]) * h * h;
                    magnitude[b] += std::hypot(F1, F2) * std::hypot(gp[0], gp[1]) * h * h;
                    const TestBump ref{-battery[b].c1, battery[b].c2, battery[b].half_width};
                    const auto gr = ref.gradient(x1, x2);
                    mirrored[b] += (F1 * gr[0] + F2 * gr[1]) * h * h;
                }
            }
        }
        JmsResidualRow row;
        row.grid_n = N;
        row.excision = excision;
        row.strong_residual = strong_den > 0.0 ? strong_num / strong_den : 0.0;
        for (std::size_t b = 0; b < battery.size(); ++b) {
            row.weak_residual = std::max(row.weak_residual, std::abs(integral[b]) / magnitude[b]);
            report.parity_gap = std::max(report.parity_gap, std::abs(integral[b] + mirrored[b]) / magnitude[b]);
        }
        report.rows.push_back(row);
    }

    if (report.rows.size() >= 2) {
        std::vector<double> logn, ls, lw;
        for (const auto& r : report.rows) {
            logn.push_back(std::log(static_cast<double>(r.grid_n)));
            ls.push_back(std::log(r.strong_residual));
            lw.push_back(std::log(r.weak_residual));
        }
        report.strong_order = -least_squares_line(logn, ls).slope;
        report.weak_order = -least_squares_line(logn, lw).slope;
    }
    return report;
}

double jms_angular_factor(double power, double s, const JmsParams& p) {
    constexpr int kNodes = 256;
    const double k = 1.0 - p.beta / s;
    double total = 0.0;
    for (int i = 0; i < kNodes; ++i) {
        const double t = 2.0 * kPi * i / kNodes;
        const double c = std::cos(t), sn = std::sin(t);
        total += std::pow(sn * sn + k * k * c * c, 0.5 * power);
    }
    return total * 2.0 * kPi / kNodes;
}

double jms_gradient_norm(double power, double delta, const JmsParams& p, double outer) {
    require_planar(p);
    if (!(delta > 0.0 && delta < outer && outer <= 1.0)) throw std::invalid_argument("need 0 < delta < outer <= 1");
    // |grad u| = r^{-2} L^{-beta} (sin^2 + (1 - beta/L)^2 cos^2)^{1/2}; dx = r dr dt and dr = -r ds.
    auto integrand = [&](double s) {
        const double r = p.r0 * std::exp(-s);
        return std::pow(r, 2.0 - 2.0 * power) * std::pow(s, -power * p.beta) * jms_angular_factor(power, s, p);
    };
    const double value = gauss_panels(integrand, std::log(p.r0 / outer), std::log(p.r0 / delta), 0.5);
    return std::pow(value, 1.0 / power);
}

double jms_gradient_norm_limit(const JmsParams& p, double outer) {
    require_planar(p);
    check_jms_params(p);
    const double s0 = std::log(p.r0 / outer);
    const double s1 = s0 + 40.0;
    auto head = [&](double s) { return std::pow(s, -p.beta) * jms_angular_factor(1.0, s, p); };
    // Tail in v = s^{1 - beta}: s^{-beta} ds = -dv / (beta - 1).
    auto tail = [&](double v) {
        if (v <= 0.0) return 2.0 * kPi;
        return jms_angular_factor(1.0, std::pow(v, -1.0 / (p.beta - 1.0)), p);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double t = ts.integrate(tail, 0.0, std::pow(s1, 1.0 - p.beta)) / (p.beta - 1.0);
    return gauss_panels(head, s0, s1, 0.5) + t;
}

double jms_asymptotic_slope(double power, double delta, const JmsParams& p) {
    return ((2.0 - 2.0 * power) + power * p.beta / std::log(p.r0 / delta)) / power;
}

std::vector<JmsNormRow> jms_norm_divergence(const JmsParams& p, const std::vector<double>& powers,
                                            const std::vector<double>& deltas) {
    require_planar(p);
    check_jms_params(p);
    for (double q : powers) {
        if (!(q >= 1.0 && q < 2.0)) throw std::invalid_argument("powers must lie in [1, 2)");
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0 && deltas[i] < 1.0) || (i > 0 && deltas[i] >= deltas[i - 1])) {
            throw std::invalid_argument("deltas must decrease within (0, 1)");
        }
    }
    std::vector<JmsNormRow> rows;
    for (double q : powers) {
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            JmsNormRow row;
            row.p = q;
            row.beta = p.beta;
            row.r0 = p.r0;
            row.delta = deltas[i];
            row.norm_value = jms_gradient_norm(q, deltas[i], p);
            if (i > 0) {
                const auto& prev = rows.back();
                row.fitted_slope = (std::log(row.norm_value) - std::log(prev.norm_value)) /
                                   (std::log(row.delta) - std::log(prev.delta));
                row.analytic_slope = jms_asymptotic_slope(q, std::sqrt(row.delta * prev.delta), p);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

double jms_coefficient_gradient_bound_sq(const JmsParams& p) {
    require_planar(p);
    check_jms_params(p);
    // 2 pi int_0^1 dr / (r L^2) = 2 pi int_{log r0}^inf ds / s^2
    boost::math::quadrature::exp_sinh<double> es;
    return 2.0 * kPi * es.integrate([](double s) { return 1.0 / (s * s); }, std::log(p.r0),
                                    std::numeric_limits<double>::infinity());
}

}  // namespace chirality_lab
