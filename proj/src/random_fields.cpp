#include "chirality_lab/random_fields.hpp"

#include <cmath>
#include <numbers>

namespace chirality_lab {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::derive(std::uint64_t base, std::uint64_t trial) {
    // splitmix64 finalizer
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<FourierMode> random_modes(Rng& rng, int max_mode, double decay, bool mean_zero) {
    std::vector<FourierMode> modes;
    for (int m1 = -max_mode; m1 <= max_mode; ++m1)
        for (int m2 = -max_mode; m2 <= max_mode; ++m2) {
            const double a = rng.normal(), b = rng.normal();
            if (mean_zero && m1 == 0 && m2 == 0) continue;
            const double w = std::pow(1.0 + m1 * m1 + m2 * m2, -0.5 * decay);
            modes.push_back({m1, m2, cplx(a, b) * w});
        }
    return modes;
}

RealField evaluate_modes(const Grid2& g, const std::vector<FourierMode>& modes) {
    RealField out(g);
    if (modes.empty()) return out;
    int mmax = 0;
    for (const auto& m : modes) mmax = std::max({mmax, std::abs(m.m1), std::abs(m.m2)});
    const double base = 2.0 * std::numbers::pi / g.length;
    // e1[m][p] = exp(i base m x1(p)), m in [-mmax, mmax]
    const int span = 2 * mmax + 1;
    std::vector<cplx> e1(static_cast<std::size_t>(span) * g.n), e2(static_cast<std::size_t>(span) * g.n);
    for (int m = -mmax; m <= mmax; ++m)
        for (int p = 0; p < g.n; ++p) {
            e1[(m + mmax) * g.n + p] = std::polar(1.0, base * m * g.x1(p));
            e2[(m + mmax) * g.n + p] = std::polar(1.0, base * m * g.x2(p));
        }
    for (const auto& md : modes) {
        const cplx* r1 = &e1[(md.m1 + mmax) * g.n];
        const cplx* r2 = &e2[(md.m2 + mmax) * g.n];
        for (int p = 0; p < g.n; ++p) {
            const cplx a = md.coeff * r1[p];
            for (int q = 0; q < g.n; ++q) out(p, q) += (a * r2[q]).real();
        }
    }
    return out;
}

RealField random_band_limited(const Grid2& g, Rng& rng, int max_mode, double decay, bool mean_zero) {
    return evaluate_modes(g, random_modes(rng, max_mode, decay, mean_zero));
}

ComplexField random_band_limited_complex(const Grid2& g, Rng& rng, int max_mode, double decay, bool mean_zero) {
    RealField re = random_band_limited(g, rng, max_mode, decay, mean_zero);
    RealField im = random_band_limited(g, rng, max_mode, decay, mean_zero);
    return make_complex(re, im);
}

}  // namespace chirality_lab
