#pragma once

#include <cstdint>
#include <random>

#include "chirality_lab/field.hpp"

namespace chirality_lab {

// Seeded generator with portable uniform and normal draws (identical across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::uint64_t next_u64() { return engine_(); }
    // Per-trial stream derived from a base seed.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t trial);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Real trigonometric polynomial with modes |m1|,|m2| <= max_mode, coefficients ~ N(0,1)/(1+|m|^2)^(decay/2).
RealField random_band_limited(const Grid2& g, Rng& rng, int max_mode, double decay = 1.0, bool mean_zero = true);
ComplexField random_band_limited_complex(const Grid2& g, Rng& rng, int max_mode, double decay = 1.0,
                                         bool mean_zero = true);

// Evaluate a trigonometric polynomial given as (m1, m2, coefficient) triples; value = sum Re(c e^{i k.x}).
struct FourierMode {
    int m1;
    int m2;
    cplx coeff;
};
RealField evaluate_modes(const Grid2& g, const std::vector<FourierMode>& modes);
std::vector<FourierMode> random_modes(Rng& rng, int max_mode, double decay, bool mean_zero);

}  // namespace chirality_lab
