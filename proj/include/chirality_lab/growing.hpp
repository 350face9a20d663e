#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chirality_lab/field.hpp"
#include "chirality_lab/spectral.hpp"

namespace chirality_lab {

// Value x1 * slope1(x) + x2 * slope2(x) + base(x) with periodic slope and base fields.
// Closed under spectral differentiation and under pointwise linear maps with periodic coefficients,
// which lets non-periodic potentials with periodic gradients live on the torus grid.
template <class F>
struct Growing {
    F slope1;
    F slope2;
    F base;

    template <class Fn>
    auto map(Fn fn) const -> Growing<decltype(fn(base))> {
        return {fn(slope1), fn(slope2), fn(base)};
    }
};

inline RealField coordinate_field(const Grid2& g, int axis) {
    return sample<double>(g, [axis](double x1, double x2) { return axis == 1 ? x1 : x2; });
}

namespace growing_detail {
inline RealField add(const RealField& a, const RealField& b) { return a + b; }
inline ComplexField add(const ComplexField& a, const ComplexField& b) { return a + b; }
inline QuatField add(const QuatField& a, const QuatField& b) { return quat_add(a, b); }
inline RealField sub(const RealField& a, const RealField& b) { return a - b; }
inline ComplexField sub(const ComplexField& a, const ComplexField& b) { return a - b; }
inline QuatField sub(const QuatField& a, const QuatField& b) { return quat_sub(a, b); }
inline RealField weight(const RealField& w, const RealField& a) { return w * a; }
inline ComplexField weight(const RealField& w, const ComplexField& a) { return to_complex(w) * a; }
inline QuatField weight(const RealField& w, const QuatField& a) {
    QuatField out = a;
    for (auto& c : out.comp)
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w[i];
    return out;
}
inline const Grid2& grid_of(const RealField& f) { return f.grid; }
inline const Grid2& grid_of(const ComplexField& f) { return f.grid; }
inline const Grid2& grid_of(const QuatField& f) { return f.grid; }
}  // namespace growing_detail

template <class F>
Growing<F> periodic(const F& f) {
    return {F(growing_detail::grid_of(f)), F(growing_detail::grid_of(f)), f};
}

template <class F>
Growing<F> operator+(const Growing<F>& a, const Growing<F>& b) {
    using growing_detail::add;
    return {add(a.slope1, b.slope1), add(a.slope2, b.slope2), add(a.base, b.base)};
}

template <class F>
Growing<F> operator-(const Growing<F>& a, const Growing<F>& b) {
    using growing_detail::sub;
    return {sub(a.slope1, b.slope1), sub(a.slope2, b.slope2), sub(a.base, b.base)};
}

template <class F>
Growing<F> d1(const Growing<F>& a) {
    return {d1(a.slope1), d1(a.slope2), growing_detail::add(d1(a.base), a.slope1)};
}

template <class F>
Growing<F> d2(const Growing<F>& a) {
    return {d2(a.slope1), d2(a.slope2), growing_detail::add(d2(a.base), a.slope2)};
}

template <class F>
F evaluate(const Growing<F>& a) {
    using namespace growing_detail;
    const Grid2& g = grid_of(a.base);
    return add(add(weight(coordinate_field(g, 1), a.slope1), weight(coordinate_field(g, 2), a.slope2)), a.base);
}

// Largest slope magnitude: zero exactly when the field is periodic.
inline double growth(const Growing<RealField>& a) { return std::max(max_abs(a.slope1), max_abs(a.slope2)); }
inline double growth(const Growing<ComplexField>& a) { return std::max(max_abs(a.slope1), max_abs(a.slope2)); }

template <class F>
double l2(const Growing<F>& a) {
    return l2(evaluate(a));
}

template <class F>
double l2(const std::vector<Growing<F>>& v) {
    double s = 0.0;
    for (const auto& a : v) {
        const double x = l2(a);
        s += x * x;
    }
    return std::sqrt(s);
}

using GrowingReal = Growing<RealField>;
using GrowingComplex = Growing<ComplexField>;
using GrowingQuat = Growing<QuatField>;

// Complex d_z and d_zbar built from the partial derivatives.
inline GrowingComplex d_z(const GrowingComplex& a) {
    const GrowingComplex x = d1(a), y = d2(a);
    return (x - y.map([](const ComplexField& f) { return scaled(f, cplx(0, 1)); }))
        .map([](const ComplexField& f) { return scaled(f, 0.5); });
}

inline GrowingComplex d_zbar(const GrowingComplex& a) {
    const GrowingComplex x = d1(a), y = d2(a);
    return (x + y.map([](const ComplexField& f) { return scaled(f, cplx(0, 1)); }))
        .map([](const ComplexField& f) { return scaled(f, 0.5); });
}

// Quaternion d_L = (d1 - i d2)/2 with i acting on the left.
inline GrowingQuat d_L(const GrowingQuat& a) {
    const GrowingQuat x = d1(a), y = d2(a);
    return (x - y.map([](const QuatField& f) { return left_i(f); }))
        .map([](const QuatField& f) { return quat_scale(f, 0.5); });
}

}  // namespace chirality_lab
