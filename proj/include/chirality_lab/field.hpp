#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirality_lab/quaternion.hpp"

namespace chirality_lab {

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Grid2 {
    int n = 64;
    double length = 2.0 * std::numbers::pi;
    // Half-cell shift so no node sits on the torus origin.
    bool origin_singular = false;

    Grid2() = default;
    Grid2(int n_, double length_ = 2.0 * std::numbers::pi, bool origin_singular_ = false);

    double spacing() const { return length / n; }
    double cell_measure() const { return spacing() * spacing(); }
    double area() const { return length * length; }
    double offset() const { return origin_singular ? 0.5 * spacing() : 0.0; }
    std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
    // Row-major index: p runs along x1, q along x2, storage index = p * n + q.
    std::size_t index(int p, int q) const { return static_cast<std::size_t>(p) * n + q; }
    double x1(int p) const { return offset() + p * spacing(); }
    double x2(int q) const { return offset() + q * spacing(); }

    bool operator==(const Grid2& o) const {
        return n == o.n && length == o.length && origin_singular == o.origin_singular;
    }
};

inline void require_same_grid(const Grid2& a, const Grid2& b) {
    if (!(a == b))
        throw GridMismatch("fields live on different grids (n=" + std::to_string(a.n) + " vs n=" +
                           std::to_string(b.n) + ")");
}

template <class V>
struct Field {
    Grid2 grid;
    std::vector<V> values;

    Field() = default;
    explicit Field(const Grid2& g, V fill = V{}) : grid(g), values(g.size(), fill) {}

    V& operator()(int p, int q) { return values[grid.index(p, q)]; }
    const V& operator()(int p, int q) const { return values[grid.index(p, q)]; }
    V& operator[](std::size_t i) { return values[i]; }
    const V& operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
    V* data() { return values.data(); }
    const V* data() const { return values.data(); }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

// Quaternion field stored as four real component tables.
struct QuatField {
    Grid2 grid;
    std::array<std::vector<double>, 4> comp;

    QuatField() = default;
    explicit QuatField(const Grid2& g) : grid(g) {
        for (auto& c : comp) c.assign(g.size(), 0.0);
    }
    Quaternion at(std::size_t i) const { return {comp[0][i], comp[1][i], comp[2][i], comp[3][i]}; }
    void set(std::size_t i, const Quaternion& v) {
        comp[0][i] = v.re; comp[1][i] = v.i_part; comp[2][i] = v.j_part; comp[3][i] = v.k_part;
    }
    std::size_t size() const { return comp[0].size(); }
};

// Dense rows x cols matrix of fields, entries stored row-major.
template <class V>
struct MatrixField {
    Grid2 grid;
    int rows = 0;
    int cols = 0;
    std::vector<Field<V>> entries;

    MatrixField() = default;
    MatrixField(const Grid2& g, int r, int c) : grid(g), rows(r), cols(c), entries(r * c, Field<V>(g)) {}
    Field<V>& operator()(int i, int j) { return entries[i * cols + j]; }
    const Field<V>& operator()(int i, int j) const { return entries[i * cols + j]; }
};

using RealMatrixField = MatrixField<double>;
using ComplexMatrixField = MatrixField<cplx>;

template <class V>
using VectorField = std::vector<Field<V>>;

// ---- pointwise algebra ----

template <class V, class Fn>
auto field_map(const Field<V>& f, Fn fn) {
    using R = decltype(fn(f.values[0]));
    Field<R> out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = fn(f.values[i]);
    return out;
}

template <class A, class B, class Fn>
auto field_zip(const Field<A>& a, const Field<B>& b, Fn fn) {
    require_same_grid(a.grid, b.grid);
    using R = decltype(fn(a.values[0], b.values[0]));
    Field<R> out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = fn(a.values[i], b.values[i]);
    return out;
}

template <class V>
V field_mean(const Field<V>& f) {
    V s{};
    for (const auto& v : f.values) s += v;
    return s * (f.grid.cell_measure() / f.grid.area());
}

Quaternion field_mean(const QuatField& f);

template <class V, class Fn>
Field<V> sample(const Grid2& g, Fn fn) {
    Field<V> out(g);
    for (int p = 0; p < g.n; ++p)
        for (int q = 0; q < g.n; ++q) out(p, q) = static_cast<V>(fn(g.x1(p), g.x2(q)));
    return out;
}

template <class V>
Field<V> operator+(const Field<V>& a, const Field<V>& b) { return field_zip(a, b, std::plus<>{}); }
template <class V>
Field<V> operator-(const Field<V>& a, const Field<V>& b) { return field_zip(a, b, std::minus<>{}); }
template <class V>
Field<V> operator*(const Field<V>& a, const Field<V>& b) { return field_zip(a, b, std::multiplies<>{}); }
template <class V, class S>
Field<V> scaled(const Field<V>& a, S s) { return field_map(a, [s](const V& v) { return V(s * v); }); }
template <class V>
Field<V> operator-(const Field<V>& a) { return field_map(a, [](const V& v) { return V(-v); }); }

template <class V>
Field<V> subtract_mean(const Field<V>& f) {
    const V m = field_mean(f);
    return field_map(f, [m](const V& v) { return V(v - m); });
}

RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);
ComplexField make_complex(const RealField& re, const RealField& im);
ComplexField to_complex(const RealField& re);
ComplexField conj(const ComplexField& f);

QuatField quat_from_pair(const ComplexField& a, const ComplexField& b);  // a + b j
ComplexField quat_first(const QuatField& f);                            // re + i-part
ComplexField quat_second(const QuatField& f);                           // j-part + i k-part
QuatField quat_add(const QuatField& a, const QuatField& b);
QuatField quat_sub(const QuatField& a, const QuatField& b);
QuatField quat_scale(const QuatField& a, double s);
QuatField quat_constant(const Grid2& g, const Quaternion& c);
QuatField quat_mul(const QuatField& a, const QuatField& b);
QuatField quat_mul(const Quaternion& a, const QuatField& b);
QuatField quat_mul(const QuatField& a, const Quaternion& b);
QuatField quat_conj(const QuatField& a);
QuatField quat_inverse(const QuatField& a);
QuatField quat_exp(const QuatField& u);
QuatField quat_pi_i(const QuatField& a);
QuatField quat_pi_jk(const QuatField& a);
RealField quat_abs(const QuatField& a);

// Real linear algebra on matrix fields (pointwise).
RealMatrixField matmul(const RealMatrixField& a, const RealMatrixField& b);
RealMatrixField transpose(const RealMatrixField& a);
RealMatrixField identity_field(const Grid2& g, int n);
std::vector<RealField> matvec(const RealMatrixField& a, const std::vector<RealField>& v);
RealMatrixField constant_matrix_field(const Grid2& g, int rows, int cols, const std::vector<double>& row_major);

double max_abs(const RealField& f);
double max_abs(const ComplexField& f);
double l2(const RealField& f);       // (sum |f|^2 h^2)^{1/2}
double l2(const ComplexField& f);
double l2(const QuatField& f);
double l2(const std::vector<RealField>& fs);
double l2(const RealMatrixField& m);
double l2(const ComplexMatrixField& m);
double inner(const RealField& a, const RealField& b);  // sum a b h^2

}  // namespace chirality_lab
