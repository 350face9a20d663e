#include "chirality_lab/field.hpp"

#include <algorithm>

#include "chirality_lab/simd_kernels.hpp"

namespace chirality_lab {

Grid2::Grid2(int n_, double length_, bool origin_singular_) : n(n_), length(length_), origin_singular(origin_singular_) {
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("grid n must be even and >= 8, got " + std::to_string(n));
    if (!(length > 0.0)) throw std::invalid_argument("grid length must be positive");
}

Quaternion field_mean(const QuatField& f) {
    const double w = f.grid.cell_measure() / f.grid.area();
    double s[4] = {0, 0, 0, 0};
    for (int c = 0; c < 4; ++c)
        for (double v : f.comp[c]) s[c] += v;
    return {s[0] * w, s[1] * w, s[2] * w, s[3] * w};
}

RealField real_part(const ComplexField& f) { return field_map(f, [](cplx v) { return v.real(); }); }
RealField imag_part(const ComplexField& f) { return field_map(f, [](cplx v) { return v.imag(); }); }
ComplexField make_complex(const RealField& re, const RealField& im) {
    return field_zip(re, im, [](double a, double b) { return cplx(a, b); });
}
ComplexField to_complex(const RealField& re) { return field_map(re, [](double a) { return cplx(a, 0.0); }); }
ComplexField conj(const ComplexField& f) { return field_map(f, [](cplx v) { return std::conj(v); }); }

QuatField quat_from_pair(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid);
    QuatField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, Quaternion::from_pair(a[i], b[i]));
    return out;
}

ComplexField quat_first(const QuatField& f) {
    ComplexField out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = {f.comp[0][i], f.comp[1][i]};
    return out;
}

ComplexField quat_second(const QuatField& f) {
    ComplexField out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = {f.comp[2][i], f.comp[3][i]};
    return out;
}

QuatField quat_add(const QuatField& a, const QuatField& b) {
    require_same_grid(a.grid, b.grid);
    QuatField out = a;
    for (int c = 0; c < 4; ++c) simd::active_kernels().axpy(1.0, b.comp[c].data(), out.comp[c].data(), a.size());
    return out;
}

QuatField quat_sub(const QuatField& a, const QuatField& b) {
    require_same_grid(a.grid, b.grid);
    QuatField out = a;
    for (int c = 0; c < 4; ++c) simd::active_kernels().axpy(-1.0, b.comp[c].data(), out.comp[c].data(), a.size());
    return out;
}

QuatField quat_scale(const QuatField& a, double s) {
    QuatField out = a;
    for (auto& c : out.comp)
        for (double& v : c) v *= s;
    return out;
}

QuatField quat_constant(const Grid2& g, const Quaternion& c) {
    QuatField out(g);
    std::fill(out.comp[0].begin(), out.comp[0].end(), c.re);
    std::fill(out.comp[1].begin(), out.comp[1].end(), c.i_part);
    std::fill(out.comp[2].begin(), out.comp[2].end(), c.j_part);
    std::fill(out.comp[3].begin(), out.comp[3].end(), c.k_part);
    return out;
}

QuatField quat_mul(const QuatField& a, const QuatField& b) {
    require_same_grid(a.grid, b.grid);
    QuatField out(a.grid);
    const double* pa[4] = {a.comp[0].data(), a.comp[1].data(), a.comp[2].data(), a.comp[3].data()};
    const double* pb[4] = {b.comp[0].data(), b.comp[1].data(), b.comp[2].data(), b.comp[3].data()};
    double* po[4] = {out.comp[0].data(), out.comp[1].data(), out.comp[2].data(), out.comp[3].data()};
    simd::active_kernels().quat_mul(pa, pb, po, a.size());
    return out;
}

QuatField quat_mul(const Quaternion& a, const QuatField& b) { return quat_mul(quat_constant(b.grid, a), b); }
QuatField quat_mul(const QuatField& a, const Quaternion& b) { return quat_mul(a, quat_constant(a.grid, b)); }

QuatField quat_conj(const QuatField& a) {
    QuatField out = a;
    for (int c = 1; c < 4; ++c)
        for (double& v : out.comp[c]) v = -v;
    return out;
}

QuatField quat_inverse(const QuatField& a) {
    QuatField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a.at(i).inverse());
    return out;
}

QuatField quat_exp(const QuatField& u) {
    QuatField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.set(i, quat_exp(u.at(i)));
    return out;
}

QuatField quat_pi_i(const QuatField& a) {
    QuatField out(a.grid);
    out.comp[1] = a.comp[1];
    return out;
}

QuatField quat_pi_jk(const QuatField& a) {
    QuatField out(a.grid);
    out.comp[2] = a.comp[2];
    out.comp[3] = a.comp[3];
    return out;
}

RealField quat_abs(const QuatField& a) {
    RealField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.at(i).norm();
    return out;
}

RealMatrixField matmul(const RealMatrixField& a, const RealMatrixField& b) {
    require_same_grid(a.grid, b.grid);
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    RealMatrixField out(a.grid, a.rows, b.cols);
    const std::size_t n = a.grid.size();
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            auto& o = out(i, j).values;
            for (int k = 0; k < a.cols; ++k) {
                const auto& x = a(i, k).values;
                const auto& y = b(k, j).values;
                for (std::size_t p = 0; p < n; ++p) o[p] += x[p] * y[p];
            }
        }
    return out;
}

RealMatrixField transpose(const RealMatrixField& a) {
    RealMatrixField out(a.grid, a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

RealMatrixField identity_field(const Grid2& g, int n) {
    RealMatrixField out(g, n, n);
    for (int i = 0; i < n; ++i) out(i, i) = RealField(g, 1.0);
    return out;
}

std::vector<RealField> matvec(const RealMatrixField& a, const std::vector<RealField>& v) {
    if (static_cast<int>(v.size()) != a.cols) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<RealField> out(a.rows, RealField(a.grid));
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            require_same_grid(a.grid, v[k].grid);
            const auto& x = a(i, k).values;
            const auto& y = v[k].values;
            auto& o = out[i].values;
            for (std::size_t p = 0; p < o.size(); ++p) o[p] += x[p] * y[p];
        }
    return out;
}

RealMatrixField constant_matrix_field(const Grid2& g, int rows, int cols, const std::vector<double>& row_major) {
    if (static_cast<int>(row_major.size()) != rows * cols) throw std::invalid_argument("constant_matrix_field: size");
    RealMatrixField out(g, rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = RealField(g, row_major[i * cols + j]);
    return out;
}

double max_abs(const RealField& f) { return simd::active_kernels().max_abs(f.data(), f.size()); }
double max_abs(const ComplexField& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double l2(const RealField& f) {
    return std::sqrt(simd::active_kernels().sum_sq(f.data(), f.size()) * f.grid.cell_measure());
}
double l2(const ComplexField& f) {
    return std::sqrt(simd::active_kernels().sum_sq(reinterpret_cast<const double*>(f.data()), 2 * f.size()) *
                     f.grid.cell_measure());
}
double l2(const QuatField& f) {
    double s = 0.0;
    for (const auto& c : f.comp) s += simd::active_kernels().sum_sq(c.data(), c.size());
    return std::sqrt(s * f.grid.cell_measure());
}
double l2(const std::vector<RealField>& fs) {
    double s = 0.0;
    for (const auto& f : fs) s += simd::active_kernels().sum_sq(f.data(), f.size()) * f.grid.cell_measure();
    return std::sqrt(s);
}
double l2(const RealMatrixField& m) { return l2(m.entries); }
double l2(const ComplexMatrixField& m) {
    double s = 0.0;
    for (const auto& f : m.entries) s += std::pow(l2(f), 2);
    return std::sqrt(s);
}
double inner(const RealField& a, const RealField& b) {
    require_same_grid(a.grid, b.grid);
    return simd::active_kernels().dot(a.data(), b.data(), a.size()) * a.grid.cell_measure();
}

}  // namespace chirality_lab
