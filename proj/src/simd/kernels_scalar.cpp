#include <algorithm>
#include <cmath>

#include "chirality_lab/simd_kernels.hpp"

namespace chirality_lab::simd {
namespace {

void cmul_inplace(std::complex<double>* data, const std::complex<double>* sym, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double a = data[i].real(), b = data[i].imag();
        const double c = sym[i].real(), d = sym[i].imag();
        data[i] = {a * c - b * d, a * d + b * c};
    }
}

void rscale(std::complex<double>* out, const std::complex<double>* data, const double* sym, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = {data[i].real() * sym[i], data[i].imag() * sym[i]};
}

double sum_sq(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void quat_mul(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double a0 = a[0][i], a1 = a[1][i], a2 = a[2][i], a3 = a[3][i];
        const double b0 = b[0][i], b1 = b[1][i], b2 = b[2][i], b3 = b[3][i];
        out[0][i] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        out[1][i] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
        out[2][i] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
        out[3][i] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
    }
}

void quat_mul_add(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double a0 = a[0][i], a1 = a[1][i], a2 = a[2][i], a3 = a[3][i];
        const double b0 = b[0][i], b1 = b[1][i], b2 = b[2][i], b3 = b[3][i];
        out[0][i] += a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        out[1][i] += a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
        out[2][i] += a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
        out[3][i] += a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", cmul_inplace, rscale, sum_sq, dot, max_abs, axpy, quat_mul, quat_mul_add};
    return table;
}

}  // namespace chirality_lab::simd
