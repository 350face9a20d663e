#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace chirality_lab::simd {

// Data-parallel inner loops. Complex arrays are interleaved (re, im) pairs.
struct KernelTable {
    const char* name;
    // data[i] *= sym[i] (complex symbol)
    void (*cmul_inplace)(std::complex<double>* data, const std::complex<double>* sym, std::size_t n);
    // out[i] = data[i] * sym[i] (real symbol)
    void (*rscale)(std::complex<double>* out, const std::complex<double>* data, const double* sym, std::size_t n);
    // sum of |x_i|^2
    double (*sum_sq)(const double* x, std::size_t n);
    // sum of x_i y_i
    double (*dot)(const double* x, const double* y, std::size_t n);
    // max |x_i|
    double (*max_abs)(const double* x, std::size_t n);
    // y += a x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // Hamilton product of two component-wise quaternion arrays.
    void (*quat_mul)(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n);
    // out += a b with the same Hamilton product.
    void (*quat_mul_add)(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();

// Runtime selection: AVX2 when compiled and supported, unless CHIRALITY_LAB_SIMD=scalar.
const KernelTable& active_kernels();
// Force a variant ("scalar" or "avx2"); returns false if unavailable.
bool select_kernels(const std::string& name);

}  // namespace chirality_lab::simd
