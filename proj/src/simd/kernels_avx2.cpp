#include <algorithm>
#include <cmath>

#include "chirality_lab/simd_kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace chirality_lab::simd {
namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Two complex numbers per register: [a0 b0 a1 b1].
void cmul_inplace(std::complex<double>* data, const std::complex<double>* sym, std::size_t n) {
    auto* d = reinterpret_cast<double*>(data);
    const auto* s = reinterpret_cast<const double*>(sym);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(d + 2 * i);
        __m256d y = _mm256_loadu_pd(s + 2 * i);
        __m256d yre = _mm256_movedup_pd(y);           // c c
        __m256d yim = _mm256_permute_pd(y, 0xF);      // d d
        __m256d xsw = _mm256_permute_pd(x, 0x5);      // b a
        __m256d t1 = _mm256_mul_pd(x, yre);           // ac bc
        __m256d t2 = _mm256_mul_pd(xsw, yim);         // bd ad
        _mm256_storeu_pd(d + 2 * i, _mm256_addsub_pd(t1, t2));  // ac-bd, bc+ad
    }
    for (; i < n; ++i) {
        const double a = data[i].real(), b = data[i].imag();
        const double c = sym[i].real(), e = sym[i].imag();
        data[i] = {a * c - b * e, a * e + b * c};
    }
}

void rscale(std::complex<double>* out, const std::complex<double>* data, const double* sym, std::size_t n) {
    auto* o = reinterpret_cast<double*>(out);
    const auto* d = reinterpret_cast<const double*>(data);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m128d s2 = _mm_loadu_pd(sym + i);
        __m256d s = _mm256_permute4x64_pd(_mm256_castpd128_pd256(s2), 0x50);  // s0 s0 s1 s1
        _mm256_storeu_pd(o + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i), s));
    }
    for (; i < n; ++i) out[i] = {data[i].real() * sym[i], data[i].imag() * sym[i]};
}

double sum_sq(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a = _mm256_loadu_pd(x + i), b = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double max_abs(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) r = std::max(r, std::abs(x[i]));
    return r;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    for (; i < n; ++i) y[i] += a * x[i];
}

void quat_mul(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = _mm256_loadu_pd(a[0] + i), a1 = _mm256_loadu_pd(a[1] + i);
        const __m256d a2 = _mm256_loadu_pd(a[2] + i), a3 = _mm256_loadu_pd(a[3] + i);
        const __m256d b0 = _mm256_loadu_pd(b[0] + i), b1 = _mm256_loadu_pd(b[1] + i);
        const __m256d b2 = _mm256_loadu_pd(b[2] + i), b3 = _mm256_loadu_pd(b[3] + i);
        __m256d r0 = _mm256_sub_pd(_mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(a0, b0), _mm256_mul_pd(a1, b1)),
                                                 _mm256_mul_pd(a2, b2)), _mm256_mul_pd(a3, b3));
        __m256d r1 = _mm256_sub_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a0, b1), _mm256_mul_pd(a1, b0)),
                                                 _mm256_mul_pd(a2, b3)), _mm256_mul_pd(a3, b2));
        __m256d r2 = _mm256_add_pd(_mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(a0, b2), _mm256_mul_pd(a1, b3)),
                                                 _mm256_mul_pd(a2, b0)), _mm256_mul_pd(a3, b1));
        __m256d r3 = _mm256_add_pd(_mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(a0, b3), _mm256_mul_pd(a1, b2)),
                                                 _mm256_mul_pd(a2, b1)), _mm256_mul_pd(a3, b0));
        _mm256_storeu_pd(out[0] + i, r0);
        _mm256_storeu_pd(out[1] + i, r1);
        _mm256_storeu_pd(out[2] + i, r2);
        _mm256_storeu_pd(out[3] + i, r3);
    }
    for (; i < n; ++i) {
        const double a0 = a[0][i], a1 = a[1][i], a2 = a[2][i], a3 = a[3][i];
        const double b0 = b[0][i], b1 = b[1][i], b2 = b[2][i], b3 = b[3][i];
        out[0][i] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        out[1][i] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
        out[2][i] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
        out[3][i] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
    }
}

void quat_mul_add(const double* const a[4], const double* const b[4], double* const out[4], std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = _mm256_loadu_pd(a[0] + i), a1 = _mm256_loadu_pd(a[1] + i);
        const __m256d a2 = _mm256_loadu_pd(a[2] + i), a3 = _mm256_loadu_pd(a[3] + i);
        const __m256d b0 = _mm256_loadu_pd(b[0] + i), b1 = _mm256_loadu_pd(b[1] + i);
        const __m256d b2 = _mm256_loadu_pd(b[2] + i), b3 = _mm256_loadu_pd(b[3] + i);
        __m256d r0 = _mm256_sub_pd(_mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(a0, b0), _mm256_mul_pd(a1, b1)),
                                                 _mm256_mul_pd(a2, b2)), _mm256_mul_pd(a3, b3));
        __m256d r1 = _mm256_sub_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a0, b1), _mm256_mul_pd(a1, b0)),
                                                 _mm256_mul_pd(a2, b3)), _mm256_mul_pd(a3, b2));
        __m256d r2 = _mm256_add_pd(_mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(a0, b2), _mm256_mul_pd(a1, b3)),
                                                 _mm256_mul_pd(a2, b0)), _mm256_mul_pd(a3, b1));
        __m256d r3 = _mm256_add_pd(_mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(a0, b3), _mm256_mul_pd(a1, b2)),
                                                 _mm256_mul_pd(a2, b1)), _mm256_mul_pd(a3, b0));
        _mm256_storeu_pd(out[0] + i, _mm256_add_pd(_mm256_loadu_pd(out[0] + i), r0));
        _mm256_storeu_pd(out[1] + i, _mm256_add_pd(_mm256_loadu_pd(out[1] + i), r1));
        _mm256_storeu_pd(out[2] + i, _mm256_add_pd(_mm256_loadu_pd(out[2] + i), r2));
        _mm256_storeu_pd(out[3] + i, _mm256_add_pd(_mm256_loadu_pd(out[3] + i), r3));
    }
    for (; i < n; ++i) {
        const double a0 = a[0][i], a1 = a[1][i], a2 = a[2][i], a3 = a[3][i];
        const double b0 = b[0][i], b1 = b[1][i], b2 = b[2][i], b3 = b[3][i];
        out[0][i] += a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        out[1][i] += a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
        out[2][i] += a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
        out[3][i] += a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
    }
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const KernelTable table{"avx2", cmul_inplace, rscale, sum_sq, dot, max_abs, axpy, quat_mul, quat_mul_add};
    return &table;
}

}  // namespace chirality_lab::simd

#else

namespace chirality_lab::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace chirality_lab::simd

#endif
