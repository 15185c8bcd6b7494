// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must gate on kernels::avx2_supported().

#include "tface/kernels.hpp"

#if defined(TFACE_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>

namespace tface::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double sum(const double* a, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double dot(const double* a, const double* b, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void sub(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void max_inplace(double* acc, const double* x, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(acc + i,
                         _mm256_max_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out) {
    const int w = 2 * radius + 1;
    size_t i = 0;
    for (; i + 4 <= n_out; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int j = 0; j < w; ++j)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[j]),
                                  _mm256_loadu_pd(padded + i + j), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n_out; ++i) {
        double s = 0.0;
        for (int j = 0; j < w; ++j) s += taps[j] * padded[i + j];
        out[i] = s;
    }
}

Moments2 moments2(const double* a, const double* b, size_t n) {
    __m256d sa = _mm256_setzero_pd();
    __m256d sb = _mm256_setzero_pd();
    __m256d dab = _mm256_setzero_pd();
    __m256d daa = _mm256_setzero_pd();
    __m256d dbb = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        sa = _mm256_add_pd(sa, va);
        sb = _mm256_add_pd(sb, vb);
        dab = _mm256_fmadd_pd(va, vb, dab);
        daa = _mm256_fmadd_pd(va, va, daa);
        dbb = _mm256_fmadd_pd(vb, vb, dbb);
    }
    Moments2 m;
    m.sum_a = hsum(sa);
    m.sum_b = hsum(sb);
    m.dot_ab = hsum(dab);
    m.dot_aa = hsum(daa);
    m.dot_bb = hsum(dbb);
    for (; i < n; ++i) {
        m.sum_a += a[i];
        m.sum_b += b[i];
        m.dot_ab += a[i] * b[i];
        m.dot_aa += a[i] * a[i];
        m.dot_bb += b[i] * b[i];
    }
    return m;
}

}  // namespace tface::kernels::avx2

#endif  // TFACE_HAVE_AVX2_KERNELS
