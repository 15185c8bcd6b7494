#include "tface/kernels.hpp"

#include <algorithm>

namespace tface::kernels::scalar {

double sum(const double* a, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double dot(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sub(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void max_inplace(double* acc, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out) {
    const int w = 2 * radius + 1;
    for (size_t i = 0; i < n_out; ++i) {
        double s = 0.0;
        for (int j = 0; j < w; ++j) s += taps[j] * padded[i + j];
        out[i] = s;
    }
}

Moments2 moments2(const double* a, const double* b, size_t n) {
    Moments2 m;
    for (size_t i = 0; i < n; ++i) {
        m.sum_a += a[i];
        m.sum_b += b[i];
        m.dot_ab += a[i] * b[i];
        m.dot_aa += a[i] * a[i];
        m.dot_bb += b[i] * b[i];
    }
    return m;
}

}  // namespace tface::kernels::scalar
