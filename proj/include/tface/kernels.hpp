#pragma once

#include <cstddef>
#include <string>

namespace tface::kernels {

// ---------------------------------------------------------------------------
// Runtime ISA selection.
//
// Every kernel below has a scalar reference implementation and, on x86-64
// hardware with AVX2+FMA, a vectorized variant. The active level is detected
// once at startup and can be forced (tests pin it to compare variants).
// ---------------------------------------------------------------------------

enum class IsaLevel { scalar = 0, avx2 = 1 };

/// True when the running CPU can execute the AVX2+FMA kernels.
bool avx2_supported();

/// Currently dispatched level.
IsaLevel active_level();

/// Force a level (throws ParameterError if unsupported on this CPU).
void force_level(IsaLevel level);

/// Re-detect and select the best supported level.
void reset_level();

std::string level_name(IsaLevel level);

// ---------------------------------------------------------------------------
// Dispatched kernels.
// ---------------------------------------------------------------------------

double sum(const double* a, size_t n);
double dot(const double* a, const double* b, size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, size_t n);

/// out[i] = a[i] - b[i]
void sub(const double* a, const double* b, double* out, size_t n);

/// out[i] = a[i] * b[i]
void mul(const double* a, const double* b, double* out, size_t n);

/// acc[i] = max(acc[i], x[i])
void max_inplace(double* acc, const double* x, size_t n);

/// Correlation of a padded row with (2*radius+1) taps:
///   out[i] = sum_j taps[j] * padded[i + j],  j in [0, 2*radius]
/// `padded` must hold n_out + 2*radius samples.
void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out);

/// Five joint reductions used by normalized cross-correlation:
/// {sum a, sum b, dot ab, dot aa, dot bb}.
struct Moments2 {
    double sum_a = 0.0, sum_b = 0.0;
    double dot_ab = 0.0, dot_aa = 0.0, dot_bb = 0.0;
};
Moments2 moments2(const double* a, const double* b, size_t n);

// ---------------------------------------------------------------------------
// Direct access to the per-ISA variants (for equivalence tests).
// ---------------------------------------------------------------------------

namespace scalar {
double sum(const double* a, size_t n);
double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
void sub(const double* a, const double* b, double* out, size_t n);
void mul(const double* a, const double* b, double* out, size_t n);
void max_inplace(double* acc, const double* x, size_t n);
void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out);
Moments2 moments2(const double* a, const double* b, size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TFACE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double sum(const double* a, size_t n);
double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
void sub(const double* a, const double* b, double* out, size_t n);
void mul(const double* a, const double* b, double* out, size_t n);
void max_inplace(double* acc, const double* x, size_t n);
void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out);
Moments2 moments2(const double* a, const double* b, size_t n);
}  // namespace avx2
#endif

}  // namespace tface::kernels
