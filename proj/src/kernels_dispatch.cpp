#include "tface/kernels.hpp"

#include <atomic>

#include "tface/errors.hpp"

namespace tface::kernels {

namespace {

IsaLevel detect_best() {
#if defined(TFACE_HAVE_AVX2_KERNELS)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return IsaLevel::avx2;
#endif
    return IsaLevel::scalar;
}

std::atomic<IsaLevel> g_level{detect_best()};

}  // namespace

bool avx2_supported() {
#if defined(TFACE_HAVE_AVX2_KERNELS)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

IsaLevel active_level() { return g_level.load(std::memory_order_relaxed); }

void force_level(IsaLevel level) {
    if (level == IsaLevel::avx2 && !avx2_supported())
        throw ParameterError("kernels: AVX2 not supported on this CPU");
    g_level.store(level, std::memory_order_relaxed);
}

void reset_level() { g_level.store(detect_best(), std::memory_order_relaxed); }

std::string level_name(IsaLevel level) {
    return level == IsaLevel::avx2 ? "avx2" : "scalar";
}

#if defined(TFACE_HAVE_AVX2_KERNELS)
#define TFACE_DISPATCH(fn, ...)                          \
    (active_level() == IsaLevel::avx2 ? avx2::fn(__VA_ARGS__) \
                                      : scalar::fn(__VA_ARGS__))
#else
#define TFACE_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum(const double* a, size_t n) { return TFACE_DISPATCH(sum, a, n); }

double dot(const double* a, const double* b, size_t n) {
    return TFACE_DISPATCH(dot, a, b, n);
}

void axpy(double alpha, const double* x, double* y, size_t n) {
    TFACE_DISPATCH(axpy, alpha, x, y, n);
}

void sub(const double* a, const double* b, double* out, size_t n) {
    TFACE_DISPATCH(sub, a, b, out, n);
}

void mul(const double* a, const double* b, double* out, size_t n) {
    TFACE_DISPATCH(mul, a, b, out, n);
}

void max_inplace(double* acc, const double* x, size_t n) {
    TFACE_DISPATCH(max_inplace, acc, x, n);
}

void conv_row(const double* padded, size_t n_out, const double* taps, int radius,
              double* out) {
    TFACE_DISPATCH(conv_row, padded, n_out, taps, radius, out);
}

Moments2 moments2(const double* a, const double* b, size_t n) {
    return TFACE_DISPATCH(moments2, a, b, n);
}

#undef TFACE_DISPATCH

}  // namespace tface::kernels
