#include "tface/scalespace.hpp"

#include <cmath>
#include <cstdlib>

#include "tface/kernels.hpp"

namespace tface {

namespace {

/// reflect-101 fold of index i into [0, n-1] (no edge duplication).
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    int m = std::abs(i) % period;
    return m < n ? m : period - m;
}

/// Pads `src` (stride-able) into `dst` with `radius` mirrored samples per side.
void pad_line(const double* src, int n, int stride, int radius, double* dst) {
    for (int i = -radius; i < n + radius; ++i)
        dst[i + radius] = src[static_cast<size_t>(mirror_index(i, n)) * stride];
}

/// Separable pass along x then y with per-axis taps.
ImageGrid separable_filter(const ImageGrid& img, const std::vector<double>& tx,
                           const std::vector<double>& ty) {
    const int w = img.width(), h = img.height();
    const int rx = (static_cast<int>(tx.size()) - 1) / 2;
    const int ry = (static_cast<int>(ty.size()) - 1) / 2;

    ImageGrid tmp(w, h);
    std::vector<double> pad(static_cast<size_t>(std::max(w, h)) + 2 * std::max(rx, ry));
    for (int y = 0; y < h; ++y) {
        pad_line(img.row(y), w, 1, rx, pad.data());
        kernels::conv_row(pad.data(), static_cast<size_t>(w), tx.data(), rx, tmp.row(y));
    }

    ImageGrid out(w, h);
    std::vector<double> col(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        pad_line(tmp.data() + x, h, w, ry, pad.data());
        kernels::conv_row(pad.data(), static_cast<size_t>(h), ty.data(), ry, col.data());
        for (int y = 0; y < h; ++y) out.at(x, y) = col[y];
    }
    return out;
}

}  // namespace

std::vector<double> gaussian_taps(double sigma, int order) {
    if (sigma <= 0.0) throw ParameterError("gaussian_taps: scale must be positive");
    if (order < 0 || order > 2) throw ParameterError("gaussian_taps: order must be 0..2");
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    const int n = 2 * radius + 1;
    std::vector<double> taps(n);
    const double s2 = sigma * sigma;
    for (int i = -radius; i <= radius; ++i) {
        const double g = std::exp(-0.5 * i * i / s2) / (std::sqrt(2.0 * M_PI) * sigma);
        double v = g;
        if (order == 1)
            v = -i / s2 * g;
        else if (order == 2)
            v = (i * i / (s2 * s2) - 1.0 / s2) * g;
        taps[i + radius] = v;
    }
    if (order == 0) {
        double s = 0.0;
        for (double v : taps) s += v;
        for (double& v : taps) v /= s;
    } else if (order == 2) {
        double s = 0.0;
        for (double v : taps) s += v;
        const double corr = s / n;
        for (double& v : taps) v -= corr;
    }
    return taps;
}

ImageGrid gaussian_derivative(const ImageGrid& img, double scale, int ox, int oy) {
    if (img.empty()) throw ParameterError("gaussian_derivative: empty image");
    if (ox + oy > 2) throw ParameterError("gaussian_derivative: total order must be <= 2");
    const auto tx = gaussian_taps(scale, ox);
    const auto ty = gaussian_taps(scale, oy);
    ImageGrid out = separable_filter(img, tx, ty);
    // gamma = 2 normalization: responses comparable across scales.
    const double norm = std::pow(scale, ox + oy);
    if (norm != 1.0)
        for (size_t i = 0; i < out.size(); ++i) out[i] *= norm;
    return out;
}

HessianField hessian_at_scale(const ImageGrid& img, double scale) {
    HessianField f;
    f.scale = scale;
    f.lxx = gaussian_derivative(img, scale, 2, 0);
    f.lxy = gaussian_derivative(img, scale, 1, 1);
    f.lyy = gaussian_derivative(img, scale, 0, 2);
    return f;
}

EigenPair eigen2x2_ordered(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double delta = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    double e1 = mean - delta;
    double e2 = mean + delta;
    if (std::abs(e1) > std::abs(e2)) std::swap(e1, e2);
    return {e1, e2};
}

}  // namespace tface
