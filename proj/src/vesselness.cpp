#include "tface/vesselness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tface/kernels.hpp"
#include "tface/scalespace.hpp"
#include "tface/segment.hpp"

namespace tface::vessel {

namespace {

void validate(const ImageGrid& img, double beta) {
    if (img.empty()) throw ParameterError("vesselness: empty image");
    if (beta <= 0.0) throw ParameterError("vesselness: beta must be positive");
}

ImageGrid response_from_hessian(const HessianField& h, double beta, double c) {
    if (c <= 0.0) throw ParameterError("vesselness: c must be positive");
    ImageGrid out(h.lxx.width(), h.lxx.height());
    const double inv_2b2 = 1.0 / (2.0 * beta * beta);
    const double inv_2c2 = 1.0 / (2.0 * c * c);
    for (size_t i = 0; i < out.size(); ++i) {
        const EigenPair e = eigen2x2_ordered(h.lxx[i], h.lxy[i], h.lyy[i]);
        // bright ridges only: the large eigenvalue must be negative
        if (e.l2 >= 0.0) continue;
        const double ra = std::abs(e.l1) / std::abs(e.l2);
        const double s2 = e.l1 * e.l1 + e.l2 * e.l2;
        out[i] = std::exp(-ra * ra * inv_2b2) * (1.0 - std::exp(-s2 * inv_2c2));
    }
    return out;
}

double max_frobenius(const HessianField& h) {
    double m = 0.0;
    for (size_t i = 0; i < h.lxx.size(); ++i) {
        const EigenPair e = eigen2x2_ordered(h.lxx[i], h.lxy[i], h.lyy[i]);
        m = std::max(m, std::sqrt(e.l1 * e.l1 + e.l2 * e.l2));
    }
    return m;
}

}  // namespace

ImageGrid vesselness_at_scale(const ImageGrid& img, double scale, double beta,
                              double c) {
    validate(img, beta);
    return response_from_hessian(hessian_at_scale(img, scale), beta, c);
}

ImageGrid vesselness_multiscale(const ImageGrid& img, const VesselnessParams& params) {
    validate(img, params.beta);
    if (params.scales.empty())
        throw ParameterError("vesselness: at least one scale required");
    if (params.c && *params.c <= 0.0)
        throw ParameterError("vesselness: c must be positive");

    std::vector<HessianField> fields;
    fields.reserve(params.scales.size());
    for (double s : params.scales) fields.push_back(hessian_at_scale(img, s));

    double c = params.c.value_or(0.0);
    if (!params.c) {
        double m = 0.0;
        for (const auto& f : fields) m = std::max(m, max_frobenius(f));
        // A maximum at the convolution-roundoff scale of the input means the
        // image has no curvature anywhere; normalizing by it would amplify
        // that noise to order one. Fall back to a fixed c instead (any
        // positive value gives the same all-zero output).
        double amp = 0.0;
        for (size_t i = 0; i < img.size(); ++i) amp = std::max(amp, std::abs(img[i]));
        c = m > 1e-9 * amp ? 0.5 * m : 1.0;
    }

    ImageGrid acc = response_from_hessian(fields[0], params.beta, c);
    for (size_t k = 1; k < fields.size(); ++k) {
        const ImageGrid r = response_from_hessian(fields[k], params.beta, c);
        kernels::max_inplace(acc.data(), r.data(), acc.size());
    }
    return acc;
}

ImageGrid extend_foreground(const ImageGrid& segmented) {
    const int w = segmented.width();
    const int h = segmented.height();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kDiag = 1.4142135623730951;

    ImageGrid out = segmented;
    std::vector<double> dist(segmented.size(), kInf);
    bool any = false;
    for (size_t i = 0; i < segmented.size(); ++i)
        if (segmented[i] != 0.0) {
            dist[i] = 0.0;
            any = true;
        }
    if (!any) return out;

    auto relax = [&](size_t i, size_t j, double step) {
        if (dist[j] + step < dist[i]) {
            dist[i] = dist[j] + step;
            out[i] = out[j];
        }
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (x > 0) relax(i, i - 1, 1.0);
            if (y > 0) {
                relax(i, i - w, 1.0);
                if (x > 0) relax(i, i - w - 1, kDiag);
                if (x < w - 1) relax(i, i - w + 1, kDiag);
            }
        }
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (x < w - 1) relax(i, i + 1, 1.0);
            if (y < h - 1) {
                relax(i, i + w, 1.0);
                if (x < w - 1) relax(i, i + w + 1, kDiag);
                if (x > 0) relax(i, i + w - 1, kDiag);
            }
        }
    return out;
}

ImageGrid extract_signature(const ImageGrid& segmented_raw,
                            const geom::ShapeInstance& fitted_shape,
                            const aam::AamModel& model,
                            const VesselnessParams& params) {
    const ImageGrid vmap = vesselness_multiscale(extend_foreground(segmented_raw), params);
    const auto warp = geom::build_warp(model.shape.mesh, model.shape.mean_shape,
                                       fitted_shape);
    ImageGrid sig = geom::warp_image(vmap, warp, model.appearance.frame_width,
                                     model.appearance.frame_height);
    // warp already zeroes everything outside the source triangles, which is
    // exactly the mesh interior of the canonical frame
    return sig;
}

ImageGrid extract_signature(const ImageGrid& segmented_raw, const aam::FitResult& fit,
                            const aam::AamModel& model,
                            const VesselnessParams& params) {
    return extract_signature(segmented_raw, model.shape_from_params(fit.p), model,
                             params);
}

BinaryMask signature_mask(const aam::AamModel& model,
                          const VesselnessParams& params) {
    if (params.scales.empty())
        throw ParameterError("signature_mask: at least one scale required");
    const double smax = *std::max_element(params.scales.begin(), params.scales.end());
    if (smax <= 0.0) throw ParameterError("signature_mask: scales must be positive");
    const auto elem = segment::circular_structuring_element(2.0 * smax);
    return segment::erode(model.interior_mask(), elem);
}

}  // namespace tface::vessel
