#include "tface/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tface::segment {

StructElem circular_structuring_element(double radius) {
    if (radius < 0.0) throw ParameterError("structuring element: negative radius");
    StructElem e;
    e.radius = radius;
    e.radius_cells = static_cast<int>(std::floor(radius));
    const int r = e.radius_cells;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= radius * radius) e.offsets.emplace_back(dx, dy);
    return e;
}

BinaryMask threshold_band(const ImageGrid& img, double t_low, double t_high) {
    if (img.empty()) throw ParameterError("threshold_band: empty image");
    if (t_low > t_high) throw ParameterError("threshold_band: t_low > t_high");
    BinaryMask mask(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i)
        mask[i] = (img[i] >= t_low && img[i] <= t_high) ? 1 : 0;
    return mask;
}

double otsu_threshold(const ImageGrid& img) {
    if (img.empty()) throw ParameterError("otsu_threshold: empty image");
    double lo = img[0], hi = img[0];
    for (size_t i = 1; i < img.size(); ++i) {
        lo = std::min(lo, img[i]);
        hi = std::max(hi, img[i]);
    }
    if (hi <= lo) return lo;

    constexpr int kBins = 256;
    std::vector<size_t> hist(kBins, 0);
    const double scale = kBins / (hi - lo);
    for (size_t i = 0; i < img.size(); ++i) {
        int b = static_cast<int>((img[i] - lo) * scale);
        b = std::clamp(b, 0, kBins - 1);
        ++hist[b];
    }

    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * static_cast<double>(hist[b]);

    double best_var = -1.0;
    int best_bin = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (int b = 0; b < kBins - 1; ++b) {
        w0 += static_cast<double>(hist[b]);
        if (w0 == 0.0) continue;
        const double w1 = total - w0;
        if (w1 == 0.0) break;
        sum0 += b * static_cast<double>(hist[b]);
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best_var) {
            best_var = between;
            best_bin = b;
        }
    }
    // threshold at the upper edge of the chosen bin
    return lo + (best_bin + 1) / scale;
}

namespace {

enum class MorphOp { erode, dilate };

BinaryMask morph(const BinaryMask& mask, const StructElem& elem, MorphOp op) {
    if (mask.empty()) throw ParameterError("morphology: empty mask");
    const int w = mask.width(), h = mask.height();
    BinaryMask out(w, h);
    if (op == MorphOp::erode) {
        // out[z] = 1 iff every elem cell translated to z lies inside and is set
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                uint8_t v = 1;
                for (const auto& [dx, dy] : elem.offsets) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || !mask.at(nx, ny)) {
                        v = 0;
                        break;
                    }
                }
                out.at(x, y) = v;
            }
    } else {
        // out = union of elem translated to every set pixel
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!mask.at(x, y)) continue;
                for (const auto& [dx, dy] : elem.offsets) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && ny >= 0 && nx < w && ny < h) out.at(nx, ny) = 1;
                }
            }
    }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructElem& elem) {
    return morph(mask, elem, MorphOp::erode);
}

BinaryMask dilate(const BinaryMask& mask, const StructElem& elem) {
    return morph(mask, elem, MorphOp::dilate);
}

BinaryMask morph_open(const BinaryMask& mask, const StructElem& elem) {
    // erosion only shrinks, dilation regrows inside the domain: plane
    // semantics hold without padding
    return dilate(erode(mask, elem), elem);
}

BinaryMask morph_close(const BinaryMask& mask, const StructElem& elem) {
    // dilation may grow past the domain; erode on a padded canvas so the
    // in-domain result matches the set-theoretic (infinite plane) closing —
    // that is what keeps extensivity and idempotence exact at borders
    const int pad = elem.radius_cells;
    const int w = mask.width(), h = mask.height();
    BinaryMask padded(w + 2 * pad, h + 2 * pad);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) padded.at(x + pad, y + pad) = mask.at(x, y);
    const BinaryMask closed = erode(dilate(padded, elem), elem);
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = closed.at(x + pad, y + pad);
    return out;
}

SegmentResult segment_face(const ImageGrid& img, const SegmentParams& params) {
    if (img.empty()) throw ParameterError("segment_face: empty image");
    if (params.elem_area_fraction <= 0.0)
        throw ParameterError("segment_face: element area fraction must be positive");

    const double t_low = params.t_low ? *params.t_low : otsu_threshold(img);
    BinaryMask provisional = threshold_band(img, t_low, params.t_high);
    if (provisional.count() == 0)
        throw SegmentationError("segment_face: threshold band selected no pixels");

    const MaskMoments mom = mask_moments(provisional);
    const double ellipse_area = moment_ellipse_area(mom);
    const double elem_area = params.elem_area_fraction * ellipse_area;
    // disc radius realizing that area; at least one cell so the element
    // always contains its center
    const double radius = std::max(1.0, std::sqrt(elem_area / M_PI));
    const StructElem elem = circular_structuring_element(radius);

    SegmentResult res;
    res.mask = morph_close(morph_open(provisional, elem), elem);
    res.segmented = ImageGrid(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i)
        res.segmented[i] = res.mask[i] ? img[i] : 0.0;
    return res;
}

}  // namespace tface::segment
