#include "tface/enhance.hpp"

#include <cmath>
#include <vector>

#include "tface/kernels.hpp"

namespace tface::enhance {

namespace {

void validate(const ImageGrid& img, const DiffusionParams& p) {
    if (img.empty()) throw ParameterError("diffuse: empty image");
    if (p.k <= 0.0) throw ParameterError("diffuse: k must be positive");
    if (p.step <= 0.0 || p.step > 0.25)
        throw ParameterError("diffuse: step must lie in (0, 0.25]");
    if (p.iterations < 0) throw ParameterError("diffuse: negative iteration count");
}

inline double conductance(double g, const DiffusionParams& p) {
    if (p.conductance == Conductance::paper) return std::exp(-g / (p.k * p.k));
    const double r = g / p.k;
    return std::exp(-r * r);
}

/// Edge conductances from image `src`: ch has (w-1)*h horizontal edges,
/// cv has w*(h-1) vertical edges. The gradient estimate at an edge midpoint
/// is the difference across that edge.
void edge_conductances(const ImageGrid& src, const DiffusionParams& p,
                       std::vector<double>& ch, std::vector<double>& cv) {
    const int w = src.width(), h = src.height();
    ch.assign(static_cast<size_t>(w - 1) * h, 0.0);
    cv.assign(static_cast<size_t>(w) * (h - 1), 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = src.row(y);
        double* che = ch.data() + static_cast<size_t>(y) * (w - 1);
        for (int x = 0; x + 1 < w; ++x)
            che[x] = conductance(std::abs(row[x + 1] - row[x]), p);
    }
    for (int y = 0; y + 1 < h; ++y) {
        const double* row = src.row(y);
        const double* next = src.row(y + 1);
        double* cve = cv.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            cve[x] = conductance(std::abs(next[x] - row[x]), p);
    }
}

}  // namespace

ImageGrid diffuse(const ImageGrid& img, const DiffusionParams& params) {
    validate(img, params);
    const int w = img.width(), h = img.height();
    ImageGrid cur = img;
    if (params.iterations == 0) return cur;

    std::vector<double> ch, cv;
    if (params.update == ConductanceUpdate::frozen)
        edge_conductances(img, params, ch, cv);

    for (int it = 0; it < params.iterations; ++it) {
        if (params.update == ConductanceUpdate::per_step)
            edge_conductances(cur, params, ch, cv);
        ImageGrid next = cur;
        // each edge flux is added to one endpoint and subtracted from the
        // other with the same rounded value, so the total is conserved
        for (int y = 0; y < h; ++y) {
            const double* row = cur.row(y);
            double* out = next.row(y);
            const double* che = ch.data() + static_cast<size_t>(y) * (w - 1);
            for (int x = 0; x + 1 < w; ++x) {
                const double f = params.step * che[x] * (row[x + 1] - row[x]);
                out[x] += f;
                out[x + 1] -= f;
            }
        }
        for (int y = 0; y + 1 < h; ++y) {
            const double* row = cur.row(y);
            const double* rnext = cur.row(y + 1);
            double* out = next.row(y);
            double* onext = next.row(y + 1);
            const double* cve = cv.data() + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                const double f = params.step * cve[x] * (rnext[x] - row[x]);
                out[x] += f;
                onext[x] -= f;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

ImageGrid enhance_detail(const ImageGrid& img, const DiffusionParams& params) {
    const ImageGrid smooth = diffuse(img, params);
    ImageGrid detail(img.width(), img.height());
    kernels::sub(img.data(), smooth.data(), detail.data(), img.size());
    return detail;
}

}  // namespace tface::enhance
