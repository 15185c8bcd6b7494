#include "tface/grid.hpp"

#include <cmath>

namespace tface {

MaskMoments mask_moments(const BinaryMask& mask) {
    MaskMoments m;
    double sx = 0.0, sy = 0.0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++m.area;
            }
    if (m.area == 0) return m;
    m.cx = sx / static_cast<double>(m.area);
    m.cy = sy / static_cast<double>(m.area);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                const double dx = x - m.cx;
                const double dy = y - m.cy;
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
            }
    m.cxx = sxx / static_cast<double>(m.area);
    m.cyy = syy / static_cast<double>(m.area);
    m.cxy = sxy / static_cast<double>(m.area);
    return m;
}

double moment_ellipse_area(const MaskMoments& m) {
    // Semi-axes of the same-second-moments ellipse are 2*sqrt(eigenvalue),
    // so area = pi * 4 * sqrt(det(covariance)).
    const double det = m.cxx * m.cyy - m.cxy * m.cxy;
    if (det <= 0.0) return 0.0;
    return 4.0 * M_PI * std::sqrt(det);
}

}  // namespace tface
