#pragma once

#include <vector>

#include "tface/grid.hpp"

namespace tface {

/// Eigenvalues of a symmetric 2x2 matrix, ordered |l1| <= |l2|.
struct EigenPair {
    double l1 = 0.0;
    double l2 = 0.0;
};

/// Second-derivative responses at one scale, gamma-normalized.
struct HessianField {
    ImageGrid lxx, lxy, lyy;
    double scale = 0.0;
};

/// Sampled Gaussian (derivative) taps, radius = ceil(4*sigma).
/// order 0 taps are normalized to unit sum; order 2 taps are DC-corrected to
/// zero sum; order 1 taps are antisymmetric by construction.
std::vector<double> gaussian_taps(double sigma, int order);

/// Separable Gaussian-derivative filtering with reflect-101 borders and
/// gamma=2 scale normalization (response multiplied by scale^(ox+oy)).
/// Orders 0..2 per axis, ox+oy <= 2.
ImageGrid gaussian_derivative(const ImageGrid& img, double scale, int ox, int oy);

/// (lxx, lxy, lyy) at one scale via three separable passes.
HessianField hessian_at_scale(const ImageGrid& img, double scale);

/// Closed-form symmetric 2x2 eigenvalues, ordered by magnitude.
EigenPair eigen2x2_ordered(double a, double b, double c);

}  // namespace tface
