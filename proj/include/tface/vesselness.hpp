#pragma once

#include <optional>
#include <vector>

#include "tface/aam.hpp"
#include "tface/grid.hpp"

namespace tface::vessel {

struct VesselnessParams {
    std::vector<double> scales = {3.0, 4.0, 5.0};
    double beta = 0.5;          ///< anisotropy (blobiness) sensitivity
    std::optional<double> c;    ///< structureness sensitivity; empty -> half of
                                ///< the max Frobenius Hessian norm per call
};

/// Bright-ridge response at one scale:
///   0 when l2 > 0, else exp(-R_A^2/(2 beta^2)) * (1 - exp(-S^2/(2 c^2)))
/// with R_A = |l1|/|l2| and S = sqrt(l1^2 + l2^2). Output in [0, 1].
ImageGrid vesselness_at_scale(const ImageGrid& img, double scale, double beta,
                              double c);

/// Pixelwise max over scales. When params.c is unset it resolves once per
/// call: half of the maximum S over all requested scales (so the per-scale
/// responses stay comparable); a structureless image yields all zeros.
ImageGrid vesselness_multiscale(const ImageGrid& img,
                                const VesselnessParams& params = {});

/// Boundary condition for differentiating a segmented image: every exactly-
/// zero (background) pixel takes the value of its nearest nonzero pixel
/// (8-neighbour chamfer propagation). Without it the artificial face/
/// background step would dominate both the Hessian norms (hence the auto c)
/// and the responses near the outline. No nonzero pixels -> returned as is.
ImageGrid extend_foreground(const ImageGrid& segmented);

/// Vesselness of the segmented raw image (not the enhanced one), warped into
/// the model's canonical frame using the fitted shape. Zero outside the mesh
/// interior. The background is extend_foreground-filled before
/// differentiation. The shape overload serves cross-model normalization,
/// where the vertex positions come from a fit under a different ensemble
/// member; the FitResult overload forwards the fit's implied shape (a fit
/// that hits max_iter without meeting tol is still a usable local optimum --
/// divergence already throws inside fit()).
ImageGrid extract_signature(const ImageGrid& segmented_raw,
                            const geom::ShapeInstance& fitted_shape,
                            const aam::AamModel& model,
                            const VesselnessParams& params = {});
ImageGrid extract_signature(const ImageGrid& segmented_raw,
                            const aam::FitResult& fit, const aam::AamModel& model,
                            const VesselnessParams& params = {});

/// Comparison domain for signature NCC: the model's canonical interior eroded
/// by twice the largest scale. The face/background step at the segmentation
/// boundary produces a strong mesh-aligned ridge response shared by every
/// subject; pixels whose filter support reaches it carry no identity and
/// would otherwise dominate the correlation.
BinaryMask signature_mask(const aam::AamModel& model,
                          const VesselnessParams& params = {});

}  // namespace tface::vessel
