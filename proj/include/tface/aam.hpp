#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tface/geometry.hpp"
#include "tface/grid.hpp"

namespace tface::aam {

/// Point-distribution model over a fixed mesh topology.
/// mean_shape lives in the shared canonical frame (similarity-aligned to the
/// mesh asset layout); modes are orthonormal PCA displacement fields.
struct ShapeModel {
    geom::Mesh mesh;
    geom::ShapeInstance mean_shape;
    Eigen::MatrixXd modes;  ///< (2*nv) x n_modes, column-orthonormal

    int mode_count() const { return static_cast<int>(modes.cols()); }
};

/// Linear texture model over the mean-shape interior mask.
/// The last mode is always the (orthonormalized) constant mode, which makes
/// fitting invariant to global intensity shifts.
struct AppearanceModel {
    int frame_width = 0;
    int frame_height = 0;
    ImageGrid a0;                   ///< mean appearance, zero outside the mask
    std::vector<ImageGrid> modes;   ///< orthonormal over the interior mask

    int mode_count() const { return static_cast<int>(modes.size()); }
};

struct FitParams {
    double tol = 1e-6;  ///< convergence threshold on the parameter update norm
    int max_iter = 50;
};

struct FitResult {
    Eigen::VectorXd p;      ///< over the augmented basis (similarity first)
    Eigen::VectorXd alpha;  ///< appearance coefficients, recovered post-hoc
    double final_error = 0.0;  ///< per-pixel appearance-projected squared error
    bool converged = false;
    int iterations = 0;
};

/// Combined model with the 4-mode global similarity augmentation prepended to
/// the shape basis, plus the precomputed inverse-compositional fit tables.
class AamModel {
public:
    ShapeModel shape;
    AppearanceModel appearance;
    int n_similarity = 4;
    Eigen::MatrixXd basis;  ///< (2*nv) x (4 + shape modes), column-orthonormal

    /// Builds derived tables (mask, gradients, steepest-descent images,
    /// Gauss-Newton Hessian pseudo-inverse). Must run before fit/synthesize;
    /// train/load call it. The model is immutable afterwards, so concurrent
    /// fits are safe.
    void finalize();

    int param_count() const { return static_cast<int>(basis.cols()); }

    geom::ShapeInstance shape_from_params(const Eigen::VectorXd& p) const;
    Eigen::VectorXd params_from_shape(const geom::ShapeInstance& s) const;

    const BinaryMask& interior_mask() const { return mask_; }
    const MaskMoments& interior_moments() const { return mask_moments_; }
    size_t interior_pixel_count() const { return pixels_.size(); }

    // --- internals shared with the fitter -----------------------------------
    struct MaskPixel {
        int x, y;
        int v0, v1, v2;        ///< vertex ids of the containing triangle
        double b0, b1, b2;     ///< barycentric coordinates in the mean shape
    };
    const std::vector<MaskPixel>& mask_pixels() const { return pixels_; }
    const Eigen::VectorXd& a0_vec() const { return a0_vec_; }
    const Eigen::MatrixXd& app_modes() const { return app_modes_; }
    const Eigen::MatrixXd& sd_projected() const { return sd_; }
    const Eigen::MatrixXd& hessian_pinv() const { return h_pinv_; }
    const std::vector<double>& mean_tri_areas() const { return mean_areas_; }

private:
    BinaryMask mask_;
    MaskMoments mask_moments_;
    std::vector<MaskPixel> pixels_;
    Eigen::VectorXd a0_vec_;      ///< mean appearance over mask pixels
    Eigen::MatrixXd app_modes_;   ///< n_pixels x n_app_modes
    Eigen::MatrixXd sd_;          ///< appearance-projected steepest descent
    Eigen::MatrixXd h_pinv_;      ///< pseudo-inverse of sd_^T sd_
    std::vector<double> mean_areas_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Generalized Procrustes alignment + PCA, mean aligned to the mesh asset
/// frame. Needs >= 2 shapes. variance_keep in (0, 1].
ShapeModel train_shape_model(const geom::Mesh& mesh,
                             const std::vector<geom::ShapeInstance>& shapes,
                             double variance_keep);

/// Warps every sample to the mean-shape frame, masked PCA, constant mode
/// appended. Shapes must pair 1:1 with images.
AppearanceModel train_appearance_model(const geom::Mesh& mesh,
                                       const geom::ShapeInstance& mean_shape,
                                       const std::vector<ImageGrid>& images,
                                       const std::vector<geom::ShapeInstance>& shapes,
                                       double variance_keep);

/// Shape + appearance + similarity augmentation + fit tables.
AamModel train_aam(const geom::Mesh& mesh, const std::vector<ImageGrid>& images,
                   const std::vector<geom::ShapeInstance>& shapes,
                   double variance_keep);

/// Shared canonical raster for a mesh: asset bbox + margin. Every model built
/// on the same mesh shares this frame, which is what makes cross-model
/// signature comparison well-defined.
void canonical_frame_size(const geom::Mesh& mesh, int& width, int& height);

// ---------------------------------------------------------------------------
// Synthesis / fitting
// ---------------------------------------------------------------------------

/// Renders a0 + alpha*modes and warps it from the mean shape onto the shape
/// implied by p, into an out_width x out_height raster.
ImageGrid synthesize(const AamModel& model, const Eigen::VectorXd& p,
                     const Eigen::VectorXd& alpha, int out_width, int out_height);

/// Project-out inverse-compositional Gauss-Newton fit from a seed shape.
FitResult fit(const AamModel& model, const ImageGrid& img,
              const geom::ShapeInstance& seed, const FitParams& params = {});

/// Direct forward-formulation error (explicit reconstruction route), per
/// pixel; used as the formulation-equivalence cross-check against
/// FitResult::final_error.
double forward_error(const AamModel& model, const ImageGrid& img,
                     const Eigen::VectorXd& p, const Eigen::VectorXd& alpha);

/// Mean shape translated/axis-scaled so its interior second moments match the
/// foreground mask's moment ellipse.
geom::ShapeInstance seed_from_mask(const AamModel& model, const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Serialization (binary "AAM1", little-endian, float32 arrays)
// ---------------------------------------------------------------------------

void save_aam(const std::string& path, const AamModel& model);
AamModel load_aam(const std::string& path);

}  // namespace tface::aam
