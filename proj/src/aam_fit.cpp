#include <cmath>

#include "tface/aam.hpp"
#include "tface/errors.hpp"
#include "tface/geometry.hpp"

namespace tface::aam {

namespace {

using geom::Point;
using geom::ShapeInstance;

/// Samples img at the piecewise-affine image of every mask pixel under the
/// warp that carries the mean shape onto `s` (barycentric form).
void sample_masked(const AamModel& model, const ImageGrid& img,
                   const ShapeInstance& s, Eigen::VectorXd& out) {
    const auto& pixels = model.mask_pixels();
    out.resize(pixels.size());
    for (size_t i = 0; i < pixels.size(); ++i) {
        const auto& px = pixels[i];
        const double x = px.b0 * s[px.v0].x + px.b1 * s[px.v1].x + px.b2 * s[px.v2].x;
        const double y = px.b0 * s[px.v0].y + px.b1 * s[px.v1].y + px.b2 * s[px.v2].y;
        out[i] = geom::bilinear_sample(img, x, y);
    }
}

/// Affine carrying the mean-shape triangle `t` onto its position in `s`.
geom::TriAffine current_affine(const AamModel& model, const ShapeInstance& s, int t) {
    const auto& tri = model.shape.mesh.triangles[t];
    const ShapeInstance& m = model.shape.mean_shape;
    const Point &s0 = m[tri[0]], &s1 = m[tri[1]], &s2 = m[tri[2]];
    const Point &t0 = s[tri[0]], &t1 = s[tri[1]], &t2 = s[tri[2]];
    const double denom =
        (s1.x - s0.x) * (s2.y - s0.y) - (s1.y - s0.y) * (s2.x - s0.x);
    const double inv = 1.0 / denom;
    const double m00 = (s2.y - s0.y) * inv, m01 = -(s2.x - s0.x) * inv;
    const double m10 = -(s1.y - s0.y) * inv, m11 = (s1.x - s0.x) * inv;
    geom::TriAffine A;
    A.a = (t1.x - t0.x) * m00 + (t2.x - t0.x) * m10;
    A.b = (t1.x - t0.x) * m01 + (t2.x - t0.x) * m11;
    A.d = (t1.y - t0.y) * m00 + (t2.y - t0.y) * m10;
    A.e = (t1.y - t0.y) * m01 + (t2.y - t0.y) * m11;
    A.c = t0.x - A.a * s0.x - A.b * s0.y;
    A.f = t0.y - A.d * s0.x - A.e * s0.y;
    return A;
}

void check_not_collapsed(const AamModel& model, const ShapeInstance& s) {
    const auto& mesh = model.shape.mesh;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double area = geom::triangle_signed_area(mesh, s, t);
        if (std::abs(area) < 1e-6 * std::abs(model.mean_tri_areas()[t]))
            throw FitDivergedError("fit: warp degenerated (triangle " +
                                   std::to_string(t) + " collapsed)");
    }
}

}  // namespace

FitResult fit(const AamModel& model, const ImageGrid& img,
              const geom::ShapeInstance& seed, const FitParams& params) {
    if (img.empty()) throw ParameterError("fit: empty image");
    if (params.tol <= 0.0) throw ParameterError("fit: tol must be positive");
    if (params.max_iter < 1) throw ParameterError("fit: max_iter must be >= 1");
    if (static_cast<int>(seed.size()) != model.shape.mesh.vertex_count())
        throw ParameterError("fit: seed size does not match mesh");

    const auto& mesh = model.shape.mesh;
    const size_t nv = mesh.vertices.size();

    // incident triangle lists for the composition step
    std::vector<std::vector<int>> incident(nv);
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) incident[mesh.triangles[t][k]].push_back(t);

    FitResult res;
    res.p = model.params_from_shape(seed);

    Eigen::VectorXd warped, error;
    for (int it = 1; it <= params.max_iter; ++it) {
        res.iterations = it;
        const ShapeInstance s = model.shape_from_params(res.p);
        check_not_collapsed(model, s);

        sample_masked(model, img, s, warped);
        error = warped - model.a0_vec();
        if (!error.allFinite())
            throw FitDivergedError("fit: non-finite error image");

        const Eigen::VectorXd dp =
            model.hessian_pinv() * (model.sd_projected().transpose() * error);

        // inverse-compositional update: displace the canonical vertices by
        // -basis*dp, push them through the current warp, average the affine
        // images over incident triangles, then project back onto the basis
        const Eigen::VectorXd ds = model.basis * dp;
        std::vector<geom::TriAffine> affines(mesh.triangle_count());
        for (int t = 0; t < mesh.triangle_count(); ++t)
            affines[t] = current_affine(model, s, t);
        ShapeInstance composed(nv);
        for (size_t v = 0; v < nv; ++v) {
            const Point moved = {model.shape.mean_shape[v].x - ds[2 * v],
                                 model.shape.mean_shape[v].y - ds[2 * v + 1]};
            double ax = 0.0, ay = 0.0;
            for (int t : incident[v]) {
                const Point q = affines[t](moved);
                ax += q.x;
                ay += q.y;
            }
            const double inv = 1.0 / static_cast<double>(incident[v].size());
            composed[v] = {ax * inv, ay * inv};
        }
        res.p = model.params_from_shape(composed);

        if (dp.norm() < params.tol) {
            res.converged = true;
            break;
        }
    }

    // appearance recovered post-hoc from the final error image
    const ShapeInstance s = model.shape_from_params(res.p);
    check_not_collapsed(model, s);
    sample_masked(model, img, s, warped);
    error = warped - model.a0_vec();
    if (!error.allFinite()) throw FitDivergedError("fit: non-finite error image");
    res.alpha = model.app_modes().transpose() * error;
    const double total = error.squaredNorm() - res.alpha.squaredNorm();
    res.final_error =
        std::max(0.0, total) / static_cast<double>(model.interior_pixel_count());
    return res;
}

double forward_error(const AamModel& model, const ImageGrid& img,
                     const Eigen::VectorXd& p, const Eigen::VectorXd& alpha) {
    if (alpha.size() != model.app_modes().cols())
        throw ParameterError("forward_error: bad alpha size");
    const ShapeInstance s = model.shape_from_params(p);
    Eigen::VectorXd warped;
    sample_masked(model, img, s, warped);
    const Eigen::VectorXd recon =
        model.a0_vec() + model.app_modes() * alpha;
    return (warped - recon).squaredNorm() /
           static_cast<double>(model.interior_pixel_count());
}

}  // namespace tface::aam
