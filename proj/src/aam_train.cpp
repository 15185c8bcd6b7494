#include <algorithm>
#include <cmath>

#include "tface/aam.hpp"
#include "tface/errors.hpp"

namespace tface::aam {

namespace {

using geom::Point;
using geom::ShapeInstance;

Eigen::VectorXd to_vec(const ShapeInstance& s) {
    Eigen::VectorXd v(2 * s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        v[2 * i] = s[i].x;
        v[2 * i + 1] = s[i].y;
    }
    return v;
}

ShapeInstance to_shape(const Eigen::VectorXd& v) {
    ShapeInstance s(v.size() / 2);
    for (size_t i = 0; i < s.size(); ++i) s[i] = {v[2 * i], v[2 * i + 1]};
    return s;
}

Point centroid(const ShapeInstance& s) {
    double sx = 0.0, sy = 0.0;
    for (const Point& p : s) {
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(s.size());
    return {sx / n, sy / n};
}

double frob_norm(const ShapeInstance& s) {
    double ss = 0.0;
    for (const Point& p : s) ss += p.x * p.x + p.y * p.y;
    return std::sqrt(ss);
}

/// Rotation angle aligning `s` onto `ref` (both centered): the 2-D Kabsch
/// closed form.
void rotate_onto(ShapeInstance& s, const ShapeInstance& ref) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        num += s[i].x * ref[i].y - s[i].y * ref[i].x;
        den += s[i].x * ref[i].x + s[i].y * ref[i].y;
    }
    const double theta = std::atan2(num, den);
    const double c = std::cos(theta), sn = std::sin(theta);
    for (Point& p : s) {
        const double x = c * p.x - sn * p.y;
        const double y = sn * p.x + c * p.y;
        p = {x, y};
    }
}

/// Least-squares similarity (scale+rotation+translation) mapping src -> dst.
struct Similarity {
    double a = 1.0, b = 0.0, tx = 0.0, ty = 0.0;
    Point operator()(Point p) const {
        return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty};
    }
    double scale() const { return std::sqrt(a * a + b * b); }
};

Similarity solve_similarity(const ShapeInstance& src, const ShapeInstance& dst) {
    const Point cs = centroid(src), cd = centroid(dst);
    double num_a = 0.0, num_b = 0.0, den = 0.0;
    for (size_t i = 0; i < src.size(); ++i) {
        const double x = src[i].x - cs.x, y = src[i].y - cs.y;
        const double u = dst[i].x - cd.x, v = dst[i].y - cd.y;
        num_a += x * u + y * v;
        num_b += x * v - y * u;
        den += x * x + y * y;
    }
    if (den <= 0.0) throw TrainingError("similarity alignment: degenerate shape");
    Similarity sim;
    sim.a = num_a / den;
    sim.b = num_b / den;
    sim.tx = cd.x - (sim.a * cs.x - sim.b * cs.y);
    sim.ty = cd.y - (sim.b * cs.x + sim.a * cs.y);
    return sim;
}

/// Centers, unit-norms and rotationally aligns all shapes to their mean.
std::vector<ShapeInstance> procrustes_align(const std::vector<ShapeInstance>& shapes) {
    std::vector<ShapeInstance> aligned(shapes.size());
    for (size_t i = 0; i < shapes.size(); ++i) {
        aligned[i] = shapes[i];
        const Point c = centroid(aligned[i]);
        for (Point& p : aligned[i]) p = {p.x - c.x, p.y - c.y};
        const double nrm = frob_norm(aligned[i]);
        if (nrm <= 0.0) throw TrainingError("procrustes: degenerate (zero-size) shape");
        for (Point& p : aligned[i]) p = {p.x / nrm, p.y / nrm};
    }

    ShapeInstance mean = aligned[0];
    for (int iter = 0; iter < 100; ++iter) {
        for (auto& s : aligned) rotate_onto(s, mean);
        ShapeInstance next(mean.size(), Point{0.0, 0.0});
        for (const auto& s : aligned)
            for (size_t i = 0; i < s.size(); ++i) {
                next[i].x += s[i].x;
                next[i].y += s[i].y;
            }
        const double inv = 1.0 / static_cast<double>(aligned.size());
        for (Point& p : next) p = {p.x * inv, p.y * inv};
        const Point c = centroid(next);
        for (Point& p : next) p = {p.x - c.x, p.y - c.y};
        const double nrm = frob_norm(next);
        if (nrm <= 0.0) throw TrainingError("procrustes: collapsed mean");
        for (Point& p : next) p = {p.x / nrm, p.y / nrm};

        double delta = 0.0;
        for (size_t i = 0; i < next.size(); ++i)
            delta += std::hypot(next[i].x - mean[i].x, next[i].y - mean[i].y);
        mean = next;
        if (delta < 1e-12) break;
    }
    for (auto& s : aligned) rotate_onto(s, mean);
    return aligned;
}

/// Deterministic sign: the largest-|component| entry is made positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> mode) {
    int idx = 0;
    double best = 0.0;
    for (int i = 0; i < mode.size(); ++i)
        if (std::abs(mode[i]) > best) {
            best = std::abs(mode[i]);
            idx = i;
        }
    if (mode[idx] < 0.0) mode = -mode;
}

/// PCA of centered columns, keeping the smallest mode count whose variance
/// share reaches variance_keep. Uses the N x N Gram (snapshot) form.
/// data_scale is the squared Frobenius norm of the *uncentered* samples: the
/// relative cutoff alone cannot tell genuine variance from alignment roundoff
/// when the whole residual matrix is noise, so eigenvalues are also dropped
/// against an absolute floor tied to the data's own magnitude.
Eigen::MatrixXd snapshot_pca(const Eigen::MatrixXd& residuals, double variance_keep,
                             double data_scale) {
    const int n = static_cast<int>(residuals.cols());
    const Eigen::MatrixXd gram = residuals.transpose() * residuals;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success)
        throw TrainingError("pca: eigendecomposition failed");

    // ascending eigenvalues -> walk from the back
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double total = std::max(0.0, ev.sum());
    const double noise_floor = 1e-18 * std::max(data_scale, 0.0);
    if (total <= noise_floor) return Eigen::MatrixXd(residuals.rows(), 0);

    std::vector<int> keep;
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        if (ev[i] <= 1e-12 * total || ev[i] <= noise_floor) break;
        keep.push_back(i);
        acc += ev[i];
        if (acc >= variance_keep * total) break;
    }
    Eigen::MatrixXd modes(residuals.rows(), keep.size());
    for (size_t k = 0; k < keep.size(); ++k) {
        modes.col(k) = residuals * es.eigenvectors().col(keep[k]) /
                       std::sqrt(ev[keep[k]]);
        fix_sign(modes.col(k));
    }
    return modes;
}

}  // namespace

void canonical_frame_size(const geom::Mesh& mesh, int& width, int& height) {
    double max_x = 0.0, max_y = 0.0;
    for (const Point& v : mesh.vertices) {
        max_x = std::max(max_x, v.x);
        max_y = std::max(max_y, v.y);
    }
    width = static_cast<int>(std::ceil(max_x)) + 6;
    height = static_cast<int>(std::ceil(max_y)) + 6;
}

ShapeModel train_shape_model(const geom::Mesh& mesh,
                             const std::vector<geom::ShapeInstance>& shapes,
                             double variance_keep) {
    if (shapes.size() < 2) throw TrainingError("shape model: need at least 2 shapes");
    if (variance_keep <= 0.0 || variance_keep > 1.0)
        throw ParameterError("shape model: variance_keep must lie in (0, 1]");
    for (const auto& s : shapes)
        if (static_cast<int>(s.size()) != mesh.vertex_count())
            throw ParameterError("shape model: shape size does not match mesh");

    std::vector<ShapeInstance> aligned = procrustes_align(shapes);

    ShapeInstance mean(aligned[0].size(), Point{0.0, 0.0});
    for (const auto& s : aligned)
        for (size_t i = 0; i < s.size(); ++i) {
            mean[i].x += s[i].x;
            mean[i].y += s[i].y;
        }
    const double inv = 1.0 / static_cast<double>(aligned.size());
    for (Point& p : mean) p = {p.x * inv, p.y * inv};

    // express everything in the shared canonical frame (asset layout)
    const Similarity to_frame = solve_similarity(mean, mesh.vertices);
    ShapeInstance mean_canon(mean.size());
    for (size_t i = 0; i < mean.size(); ++i) mean_canon[i] = to_frame(mean[i]);

    const Eigen::VectorXd mean_vec = to_vec(mean_canon);
    Eigen::MatrixXd residuals(mean_vec.size(), aligned.size());
    double data_scale = 0.0;
    for (size_t j = 0; j < aligned.size(); ++j) {
        ShapeInstance s(aligned[j].size());
        for (size_t i = 0; i < s.size(); ++i) s[i] = to_frame(aligned[j][i]);
        const Eigen::VectorXd v = to_vec(s);
        data_scale += v.squaredNorm();
        residuals.col(j) = v - mean_vec;
    }

    ShapeModel model;
    model.mesh = mesh;
    model.mean_shape = std::move(mean_canon);
    model.modes = snapshot_pca(residuals, variance_keep, data_scale);
    return model;
}

AppearanceModel train_appearance_model(const geom::Mesh& mesh,
                                       const geom::ShapeInstance& mean_shape,
                                       const std::vector<ImageGrid>& images,
                                       const std::vector<geom::ShapeInstance>& shapes,
                                       double variance_keep) {
    if (images.size() != shapes.size() || images.empty())
        throw ParameterError("appearance model: images and shapes must pair up");
    if (variance_keep <= 0.0 || variance_keep > 1.0)
        throw ParameterError("appearance model: variance_keep must lie in (0, 1]");

    AppearanceModel model;
    canonical_frame_size(mesh, model.frame_width, model.frame_height);
    const BinaryMask mask = geom::rasterize_interior(mesh, mean_shape,
                                                     model.frame_width,
                                                     model.frame_height);
    std::vector<size_t> mask_idx;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) mask_idx.push_back(i);
    if (mask_idx.empty()) throw TrainingError("appearance model: empty interior mask");
    const size_t nm = mask_idx.size();

    Eigen::MatrixXd samples(nm, images.size());
    for (size_t j = 0; j < images.size(); ++j) {
        const auto warp = geom::build_warp(mesh, mean_shape, shapes[j]);
        const ImageGrid canon = geom::warp_image(images[j], warp, model.frame_width,
                                                 model.frame_height);
        for (size_t i = 0; i < nm; ++i) samples(i, j) = canon[mask_idx[i]];
    }

    const double data_scale = samples.squaredNorm();
    const Eigen::VectorXd a0 = samples.rowwise().mean();
    samples.colwise() -= a0;
    Eigen::MatrixXd modes = snapshot_pca(samples, variance_keep, data_scale);

    // constant mode: orthonormalized against the PCA modes, always appended
    Eigen::VectorXd cmode = Eigen::VectorXd::Constant(nm, 1.0 / std::sqrt(double(nm)));
    cmode -= modes * (modes.transpose() * cmode);
    const double cn = cmode.norm();
    if (cn > 1e-12) {
        modes.conservativeResize(Eigen::NoChange, modes.cols() + 1);
        modes.col(modes.cols() - 1) = cmode / cn;
    }

    model.a0 = ImageGrid(model.frame_width, model.frame_height);
    for (size_t i = 0; i < nm; ++i) model.a0[mask_idx[i]] = a0[i];
    model.modes.reserve(modes.cols());
    for (int k = 0; k < modes.cols(); ++k) {
        ImageGrid g(model.frame_width, model.frame_height);
        for (size_t i = 0; i < nm; ++i) g[mask_idx[i]] = modes(i, k);
        model.modes.push_back(std::move(g));
    }
    return model;
}

geom::ShapeInstance AamModel::shape_from_params(const Eigen::VectorXd& p) const {
    if (p.size() != basis.cols()) throw ParameterError("shape_from_params: bad p size");
    const Eigen::VectorXd v = to_vec(shape.mean_shape) + basis * p;
    return to_shape(v);
}

Eigen::VectorXd AamModel::params_from_shape(const geom::ShapeInstance& s) const {
    if (static_cast<int>(s.size()) != shape.mesh.vertex_count())
        throw ParameterError("params_from_shape: bad shape size");
    return basis.transpose() * (to_vec(s) - to_vec(shape.mean_shape));
}

void AamModel::finalize() {
    const geom::Mesh& mesh = shape.mesh;
    const int fw = appearance.frame_width, fh = appearance.frame_height;
    if (fw <= 0 || fh <= 0) throw ParameterError("finalize: missing frame size");

    const auto tmap = geom::triangle_index_map(mesh, shape.mean_shape, fw, fh);
    mask_ = BinaryMask(fw, fh);
    pixels_.clear();
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            const int t = tmap[static_cast<size_t>(y) * fw + x];
            if (t < 0) continue;
            mask_.at(x, y) = 1;
            const auto loc = geom::point_location(
                mesh, shape.mean_shape,
                {static_cast<double>(x), static_cast<double>(y)});
            const auto& tri = mesh.triangles[loc.tri];
            pixels_.push_back({x, y, tri[0], tri[1], tri[2], loc.b0, loc.b1, loc.b2});
        }
    mask_moments_ = mask_moments(mask_);

    const size_t nm = pixels_.size();
    const int na = appearance.mode_count();
    a0_vec_.resize(nm);
    app_modes_.resize(nm, na);
    for (size_t i = 0; i < nm; ++i) {
        a0_vec_[i] = appearance.a0.at(pixels_[i].x, pixels_[i].y);
        for (int k = 0; k < na; ++k)
            app_modes_(i, k) = appearance.modes[k].at(pixels_[i].x, pixels_[i].y);
    }

    // gradient of a0 inside the mask (central where possible, else one-sided)
    Eigen::VectorXd gx(nm), gy(nm);
    auto in_mask = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < fw && y < fh && mask_.at(x, y);
    };
    for (size_t i = 0; i < nm; ++i) {
        const int x = pixels_[i].x, y = pixels_[i].y;
        const bool l = in_mask(x - 1, y), r = in_mask(x + 1, y);
        const bool u = in_mask(x, y - 1), d = in_mask(x, y + 1);
        gx[i] = l && r ? 0.5 * (appearance.a0.at(x + 1, y) - appearance.a0.at(x - 1, y))
              : r      ? appearance.a0.at(x + 1, y) - appearance.a0.at(x, y)
              : l      ? appearance.a0.at(x, y) - appearance.a0.at(x - 1, y)
                       : 0.0;
        gy[i] = u && d ? 0.5 * (appearance.a0.at(x, y + 1) - appearance.a0.at(x, y - 1))
              : d      ? appearance.a0.at(x, y + 1) - appearance.a0.at(x, y)
              : u      ? appearance.a0.at(x, y) - appearance.a0.at(x, y - 1)
                       : 0.0;
    }

    // steepest-descent images sd_k = grad(a0) . dW/dp_k, appearance projected out
    const int np = param_count();
    sd_.resize(nm, np);
    for (size_t i = 0; i < nm; ++i) {
        const auto& px = pixels_[i];
        for (int k = 0; k < np; ++k) {
            const double jx = px.b0 * basis(2 * px.v0, k) +
                              px.b1 * basis(2 * px.v1, k) +
                              px.b2 * basis(2 * px.v2, k);
            const double jy = px.b0 * basis(2 * px.v0 + 1, k) +
                              px.b1 * basis(2 * px.v1 + 1, k) +
                              px.b2 * basis(2 * px.v2 + 1, k);
            sd_(i, k) = gx[i] * jx + gy[i] * jy;
        }
    }
    sd_ -= app_modes_ * (app_modes_.transpose() * sd_);

    // Gauss-Newton Hessian; pseudo-inverse guards rank deficiency
    const Eigen::MatrixXd h = sd_.transpose() * sd_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw TrainingError("finalize: Hessian eigendecomposition failed");
    const double cutoff = 1e-12 * std::max(1e-300, es.eigenvalues().maxCoeff());
    Eigen::VectorXd inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] > cutoff ? 1.0 / inv[i] : 0.0;
    h_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

    mean_areas_.resize(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t)
        mean_areas_[t] = geom::triangle_signed_area(mesh, shape.mean_shape, t);
}

AamModel train_aam(const geom::Mesh& mesh, const std::vector<ImageGrid>& images,
                   const std::vector<geom::ShapeInstance>& shapes,
                   double variance_keep) {
    if (images.size() != shapes.size())
        throw ParameterError("train_aam: images and shapes must pair up");
    if (images.size() < 2) throw TrainingError("train_aam: need at least 2 samples");

    AamModel model;
    model.shape = train_shape_model(mesh, shapes, variance_keep);
    model.appearance = train_appearance_model(mesh, model.shape.mean_shape, images,
                                              shapes, variance_keep);

    // similarity modes from the centered mean shape: scale, rotation, tx, ty.
    // With a centered mean they are mutually orthogonal by construction.
    const size_t nv = model.shape.mean_shape.size();
    const Point c = centroid(model.shape.mean_shape);
    Eigen::MatrixXd sim(2 * nv, 4);
    for (size_t i = 0; i < nv; ++i) {
        const double x = model.shape.mean_shape[i].x - c.x;
        const double y = model.shape.mean_shape[i].y - c.y;
        sim(2 * i, 0) = x;
        sim(2 * i + 1, 0) = y;
        sim(2 * i, 1) = -y;
        sim(2 * i + 1, 1) = x;
        sim(2 * i, 2) = 1.0;
        sim(2 * i + 1, 2) = 0.0;
        sim(2 * i, 3) = 0.0;
        sim(2 * i + 1, 3) = 1.0;
    }
    for (int k = 0; k < 4; ++k) {
        for (int j = 0; j < k; ++j) sim.col(k) -= sim.col(j).dot(sim.col(k)) * sim.col(j);
        const double n = sim.col(k).norm();
        if (n <= 1e-12) throw TrainingError("train_aam: degenerate similarity mode");
        sim.col(k) /= n;
    }

    // orthogonalize shape modes against the similarity subspace
    std::vector<Eigen::VectorXd> kept;
    for (int k = 0; k < model.shape.modes.cols(); ++k) {
        Eigen::VectorXd m = model.shape.modes.col(k);
        m -= sim * (sim.transpose() * m);
        for (const auto& q : kept) m -= q.dot(m) * q;
        const double n = m.norm();
        if (n > 1e-10) kept.push_back(m / n);
    }

    model.basis.resize(2 * nv, 4 + kept.size());
    model.basis.leftCols(4) = sim;
    for (size_t k = 0; k < kept.size(); ++k) model.basis.col(4 + k) = kept[k];

    model.finalize();
    return model;
}

ImageGrid synthesize(const AamModel& model, const Eigen::VectorXd& p,
                     const Eigen::VectorXd& alpha, int out_width, int out_height) {
    if (alpha.size() != model.appearance.mode_count())
        throw ParameterError("synthesize: bad alpha size");
    ImageGrid tex = model.appearance.a0;
    for (int k = 0; k < alpha.size(); ++k)
        for (size_t i = 0; i < tex.size(); ++i)
            tex[i] += alpha[k] * model.appearance.modes[k][i];

    const geom::ShapeInstance s = model.shape_from_params(p);
    const auto warp = geom::build_warp(model.shape.mesh, s, model.shape.mean_shape);
    return geom::warp_image(tex, warp, out_width, out_height);
}

geom::ShapeInstance seed_from_mask(const AamModel& model, const BinaryMask& mask) {
    const MaskMoments m = mask_moments(mask);
    if (m.area == 0) throw ParameterError("seed_from_mask: empty mask");
    const MaskMoments& im = model.interior_moments();
    if (im.cxx <= 0.0 || im.cyy <= 0.0 || m.cxx <= 0.0 || m.cyy <= 0.0)
        throw ParameterError("seed_from_mask: degenerate moments");
    const double sx = std::sqrt(m.cxx / im.cxx);
    const double sy = std::sqrt(m.cyy / im.cyy);
    geom::ShapeInstance seed(model.shape.mean_shape.size());
    for (size_t i = 0; i < seed.size(); ++i) {
        seed[i].x = (model.shape.mean_shape[i].x - im.cx) * sx + m.cx;
        seed[i].y = (model.shape.mean_shape[i].y - im.cy) * sy + m.cy;
    }
    return seed;
}

}  // namespace tface::aam
