#include "tface/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tface::geom {

namespace {

constexpr double kBaryEps = 1e-9;       ///< edge-inclusive containment slack
constexpr double kDegenerateArea = 1e-9;

inline double cross(double ax, double ay, double bx, double by) {
    return ax * by - ay * bx;
}

/// Barycentric coordinates of p w.r.t. triangle (v0, v1, v2).
inline bool barycentric(const Point& v0, const Point& v1, const Point& v2, Point p,
                        double& b0, double& b1, double& b2) {
    const double denom = cross(v1.x - v0.x, v1.y - v0.y, v2.x - v0.x, v2.y - v0.y);
    if (std::abs(denom) < kDegenerateArea) return false;
    b1 = cross(p.x - v0.x, p.y - v0.y, v2.x - v0.x, v2.y - v0.y) / denom;
    b2 = cross(v1.x - v0.x, v1.y - v0.y, p.x - v0.x, p.y - v0.y) / denom;
    b0 = 1.0 - b1 - b2;
    return true;
}

}  // namespace

void Mesh::validate() const {
    if (vertices.size() < 3) throw ParameterError("mesh: fewer than 3 vertices");
    if (triangles.empty()) throw ParameterError("mesh: no triangles");
    std::vector<char> used(vertices.size(), 0);
    for (size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= vertex_count())
                throw ParameterError("mesh: triangle " + std::to_string(t) +
                                     " references vertex " + std::to_string(tri[k]));
            used[tri[k]] = 1;
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ParameterError("mesh: triangle " + std::to_string(t) +
                                 " repeats a vertex");
        const Point& a = vertices[tri[0]];
        const Point& b = vertices[tri[1]];
        const Point& c = vertices[tri[2]];
        if (std::abs(cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y)) <
            kDegenerateArea)
            throw ParameterError("mesh: triangle " + std::to_string(t) +
                                 " is degenerate");
    }
    for (size_t v = 0; v < used.size(); ++v)
        if (!used[v])
            throw ParameterError("mesh: vertex " + std::to_string(v) + " unused");
}

Mesh parse_mesh_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    if (magic != "MESH") throw IoError(origin + ": bad mesh magic (expected MESH)");
    int nv = 0, nt = 0;
    in >> nv >> nt;
    if (!in || nv < 3 || nt < 1 || nv > 100000 || nt > 200000)
        throw IoError(origin + ": bad mesh counts");
    Mesh mesh;
    mesh.vertices.resize(nv);
    for (int i = 0; i < nv; ++i) {
        in >> mesh.vertices[i].x >> mesh.vertices[i].y;
        if (!in) throw IoError(origin + ": truncated vertex list");
    }
    mesh.triangles.resize(nt);
    for (int i = 0; i < nt; ++i) {
        in >> mesh.triangles[i][0] >> mesh.triangles[i][1] >> mesh.triangles[i][2];
        if (!in) throw IoError(origin + ": truncated triangle list");
    }
    mesh.validate();
    return mesh;
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open mesh");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mesh_text(ss.str(), path);
}

void save_mesh(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "MESH " << mesh.vertex_count() << " " << mesh.triangle_count() << "\n";
    char buf[64];
    for (const Point& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.10g %.10g\n", v.x, v.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (!out) throw IoError(path + ": write failed");
}

PiecewiseAffineWarp::PiecewiseAffineWarp(const Mesh* mesh, ShapeInstance source,
                                         ShapeInstance target)
    : mesh_(mesh), source_(std::move(source)), target_(std::move(target)) {
    affines_.resize(mesh_->triangle_count());
    for (int t = 0; t < mesh_->triangle_count(); ++t) {
        const auto& tri = mesh_->triangles[t];
        const Point& s0 = source_[tri[0]];
        const Point& s1 = source_[tri[1]];
        const Point& s2 = source_[tri[2]];
        const double denom =
            cross(s1.x - s0.x, s1.y - s0.y, s2.x - s0.x, s2.y - s0.y);
        if (std::abs(denom) < kDegenerateArea)
            throw WarpError("build_warp: degenerate source triangle " +
                            std::to_string(t));
        const Point& t0 = target_[tri[0]];
        const Point& t1 = target_[tri[1]];
        const Point& t2 = target_[tri[2]];
        // Affine A with A(s_i) = t_i. Solve via barycentric identity:
        // p = s0 + b1 (s1-s0) + b2 (s2-s0), A(p) = t0 + b1 (t1-t0) + b2 (t2-t0).
        const double inv = 1.0 / denom;
        const double m00 = (s2.y - s0.y) * inv, m01 = -(s2.x - s0.x) * inv;
        const double m10 = -(s1.y - s0.y) * inv, m11 = (s1.x - s0.x) * inv;
        // b1 = m00*(x-s0.x) + m01*(y-s0.y); b2 = m10*(x-s0.x) + m11*(y-s0.y)
        TriAffine A;
        A.a = (t1.x - t0.x) * m00 + (t2.x - t0.x) * m10;
        A.b = (t1.x - t0.x) * m01 + (t2.x - t0.x) * m11;
        A.d = (t1.y - t0.y) * m00 + (t2.y - t0.y) * m10;
        A.e = (t1.y - t0.y) * m01 + (t2.y - t0.y) * m11;
        A.c = t0.x - A.a * s0.x - A.b * s0.y;
        A.f = t0.y - A.d * s0.x - A.e * s0.y;
        affines_[t] = A;
    }
}

Point PiecewiseAffineWarp::operator()(Point p) const {
    const BaryCoord loc = point_location(*mesh_, source_, p);
    if (loc.tri < 0)
        throw WarpError("warp: point outside every source triangle");
    return affines_[loc.tri](p);
}

PiecewiseAffineWarp build_warp(const Mesh& mesh, const ShapeInstance& source,
                               const ShapeInstance& target) {
    if (static_cast<int>(source.size()) != mesh.vertex_count() ||
        static_cast<int>(target.size()) != mesh.vertex_count())
        throw ParameterError("build_warp: shape size does not match mesh");
    return PiecewiseAffineWarp(&mesh, source, target);
}

BaryCoord point_location(const Mesh& mesh, const ShapeInstance& shape, Point p) {
    // Ascending scan gives the lowest-index triangle on shared edges.
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        double b0, b1, b2;
        if (!barycentric(shape[tri[0]], shape[tri[1]], shape[tri[2]], p, b0, b1, b2))
            continue;
        if (b0 >= -kBaryEps && b1 >= -kBaryEps && b2 >= -kBaryEps)
            return {t, b0, b1, b2};
    }
    return {};
}

double bilinear_sample(const ImageGrid& img, double x, double y) {
    const int w = img.width(), h = img.height();
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 > w - 2) x0 = std::max(0, w - 2);
    if (y0 > h - 2) y0 = std::max(0, h - 2);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0, fy = y - y0;
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

std::vector<int> triangle_index_map(const Mesh& mesh, const ShapeInstance& shape,
                                    int width, int height) {
    std::vector<int> map(static_cast<size_t>(width) * height, -1);
    // Ascending triangle order + first-wins keeps shared-edge pixels on the
    // lowest incident index.
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point& a = shape[tri[0]];
        const Point& b = shape[tri[1]];
        const Point& c = shape[tri[2]];
        const int x_min = std::max(0, static_cast<int>(std::floor(
                                          std::min({a.x, b.x, c.x}) - 1.0)));
        const int x_max = std::min(width - 1, static_cast<int>(std::ceil(
                                                  std::max({a.x, b.x, c.x}) + 1.0)));
        const int y_min = std::max(0, static_cast<int>(std::floor(
                                          std::min({a.y, b.y, c.y}) - 1.0)));
        const int y_max = std::min(height - 1, static_cast<int>(std::ceil(
                                                   std::max({a.y, b.y, c.y}) + 1.0)));
        for (int y = y_min; y <= y_max; ++y)
            for (int x = x_min; x <= x_max; ++x) {
                int& cell = map[static_cast<size_t>(y) * width + x];
                if (cell >= 0) continue;
                double b0, b1, b2;
                if (barycentric(a, b, c, {static_cast<double>(x),
                                          static_cast<double>(y)}, b0, b1, b2) &&
                    b0 >= -kBaryEps && b1 >= -kBaryEps && b2 >= -kBaryEps)
                    cell = t;
            }
    }
    return map;
}

BinaryMask rasterize_interior(const Mesh& mesh, const ShapeInstance& shape,
                              int width, int height) {
    const auto map = triangle_index_map(mesh, shape, width, height);
    BinaryMask mask(width, height);
    for (size_t i = 0; i < map.size(); ++i) mask[i] = map[i] >= 0 ? 1 : 0;
    return mask;
}

ImageGrid warp_image(const ImageGrid& img, const PiecewiseAffineWarp& warp,
                     int out_width, int out_height) {
    if (img.empty()) throw ParameterError("warp_image: empty image");
    if (out_width <= 0 || out_height <= 0)
        throw ParameterError("warp_image: non-positive output size");
    const auto map =
        triangle_index_map(warp.mesh(), warp.source(), out_width, out_height);
    ImageGrid out(out_width, out_height);
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            const int t = map[static_cast<size_t>(y) * out_width + x];
            if (t < 0) continue;
            const Point q = warp.triangle_affine(t)(
                {static_cast<double>(x), static_cast<double>(y)});
            out.at(x, y) = bilinear_sample(img, q.x, q.y);
        }
    return out;
}

double triangle_signed_area(const Mesh& mesh, const ShapeInstance& shape, int tri) {
    const auto& t = mesh.triangles[tri];
    const Point& a = shape[t[0]];
    const Point& b = shape[t[1]];
    const Point& c = shape[t[2]];
    return cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y);
}

}  // namespace tface::geom
