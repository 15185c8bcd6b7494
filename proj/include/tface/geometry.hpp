#pragma once

#include <array>
#include <string>
#include <vector>

#include "tface/grid.hpp"

namespace tface::geom {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Triangulated landmark topology. Vertex coordinates are the canonical
/// (asset) layout; instances carry their own coordinates per vertex.
struct Mesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    /// Index validity, vertex usage, non-degenerate canonical triangles.
    void validate() const;
};

/// One coordinate per mesh vertex.
using ShapeInstance = std::vector<Point>;

/// Text format: "MESH <nv> <nt>" then nv lines "x y" then nt lines "i j k".
Mesh parse_mesh_text(const std::string& text, const std::string& origin = "<memory>");
Mesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const Mesh& mesh);

/// Built-in 58-vertex face layout (embedded copy of the versioned asset).
const Mesh& default_face_mesh();

/// Affine map (x,y) -> (a*x + b*y + c, d*x + e*y + f).
struct TriAffine {
    double a = 1.0, b = 0.0, c = 0.0;
    double d = 0.0, e = 1.0, f = 0.0;

    Point operator()(Point p) const {
        return {a * p.x + b * p.y + c, d * p.x + e * p.y + f};
    }
};

/// Location of a point in a triangulated shape.
struct BaryCoord {
    int tri = -1;  ///< -1 when outside every triangle
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
};

/// Piecewise-affine map from a source shape's triangles onto a target shape.
class PiecewiseAffineWarp {
public:
    PiecewiseAffineWarp() = default;
    PiecewiseAffineWarp(const Mesh* mesh, ShapeInstance source, ShapeInstance target);

    const Mesh& mesh() const { return *mesh_; }
    const ShapeInstance& source() const { return source_; }
    const ShapeInstance& target() const { return target_; }
    const TriAffine& triangle_affine(int tri) const { return affines_[tri]; }

    /// Maps a source-domain point through its containing triangle's affine.
    /// Outside every triangle -> WarpError.
    Point operator()(Point p) const;

private:
    const Mesh* mesh_ = nullptr;  ///< non-owning; meshes outlive warps
    ShapeInstance source_, target_;
    std::vector<TriAffine> affines_;
};

/// Per-triangle affines from 3-point correspondences. Degenerate source
/// triangle -> WarpError.
PiecewiseAffineWarp build_warp(const Mesh& mesh, const ShapeInstance& source,
                               const ShapeInstance& target);

/// Lowest-index triangle containing p (inclusive edges); tri = -1 outside.
BaryCoord point_location(const Mesh& mesh, const ShapeInstance& shape, Point p);

/// Clamped bilinear sample (exact for affine images at interior points).
double bilinear_sample(const ImageGrid& img, double x, double y);

/// Output raster over the warp's source domain: each pixel inside a source
/// triangle samples img at the affinely mapped position; outside -> 0.
ImageGrid warp_image(const ImageGrid& img, const PiecewiseAffineWarp& warp,
                     int out_width, int out_height);

/// Lowest-index triangle id per pixel (-1 outside), shared-edge pixels going
/// to the lowest incident index.
std::vector<int> triangle_index_map(const Mesh& mesh, const ShapeInstance& shape,
                                    int width, int height);

/// Pixels covered by any triangle.
BinaryMask rasterize_interior(const Mesh& mesh, const ShapeInstance& shape,
                              int width, int height);

/// Signed parallelogram area of triangle tri under the given coordinates.
double triangle_signed_area(const Mesh& mesh, const ShapeInstance& shape, int tri);

}  // namespace tface::geom
