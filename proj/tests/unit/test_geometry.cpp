#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "tface/errors.hpp"
#include "tface/geometry.hpp"

using namespace tface;
using namespace tface::geom;

namespace {

// Unit square split along the main diagonal; triangle 0 is the lower-left.
Mesh square_mesh() {
    Mesh m;
    m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    m.validate();
    return m;
}

ShapeInstance scaled_shape(const Mesh& mesh, double s, double tx, double ty) {
    ShapeInstance out;
    for (const auto& v : mesh.vertices) out.push_back({v.x * s + tx, v.y * s + ty});
    return out;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("mesh text round trip preserves vertices and triangles") {
    const std::string text = "MESH 4 2\n0 0\n2 0\n2 3\n0 3\n0 1 2\n0 2 3\n";
    Mesh m = parse_mesh_text(text);
    REQUIRE(m.vertex_count() == 4);
    REQUIRE(m.triangle_count() == 2);
    CHECK(m.vertices[2].x == 2.0);
    CHECK(m.vertices[2].y == 3.0);
    CHECK(m.triangles[1] == std::array<int, 3>{0, 2, 3});

    auto dir = std::filesystem::temp_directory_path() / "tface_geom_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "m.mesh").string();
    save_mesh(path, m);
    Mesh back = load_mesh(path);
    REQUIRE(back.vertex_count() == m.vertex_count());
    REQUIRE(back.triangle_count() == m.triangle_count());
    for (int i = 0; i < m.vertex_count(); ++i) {
        CHECK(back.vertices[i].x == m.vertices[i].x);
        CHECK(back.vertices[i].y == m.vertices[i].y);
    }
    CHECK(back.triangles == m.triangles);
}

TEST_CASE("mesh validation rejects broken topologies") {
    // out-of-range vertex index
    CHECK_THROWS_AS(parse_mesh_text("MESH 3 1\n0 0\n1 0\n0 1\n0 1 5\n"),
                    ParameterError);
    // unused vertex
    CHECK_THROWS_AS(parse_mesh_text("MESH 4 1\n0 0\n1 0\n0 1\n9 9\n0 1 2\n"),
                    ParameterError);
    // degenerate (collinear) canonical triangle
    CHECK_THROWS_AS(parse_mesh_text("MESH 3 1\n0 0\n1 0\n2 0\n0 1 2\n"),
                    ParameterError);
    // repeated index
    CHECK_THROWS_AS(parse_mesh_text("MESH 3 1\n0 0\n1 0\n0 1\n0 1 1\n"),
                    ParameterError);
    // malformed header / truncation are I/O-level problems
    CHECK_THROWS_AS(parse_mesh_text("MSH 3 1\n"), IoError);
    CHECK_THROWS_AS(parse_mesh_text("MESH 3 1\n0 0\n1 0\n"), IoError);
}

TEST_CASE("default face mesh is available and valid") {
    const Mesh& m = default_face_mesh();
    CHECK(m.vertex_count() == 58);
    CHECK(m.triangle_count() > 58);  // triangulation of the interior
    CHECK_NOTHROW(m.validate());
    // same object every call (parsed once)
    CHECK(&default_face_mesh() == &m);
}

TEST_CASE("build_warp maps source vertices exactly onto target vertices") {
    Mesh m = square_mesh();
    ShapeInstance src = scaled_shape(m, 10.0, 2.0, 3.0);
    ShapeInstance dst = {{5, 7}, {19, 6}, {21, 20}, {4, 18}};
    auto warp = build_warp(m, src, dst);

    for (size_t i = 0; i < src.size(); ++i) {
        Point p = warp(src[i]);
        CHECK(p.x == doctest::Approx(dst[i].x).epsilon(1e-12));
        CHECK(p.y == doctest::Approx(dst[i].y).epsilon(1e-12));
    }
}

TEST_CASE("forward and inverse warps compose to identity inside the domain") {
    Mesh m = square_mesh();
    ShapeInstance src = scaled_shape(m, 12.0, 1.0, 1.0);
    ShapeInstance dst = {{3, 2}, {17, 4}, {15, 19}, {2, 16}};
    auto fwd = build_warp(m, src, dst);
    auto inv = build_warp(m, dst, src);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
        // random point strictly inside triangle 0 or 1 of the source
        const double a = u(rng), b = u(rng);
        Point p{1.0 + 12.0 * std::min(a, b), 1.0 + 12.0 * std::max(a, b)};
        Point q = inv(fwd(p));
        CHECK(q.x == doctest::Approx(p.x).epsilon(1e-9));
        CHECK(q.y == doctest::Approx(p.y).epsilon(1e-9));
    }
}

TEST_CASE("degenerate source triangles are rejected") {
    Mesh m = square_mesh();
    ShapeInstance src = scaled_shape(m, 10.0, 0.0, 0.0);
    src[2] = src[1];  // collapse one triangle
    ShapeInstance dst = scaled_shape(m, 10.0, 0.0, 0.0);
    CHECK_THROWS_AS(build_warp(m, src, dst), WarpError);
}

TEST_CASE("point_location picks the lowest-index triangle on shared edges") {
    Mesh m = square_mesh();
    ShapeInstance s = scaled_shape(m, 10.0, 0.0, 0.0);

    // On the shared diagonal from (0,0) to (10,10): both triangles contain
    // it; the contract says the lower index wins.
    BaryCoord d = point_location(m, s, {5.0, 5.0});
    CHECK(d.tri == 0);

    BaryCoord in0 = point_location(m, s, {7.0, 2.0});
    CHECK(in0.tri == 0);
    BaryCoord in1 = point_location(m, s, {2.0, 7.0});
    CHECK(in1.tri == 1);
    BaryCoord out = point_location(m, s, {11.0, 5.0});
    CHECK(out.tri == -1);

    // barycentric coordinates reconstruct the query point
    const auto& t = m.triangles[in0.tri];
    const double rx = in0.b0 * s[t[0]].x + in0.b1 * s[t[1]].x + in0.b2 * s[t[2]].x;
    const double ry = in0.b0 * s[t[0]].y + in0.b1 * s[t[1]].y + in0.b2 * s[t[2]].y;
    CHECK(rx == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(ry == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(in0.b0 + in0.b1 + in0.b2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("triangle_index_map agrees with per-pixel point_location") {
    Mesh m = square_mesh();
    ShapeInstance s = {{1.3, 0.7}, {14.2, 1.1}, {13.6, 12.8}, {0.4, 11.9}};
    const int w = 17, h = 15;
    auto map = triangle_index_map(m, s, w, h);
    REQUIRE(map.size() == size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            BaryCoord bc = point_location(m, s, {double(x), double(y)});
            CHECK(map[size_t(y) * w + x] == bc.tri);
        }

    BinaryMask interior = rasterize_interior(m, s, w, h);
    for (size_t i = 0; i < interior.size(); ++i)
        CHECK((interior[i] != 0) == (map[i] >= 0));
}

TEST_CASE("bilinear sampling is exact for affine images and clamps outside") {
    ImageGrid img(8, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) img.at(x, y) = 2.0 * x - 3.0 * y + 0.5;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 7.0), uy(0.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double x = ux(rng), y = uy(rng);
        CHECK(bilinear_sample(img, x, y) ==
              doctest::Approx(2.0 * x - 3.0 * y + 0.5).epsilon(1e-12));
    }
    // clamped coordinates resolve to the nearest edge sample
    CHECK(bilinear_sample(img, -2.0, 0.0) == doctest::Approx(img.at(0, 0)));
    CHECK(bilinear_sample(img, 7.9, 5.9) == doctest::Approx(img.at(7, 5)));
}

TEST_CASE("warp by integer translation copies pixels exactly") {
    Mesh m = square_mesh();
    ShapeInstance src = scaled_shape(m, 9.0, 2.0, 2.0);
    ShapeInstance dst = scaled_shape(m, 9.0, 5.0, 6.0);  // +3, +4

    ImageGrid img(20, 20);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (size_t i = 0; i < img.size(); ++i) img[i] = u(rng);

    auto warp = build_warp(m, src, dst);
    ImageGrid out = warp_image(img, warp, 14, 14);
    REQUIRE(out.width() == 14);
    REQUIRE(out.height() == 14);

    auto inside = rasterize_interior(m, src, 14, 14);
    for (int y = 0; y < 14; ++y)
        for (int x = 0; x < 14; ++x) {
            if (inside.at(x, y))
                CHECK(out.at(x, y) == doctest::Approx(img.at(x + 3, y + 4)));
            else
                CHECK(out.at(x, y) == 0.0);
        }
}

TEST_CASE("triangle_signed_area changes sign under reflection") {
    Mesh m = square_mesh();
    ShapeInstance s = scaled_shape(m, 4.0, 0.0, 0.0);
    const double a0 = triangle_signed_area(m, s, 0);
    CHECK(std::abs(a0) == doctest::Approx(16.0));  // parallelogram area

    ShapeInstance flipped = s;
    for (auto& p : flipped) p.x = -p.x;
    CHECK(triangle_signed_area(m, flipped, 0) == doctest::Approx(-a0));
}

}  // TEST_SUITE
