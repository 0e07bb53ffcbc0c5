#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dumbbell/mesh.hpp"

using namespace dumbbell;

namespace {

DumbbellSpec default_spec(double eps) {
    return DumbbellSpec::rectangles(-3, -1, -1, 1, 1, -0.5, 2, 0.5, eps, 0.15);
}

Mesh unit_square_mesh(double h) {
    MeshOptions opts;
    opts.h_max = h;
    return triangulate(PolygonDomain::rectangle(0, 0, 1, 1), opts);
}

Mesh dumbbell_mesh(const DumbbellSpec& spec, double h_max) {
    MeshOptions opts;
    opts.h_max = h_max;
    opts.size_field = dumbbell_size_field(spec, h_max);
    opts.classifier = [spec](const Vec2& p) { return classify_point(p, spec); };
    return triangulate(build_dumbbell(spec), opts);
}

// Count distinct mesh edges crossed by the vertical line {x = z}.
int edges_crossed(const Mesh& mesh, double z, double ylo, double yhi) {
    std::set<std::pair<int, int>> crossed;
    for (const auto& tri : mesh.triangles) {
        for (int j = 0; j < 3; ++j) {
            int a = tri[j], b = tri[(j + 1) % 3];
            const Vec2& pa = mesh.vertices[a];
            const Vec2& pb = mesh.vertices[b];
            if ((pa.x < z) == (pb.x < z)) continue;
            double t = (z - pa.x) / (pb.x - pa.x);
            double y = pa.y + t * (pb.y - pa.y);
            if (y >= ylo && y <= yhi) crossed.insert(std::minmax(a, b));
        }
    }
    return static_cast<int>(crossed.size());
}

} // namespace

TEST_CASE("unit square mesh honors the quality contract") {
    Mesh mesh = unit_square_mesh(0.1);
    QualityReport q = mesh_quality(mesh);
    CHECK(q.min_angle_deg >= 20.0);
    CHECK(mesh.min_angle_achieved >= 20.0);
    // ballpark count for h = 0.1 (reported, loose band)
    CHECK(q.triangle_count >= 150);
    CHECK(q.triangle_count <= 700);
    CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mesh.euler_characteristic() == 1);

    // max edge below h_max
    for (const auto& tri : mesh.triangles)
        for (int j = 0; j < 3; ++j)
            CHECK(dist(mesh.vertices[tri[j]], mesh.vertices[tri[(j + 1) % 3]]) <= 0.1 * 1.0001);
}

TEST_CASE("mesh rejects a non-positive size") {
    MeshOptions opts;
    opts.h_max = 0.0;
    CHECK_THROWS_AS(triangulate(PolygonDomain::rectangle(0, 0, 1, 1), opts), MeshError);
}

TEST_CASE("boundary vertices lie on the input polygon") {
    DumbbellSpec spec = default_spec(0.08);
    PolygonDomain domain = build_dumbbell(spec);
    MeshOptions opts;
    opts.h_max = 0.1;
    opts.size_field = dumbbell_size_field(spec, 0.1);
    Mesh mesh = triangulate(domain, opts);
    auto mask = mesh.boundary_vertex_mask();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mask[v]) CHECK(domain.boundary_distance(mesh.vertices[v]) <= 1e-10);
}

TEST_CASE("dumbbell mesh resolves the connector with at least 4 layers") {
    DumbbellSpec spec = default_spec(0.05);
    Mesh mesh = dumbbell_mesh(spec, 0.1);
    QualityReport q = mesh_quality(mesh);
    CHECK(q.min_angle_deg >= 20.0);
    CHECK(mesh.total_area() == doctest::Approx(build_dumbbell(spec).area()).epsilon(1e-10));
    CHECK(mesh.euler_characteristic() == 1);
    // sampled vertical lines through the straight run
    for (double z : {-0.7, -0.3, 0.0, 0.25, 0.55, 0.85}) {
        CHECK(edges_crossed(mesh, z, -0.05, 0.05) >= 4);
    }
}

TEST_CASE("mesh with an obstacle hole keeps the Euler characteristic") {
    DumbbellSpec spec = default_spec(0.08);
    PolygonDomain domain = build_dumbbell(spec);
    PolygonDomain holed = subtract_obstacle(domain, ObstacleShape::square(0.4), {-2.0, 0.0}, 0.1);
    MeshOptions opts;
    opts.h_max = 0.1;
    opts.size_field = dumbbell_size_field(spec, 0.1);
    Mesh mesh = triangulate(holed, opts);
    CHECK(mesh.euler_characteristic() == 0);  // one hole
    CHECK(mesh.total_area() == doctest::Approx(holed.area()).epsilon(1e-10));
    int obstacle_edges = 0;
    for (const auto& e : mesh.boundary_edges)
        if (e.marker == EdgeMarker::Obstacle) ++obstacle_edges;
    CHECK(obstacle_edges >= 8);
}

TEST_CASE("mesh_quality matches brute-force recomputation") {
    Mesh mesh = unit_square_mesh(0.17);
    QualityReport q = mesh_quality(mesh);
    double min_angle = 180.0, max_angle = 0.0;
    for (const auto& tri : mesh.triangles) {
        for (int j = 0; j < 3; ++j) {
            Vec2 e1 = mesh.vertices[tri[(j + 1) % 3]] - mesh.vertices[tri[j]];
            Vec2 e2 = mesh.vertices[tri[(j + 2) % 3]] - mesh.vertices[tri[j]];
            double ang =
                std::acos(std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0)) * 180.0 /
                M_PI;
            min_angle = std::min(min_angle, ang);
            max_angle = std::max(max_angle, ang);
        }
    }
    CHECK(q.min_angle_deg == doctest::Approx(min_angle).epsilon(1e-12));
    CHECK(q.max_angle_deg == doctest::Approx(max_angle).epsilon(1e-12));
}

TEST_CASE("hand-built meshes report exact quality numbers") {
    Mesh eq;
    eq.vertices = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
    eq.triangles = {{0, 1, 2}};
    eq.vertex_region.assign(3, Region::Omega1);
    eq.boundary_edges = {{0, 1, EdgeMarker::Outer},
                         {1, 2, EdgeMarker::Outer},
                         {2, 0, EdgeMarker::Outer}};
    CHECK(mesh_quality(eq).min_angle_deg == doctest::Approx(60.0));

    Mesh square;
    square.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    square.triangles = {{0, 1, 2}, {0, 2, 3}};
    square.vertex_region.assign(4, Region::Omega1);
    square.boundary_edges = {{0, 1, EdgeMarker::Outer},
                             {1, 2, EdgeMarker::Outer},
                             {2, 3, EdgeMarker::Outer},
                             {3, 0, EdgeMarker::Outer}};
    CHECK(mesh_quality(square).min_angle_deg == doctest::Approx(45.0));
}

TEST_CASE("mesh text serialization round trip") {
    DumbbellSpec spec = default_spec(0.08);
    Mesh mesh = dumbbell_mesh(spec, 0.15);
    std::string text = mesh_to_text(mesh);
    Mesh back = mesh_from_text(text);
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.triangles.size() == mesh.triangles.size());
    REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        CHECK(back.vertices[v].x == mesh.vertices[v].x);
        CHECK(back.vertices[v].y == mesh.vertices[v].y);
        CHECK(back.vertex_region[v] == mesh.vertex_region[v]);
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) CHECK(back.triangles[t] == mesh.triangles[t]);
}

TEST_CASE("meshing is deterministic") {
    DumbbellSpec spec = default_spec(0.05);
    Mesh a = dumbbell_mesh(spec, 0.08);
    Mesh b = dumbbell_mesh(spec, 0.08);
    CHECK(mesh_to_text(a) == mesh_to_text(b));
}
