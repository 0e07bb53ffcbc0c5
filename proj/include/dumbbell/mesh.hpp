#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dumbbell/geometry.hpp"

namespace dumbbell {

/// Conforming triangulation with region tags and boundary markers.
struct Mesh {
    struct BoundaryEdge {
        int a = 0, b = 0;
        EdgeMarker marker = EdgeMarker::Outer;
    };

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<Region> vertex_region;
    double h_max_used = 0.0;
    double min_angle_achieved = 0.0;

    double triangle_area(int t) const;
    Vec2 centroid(int t) const;
    double total_area() const;
    int euler_characteristic() const;  // V - E + T over all distinct edges
    std::vector<char> boundary_vertex_mask() const;
};

struct MeshOptions {
    double h_max = 0.1;
    double min_angle_deg = 20.0;
    // Target edge length around a point; defaults to the constant h_max.
    std::function<double(const Vec2&)> size_field;
    // Region tag per vertex; defaults to Omega1 for plain domains.
    std::function<Region(const Vec2&)> classifier;
    int max_vertices = 500000;
};

Mesh triangulate(const PolygonDomain& domain, const MeshOptions& opts);

struct QualityReport {
    double min_angle_deg = 0.0;
    double max_angle_deg = 0.0;
    double min_edge = 0.0;
    double max_edge = 0.0;
    std::array<int, 16> edge_length_histogram{};  // uniform bins over [min_edge, max_edge]
    std::map<Region, int> region_counts;          // triangles by majority vertex region
    int vertex_count = 0;
    int triangle_count = 0;
    int boundary_edge_count = 0;
};

QualityReport mesh_quality(const Mesh& mesh);

// Plain-text serialization: header "V E T", then V vertex lines "x y region",
// T triangle lines "i j k", E boundary-edge lines "i j marker".
std::string mesh_to_text(const Mesh& mesh);
Mesh mesh_from_text(const std::string& text);

// Default size field for dumbbells: eps / connector_factor inside the
// connector bounding box, graded up to h_max away from it.
std::function<double(const Vec2&)> dumbbell_size_field(const DumbbellSpec& spec, double h_max,
                                                       double connector_factor = 4.0,
                                                       double grading = 0.5);

} // namespace dumbbell
