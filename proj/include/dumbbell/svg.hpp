#pragma once

#include <string>

#include <Eigen/Dense>

#include "dumbbell/analysis.hpp"
#include "dumbbell/mesh.hpp"

namespace dumbbell {

struct SvgStyle {
    int width_px = 900;
    int bands = 12;  // uniform contour bands of u
    bool draw_mesh = false;
};

// Deterministic SVG 1.1: domain outline, optional filled contour bands of u,
// optional nodal polyline overlay and half-disk arcs.
std::string render_svg(const PolygonDomain& outline, const Mesh* mesh, const Eigen::VectorXd* u,
                       const NodalPath* nodal, const SubregionLayout* layout,
                       const SvgStyle& style = {});

} // namespace dumbbell
