#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dumbbell/fem.hpp"
#include "dumbbell/geometry.hpp"

namespace dumbbell {

struct Placement {
    Vec2 y{};
    bool feasible = false;
    double lambda1 = 0.0;
    int n_triangles = 0;
    double residual = 0.0;
    std::string note;  // infeasibility or failure reason
};

struct ObstacleSweepResult {
    std::vector<Placement> placements;  // grid order (lexicographic)
    Vec2 y_star{};
    double lambda_star = 0.0;
    double lambda_baseline = 0.0;
    double dist_to_x0 = 0.0;
    double largeness_ratio = 0.0;
    bool tie = false;
};

// All grid translations passing the subtract_obstacle feasibility test, in
// lexicographic (x, y) order. The grid is anchored at the tightest placement
// allowed by the domain bounding box. Throws on an empty feasible set.
std::vector<Vec2> placement_grid(const PolygonDomain& domain, const ObstacleShape& shape,
                                 double spacing, double clearance);

struct ObstacleSweepParams {
    double h_max = 0.04;
    double min_angle_deg = 20.0;
    double connector_factor = 4.0;
    double clearance = 0.1;
    SolverOptions solver;
    Vec2 x0{-2.0, 0.0};
    int jobs = 1;
};

// For each feasible translation: subtract, re-mesh, solve the Dirichlet ground
// state, and record lambda_1; the argmax placement wins, ties resolved toward
// the reference point x0. Individual placement failures are recorded, not fatal.
ObstacleSweepResult sweep(const DumbbellSpec& spec, const ObstacleShape& shape,
                          const std::vector<Vec2>& grid, const ObstacleSweepParams& params);

// Distance from x (typically on the boundary) measured as the volume fraction
// of B(x, r) outside the domain, estimated by Monte Carlo.
double asymmetry_ratio(const PolygonDomain& domain, const Vec2& x, double r, int n_samples,
                       std::uint64_t seed);

struct AsymmetryEstimate {
    double alpha = 0.0;       // min sampled ratio
    double std_error = 0.0;   // binomial error at the minimizer
    Vec2 argmin_x{};
    double argmin_r = 0.0;
};

AsymmetryEstimate estimate_asymmetry(const PolygonDomain& domain, const std::vector<double>& radii,
                                     int n_boundary_samples, int n_volume_samples,
                                     std::uint64_t seed);

} // namespace dumbbell
