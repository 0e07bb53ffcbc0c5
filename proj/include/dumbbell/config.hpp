#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dumbbell/geometry.hpp"

namespace dumbbell {

/// Experiment configuration; a single JSON document with one block per
/// subsystem. Unknown keys are rejected.
struct ExperimentConfig {
    // geometry
    std::array<double, 4> rect1{-3.0, -1.0, -1.0, 1.0};  // x0 y0 x1 y1
    std::array<double, 4> rect2{1.0, -0.5, 2.0, 0.5};
    double xi = 0.15;
    std::vector<std::pair<double, double>> rho_samples;  // empty -> default profile
    std::vector<double> eps_list{0.12, 0.08, 0.05, 0.03};
    int connector_samples = 8;

    // mesh
    double h_max = 0.04;
    double min_angle_deg = 20.0;
    double connector_factor = 4.0;

    // solver
    std::string bc = "dirichlet";
    int k = 2;
    double tol = 1e-9;
    std::uint64_t seed = 20240901;
    std::string precision = "auto";  // double | quad | auto

    // analysis
    double r1 = 0.3, r2 = 0.3;
    double z0 = 0.0;
    double hotspot_tol_rel = 1e-3;
    double decay_tol = 0.05;
    int decay_stations = 64;
    double nodal_noise_floor_rel = 1e-9;
    double sweep_tol = 1e-12;  // solver tolerance used for the eps sweep

    // obstacle
    std::string obstacle_shape = "square";  // square | polygon
    double obstacle_side = 0.4;
    std::vector<std::pair<double, double>> obstacle_vertices;
    double spacing = 0.1;
    double clearance = -1.0;  // negative -> default 2 * h_max

    // output
    std::vector<std::string> formats{"csv", "json", "svg"};

    DumbbellSpec spec(double epsilon) const;
    ObstacleShape obstacle() const;
    double effective_clearance() const { return clearance >= 0.0 ? clearance : 2.0 * h_max; }
    Vec2 omega1_center() const { return {(rect1[0] + rect1[2]) / 2.0, (rect1[1] + rect1[3]) / 2.0}; }
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical JSON of the config (also the --print-defaults output).
std::string config_to_json(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& data);

// Fixed 12-significant-digit float formatting used in every CSV/JSON artifact.
std::string fmt12(double x);

} // namespace dumbbell
