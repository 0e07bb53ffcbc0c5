#pragma once

#include <array>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "dumbbell/geometry.hpp"
#include "dumbbell/mesh.hpp"

namespace dumbbell {

/// Per-region L2 masses of an eigenfunction and its deep values against the
/// predicted two-domain coefficients.
struct LocalizationReport {
    std::map<Region, double> masses;   // ||u||^2 over each region
    double alpha1 = 0.0, alpha2 = 0.0; // predicted coefficients
    double deep_value1 = 0.0, deep_value2 = 0.0;
    double deviation1 = 0.0, deviation2 = 0.0;  // |deep_i - alpha_i / sqrt(area_i)|
    double margin = 0.0;
};

struct HotSpotReport {
    double max_value = 0.0;
    std::vector<int> argmax_set;  // vertices within (1 - tol_rel) of the max
    Vec2 reference{};
    double distance = 0.0;         // min over argmax_set of the distance to x0
    double inner_radius_diag = 0.0;  // 1/sqrt(lambda_1), planar specialization
};

/// Polyline representation of the zero level set.
struct NodalPath {
    struct Component {
        std::vector<Vec2> pts;
        bool closed = false;
        std::array<bool, 2> endpoint_on_boundary{false, false};
    };
    std::vector<Component> components;
    int boundary_intersections = 0;
    int closed_components = 0;
};

struct DecayReport {
    std::vector<double> z_grid;
    std::vector<double> norms;    // ||u|| over the cross-section C(z)
    std::vector<double> mu_of_z;  // first Dirichlet eigenvalue of C(z)
    double mu = 0.0;              // inf over the grid
    double beta = 0.0;            // 1/sqrt(2)
    double lambda = 0.0;
    double z0 = 0.0;
    double norm_z0 = 0.0;
    bool hypothesis_holds = false;  // lambda < mu
    int bound_violations = 0;
    double fitted_slope = 0.0;      // least squares on log norms inside the connector
    double aggregate_D = 0.0;
    double aggregate_lhs = 0.0;     // ||u||^2 over the connector branch beyond z0
    double aggregate_rhs = 0.0;     // D * norm(z0)^2
};

// Exact P1 integral of u^2 over triangles whose centroid classifies to region.
double region_mass(const Eigen::VectorXd& u, const Mesh& mesh, const DumbbellSpec& spec,
                   Region region);

std::map<Region, double> region_masses(const Eigen::VectorXd& u, const Mesh& mesh,
                                       const DumbbellSpec& spec);

// alpha_1 = -sqrt(area2/(area1+area2)), alpha_2 = sqrt(area1/(area1+area2)).
std::pair<double, double> neumann_coefficients(double area1, double area2);

LocalizationReport localization_report(const Eigen::VectorXd& u, const Mesh& mesh,
                                       const DumbbellSpec& spec, double r1, double r2);

HotSpotReport hot_spots(const Eigen::VectorXd& u, const Mesh& mesh, double tol_rel,
                        const Vec2& x0, double lambda1);

// sup |u| over Omega2-tagged vertices.
double check_vanishing_on_omega2(const Eigen::VectorXd& u, const Mesh& mesh);

NodalPath nodal_set(const Eigen::VectorXd& u, const Mesh& mesh, double noise_floor = -1.0);

struct ContainmentResult {
    bool contained = true;
    Vec2 worst_point{};
    double worst_excursion = 0.0;
};

ContainmentResult nodal_containment(const NodalPath& path, const SubregionLayout& layout,
                                    const DumbbellSpec& spec);

double cross_section_norm(const Eigen::VectorXd& u, const Mesh& mesh, double z);

DecayReport decay_check(const Eigen::VectorXd& u, const Mesh& mesh, const DumbbellSpec& spec,
                        const PolygonDomain& domain, double lambda, double z0 = 0.0,
                        int stations = 64, double tol = 0.05);

} // namespace dumbbell
