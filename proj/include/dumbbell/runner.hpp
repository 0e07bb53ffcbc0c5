#pragma once

#include <map>
#include <string>
#include <vector>

#include "dumbbell/analysis.hpp"
#include "dumbbell/config.hpp"
#include "dumbbell/fem.hpp"
#include "dumbbell/mesh.hpp"
#include "dumbbell/obstacle.hpp"

namespace dumbbell {

/// Everything computed for one member of the epsilon sweep.
struct EpsArtifacts {
    double eps = 0.0;
    DumbbellSpec spec;
    PolygonDomain domain;
    Mesh mesh;
    EigenResult dirichlet;  // k = 1, ground state positive
    EigenResult neumann;    // k = 2, second pair negative on omega1
    std::map<Region, double> dirichlet_masses;
    double sup_o2 = 0.0;
    HotSpotReport hotspot;
    LocalizationReport localization;  // of the second Neumann pair
    NodalPath nodal;
    ContainmentResult containment;
    DecayReport decay;
};

// One row of the sweep CSV (columns fixed by the reporting schema).
struct SweepRow {
    double eps, lambda1, mass_o1, mass_o2, mass_conn, hotspot_dist, sup_o2, mu2, alpha_dev1,
        alpha_dev2;
    bool nodal_contained;
    int decay_violations;
};

EpsArtifacts run_eps_member(const ExperimentConfig& cfg, double eps, bool quad);
std::vector<EpsArtifacts> run_eps_sweep(const ExperimentConfig& cfg, int jobs, bool quad);
SweepRow row_from(const EpsArtifacts& art);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string obstacle_csv(const ObstacleSweepResult& result);

/// Collects artifact files and writes them (plus manifest.json with content
/// hashes) under the output directory on finalize.
class ArtifactSink {
public:
    ArtifactSink(std::string out_dir, const ExperimentConfig& cfg, const std::string& command,
                 const std::string& precision);
    void write(const std::string& name, const std::string& content);
    void finalize();

private:
    std::string out_dir_;
    std::string command_;
    std::string precision_;
    std::uint64_t config_hash_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, std::string>> outputs_;  // name -> content
};

// Runs one CLI command; throws on failure (Error -> operational,
// InvariantViolation -> assertion failure).
void run_command(const std::string& command, const ExperimentConfig& cfg,
                 const std::string& out_dir, int jobs);

} // namespace dumbbell
