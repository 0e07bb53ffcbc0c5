#include "dumbbell/runner.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dumbbell/errors.hpp"
#include "dumbbell/oracle.hpp"
#include "dumbbell/svg.hpp"

namespace dumbbell {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
// Residual tolerance for the extended-precision sweep solves; the sweep
// compares cross-section norms far below double roundoff.
constexpr double kQuadTol = 1e-28;

json json_num(double x) { return json::parse(fmt12(x)); }

MeshOptions mesh_options(const ExperimentConfig& cfg, const DumbbellSpec& spec) {
    MeshOptions opts;
    opts.h_max = cfg.h_max;
    opts.min_angle_deg = cfg.min_angle_deg;
    opts.size_field = dumbbell_size_field(spec, cfg.h_max, cfg.connector_factor);
    opts.classifier = [spec](const Vec2& p) { return classify_point(p, spec); };
    return opts;
}

json localization_json(const LocalizationReport& rep) {
    json j;
    for (const auto& [r, m] : rep.masses) j["masses"][region_name(r)] = json_num(m);
    j["alpha1"] = json_num(rep.alpha1);
    j["alpha2"] = json_num(rep.alpha2);
    j["deep_value1"] = json_num(rep.deep_value1);
    j["deep_value2"] = json_num(rep.deep_value2);
    j["deviation1"] = json_num(rep.deviation1);
    j["deviation2"] = json_num(rep.deviation2);
    j["margin"] = json_num(rep.margin);
    return j;
}

json decay_json(const DecayReport& rep) {
    json j;
    j["mu"] = json_num(rep.mu);
    j["beta"] = json_num(rep.beta);
    j["lambda"] = json_num(rep.lambda);
    j["z0"] = json_num(rep.z0);
    j["norm_z0"] = json_num(rep.norm_z0);
    j["hypothesis_holds"] = rep.hypothesis_holds;
    j["bound_violations"] = rep.bound_violations;
    j["fitted_slope"] = json_num(rep.fitted_slope);
    j["aggregate_D"] = json_num(rep.aggregate_D);
    j["aggregate_lhs"] = json_num(rep.aggregate_lhs);
    j["aggregate_rhs"] = json_num(rep.aggregate_rhs);
    return j;
}

json nodal_json(const NodalPath& path) {
    json j;
    j["boundary_intersections"] = path.boundary_intersections;
    j["closed_components"] = path.closed_components;
    j["components"] = json::array();
    for (const auto& comp : path.components) {
        json c;
        c["closed"] = comp.closed;
        c["points"] = json::array();
        for (const Vec2& p : comp.pts) c["points"].push_back({json_num(p.x), json_num(p.y)});
        j["components"].push_back(c);
    }
    return j;
}

json eig_json(const EigenResult& eig) {
    json j;
    j["bc"] = bc_name(eig.bc);
    j["eigenvalues"] = json::array();
    for (double lam : eig.eigenvalues) j["eigenvalues"].push_back(json_num(lam));
    j["residuals"] = json::array();
    for (double r : eig.residuals) j["residuals"].push_back(json_num(r));
    j["clusters"] = eig.cluster;
    j["vectors_file"] = "vectors.txt";
    return j;
}

std::string vectors_text(const EigenResult& eig) {
    std::ostringstream os;
    os << (eig.vectors.empty() ? 0 : eig.vectors[0].size()) << " " << eig.vectors.size() << "\n";
    if (eig.vectors.empty()) return os.str();
    char buf[40];
    for (int i = 0; i < eig.vectors[0].size(); ++i) {
        for (std::size_t k = 0; k < eig.vectors.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.12g", eig.vectors[k][i]);
            os << (k ? " " : "") << buf;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace

EpsArtifacts run_eps_member(const ExperimentConfig& cfg, double eps, bool quad) {
    EpsArtifacts art;
    art.eps = eps;
    art.spec = cfg.spec(eps);
    art.domain = build_dumbbell(art.spec);
    art.mesh = triangulate(art.domain, mesh_options(cfg, art.spec));
    auto [K, M] = assemble(art.mesh);

    SolverOptions solver;
    solver.tol = quad ? std::min(cfg.sweep_tol, kQuadTol) : cfg.sweep_tol;
    solver.seed = cfg.seed;
    solver.high_precision = quad;

    solver.k = 1;
    art.dirichlet = fix_sign(solve_eigs(K, M, art.mesh, BC::Dirichlet, solver), art.mesh,
                             SignConvention::GroundStatePositive);
    solver.k = 2;
    art.neumann = fix_sign(solve_eigs(K, M, art.mesh, BC::Neumann, solver), art.mesh,
                           SignConvention::Neumann2NegativeOnOmega1);

    const Eigen::VectorXd& phi1 = art.dirichlet.vectors[0];
    const Eigen::VectorXd& psi2 = art.neumann.vectors[1];

    art.dirichlet_masses = region_masses(phi1, art.mesh, art.spec);
    double total = 0.0;
    for (const auto& [r, m] : art.dirichlet_masses) total += m;
    if (std::abs(total - 1.0) > 1e-8)
        throw InvariantViolation("mass partition of the ground state violated");

    art.sup_o2 = check_vanishing_on_omega2(phi1, art.mesh);
    art.hotspot = hot_spots(phi1, art.mesh, cfg.hotspot_tol_rel, cfg.omega1_center(),
                            art.dirichlet.eigenvalues[0]);
    art.localization = localization_report(psi2, art.mesh, art.spec, cfg.r1, cfg.r2);
    {
        double tot2 = 0.0;
        for (const auto& [r, m] : art.localization.masses) tot2 += m;
        if (std::abs(tot2 - 1.0) > 1e-8)
            throw InvariantViolation("mass partition of the second Neumann pair violated");
    }
    art.nodal = nodal_set(psi2, art.mesh, cfg.nodal_noise_floor_rel * psi2.cwiseAbs().maxCoeff());
    SubregionLayout layout = subregions(art.spec, cfg.r1, cfg.r2);
    art.containment = nodal_containment(art.nodal, layout, art.spec);
    art.decay = decay_check(phi1, art.mesh, art.spec, art.domain, art.dirichlet.eigenvalues[0],
                            cfg.z0, cfg.decay_stations, cfg.decay_tol);
    return art;
}

std::vector<EpsArtifacts> run_eps_sweep(const ExperimentConfig& cfg, int jobs, bool quad) {
    std::vector<EpsArtifacts> arts(cfg.eps_list.size());
    std::vector<std::string> failures(cfg.eps_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfg.eps_list.size()) return;
            try {
                arts[i] = run_eps_member(cfg, cfg.eps_list[i], quad);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.eps_list.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty())
            throw Error("sweep member eps=" + fmt12(cfg.eps_list[i]) + " failed: " + failures[i]);
    return arts;
}

SweepRow row_from(const EpsArtifacts& art) {
    SweepRow row{};
    row.eps = art.eps;
    row.lambda1 = art.dirichlet.eigenvalues[0];
    row.mass_o1 = art.dirichlet_masses.at(Region::Omega1);
    row.mass_o2 = art.dirichlet_masses.at(Region::Omega2);
    row.mass_conn = art.dirichlet_masses.at(Region::Connector);
    row.hotspot_dist = art.hotspot.distance;
    row.sup_o2 = art.sup_o2;
    row.mu2 = art.neumann.eigenvalues[1];
    row.alpha_dev1 = art.localization.deviation1;
    row.alpha_dev2 = art.localization.deviation2;
    row.nodal_contained = art.containment.contained;
    row.decay_violations = art.decay.bound_violations;
    return row;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "eps,lambda1,mass_o1,mass_o2,mass_conn,hotspot_dist,sup_o2,mu2,alpha_dev1,alpha_dev2,"
          "nodal_contained,decay_violations\n";
    for (const SweepRow& r : rows) {
        os << fmt12(r.eps) << "," << fmt12(r.lambda1) << "," << fmt12(r.mass_o1) << ","
           << fmt12(r.mass_o2) << "," << fmt12(r.mass_conn) << "," << fmt12(r.hotspot_dist) << ","
           << fmt12(r.sup_o2) << "," << fmt12(r.mu2) << "," << fmt12(r.alpha_dev1) << ","
           << fmt12(r.alpha_dev2) << "," << (r.nodal_contained ? 1 : 0) << ","
           << r.decay_violations << "\n";
    }
    return os.str();
}

std::string obstacle_csv(const ObstacleSweepResult& result) {
    std::ostringstream os;
    os << "y1,y2,feasible,lambda1,n_tri,residual\n";
    for (const Placement& p : result.placements) {
        os << fmt12(p.y.x) << "," << fmt12(p.y.y) << "," << (p.feasible ? 1 : 0) << ","
           << fmt12(p.lambda1) << "," << p.n_triangles << "," << fmt12(p.residual) << "\n";
    }
    return os.str();
}

// ---- ArtifactSink ----

ArtifactSink::ArtifactSink(std::string out_dir, const ExperimentConfig& cfg,
                           const std::string& command, const std::string& precision)
    : out_dir_(std::move(out_dir)), command_(command), precision_(precision),
      config_hash_(fnv1a64(config_to_json(cfg))), seed_(cfg.seed) {}

void ArtifactSink::write(const std::string& name, const std::string& content) {
    outputs_.emplace_back(name, content);
}

void ArtifactSink::finalize() {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir_);
    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = command_;
    manifest["precision"] = precision_;
    char hash_buf[24];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash_));
    manifest["config_hash"] = hash_buf;
    manifest["seed"] = seed_;
    manifest["outputs"] = json::array();
    for (const auto& [name, content] : outputs_) {
        std::ofstream out(fs::path(out_dir_) / name, std::ios::binary);
        if (!out) throw Error("cannot write output file: " + name);
        out << content;
        std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        manifest["outputs"].push_back({{"path", name}, {"fnv1a64", hash_buf}});
    }
    std::ofstream mf(fs::path(out_dir_) / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
}

// ---- commands ----

namespace {

bool wants(const ExperimentConfig& cfg, const std::string& fmt) {
    for (const auto& f : cfg.formats)
        if (f == fmt) return true;
    return false;
}

bool use_quad(const ExperimentConfig& cfg, bool sweep_like) {
    if (cfg.precision == "quad") return true;
    if (cfg.precision == "double") return false;
    return sweep_like;
}

void cmd_mesh(const ExperimentConfig& cfg, ArtifactSink& sink) {
    DumbbellSpec spec = cfg.spec(cfg.eps_list.front());
    PolygonDomain domain = build_dumbbell(spec);
    Mesh mesh = triangulate(domain, mesh_options(cfg, spec));
    sink.write("geometry.json", to_json_string(domain));
    sink.write("mesh.txt", mesh_to_text(mesh));
    QualityReport q = mesh_quality(mesh);
    json jq;
    jq["min_angle"] = json_num(q.min_angle_deg);
    jq["max_angle"] = json_num(q.max_angle_deg);
    jq["min_edge"] = json_num(q.min_edge);
    jq["max_edge"] = json_num(q.max_edge);
    jq["vertices"] = q.vertex_count;
    jq["triangles"] = q.triangle_count;
    jq["boundary_edges"] = q.boundary_edge_count;
    jq["edge_length_histogram"] = q.edge_length_histogram;
    for (const auto& [r, c] : q.region_counts) jq["region_counts"][region_name(r)] = c;
    sink.write("quality.json", jq.dump(2) + "\n");
}

void cmd_solve(const ExperimentConfig& cfg, ArtifactSink& sink) {
    DumbbellSpec spec = cfg.spec(cfg.eps_list.front());
    PolygonDomain domain = build_dumbbell(spec);
    Mesh mesh = triangulate(domain, mesh_options(cfg, spec));
    auto [K, M] = assemble(mesh);
    SolverOptions solver;
    solver.k = cfg.k;
    solver.tol = cfg.tol;
    solver.seed = cfg.seed;
    solver.high_precision = use_quad(cfg, false);
    BC bc = cfg.bc == "dirichlet" ? BC::Dirichlet : BC::Neumann;
    EigenResult eig = solve_eigs(K, M, mesh, bc, solver);
    eig = fix_sign(eig, mesh,
                   bc == BC::Neumann && cfg.k >= 2 ? SignConvention::Neumann2NegativeOnOmega1
                                                   : SignConvention::GroundStatePositive);
    sink.write("mesh.txt", mesh_to_text(mesh));
    sink.write("eig.json", eig_json(eig).dump(2) + "\n");
    sink.write("vectors.txt", vectors_text(eig));
}

void cmd_sweep(const ExperimentConfig& cfg, ArtifactSink& sink, int jobs) {
    auto arts = run_eps_sweep(cfg, jobs, use_quad(cfg, true));
    std::vector<SweepRow> rows;
    for (const auto& a : arts) rows.push_back(row_from(a));
    if (wants(cfg, "csv")) sink.write("sweep.csv", sweep_csv(rows));
    if (wants(cfg, "json")) {
        json j = json::array();
        for (const auto& a : arts) {
            json e;
            e["eps"] = json_num(a.eps);
            e["lambda1"] = json_num(a.dirichlet.eigenvalues[0]);
            e["mu1"] = json_num(a.neumann.eigenvalues[0]);
            e["mu2"] = json_num(a.neumann.eigenvalues[1]);
            e["dirichlet_residual"] = json_num(a.dirichlet.residuals[0]);
            e["hotspot_distance"] = json_num(a.hotspot.distance);
            e["inner_radius_diag"] = json_num(a.hotspot.inner_radius_diag);
            e["sup_omega2"] = json_num(a.sup_o2);
            e["localization"] = localization_json(a.localization);
            e["nodal"]["boundary_intersections"] = a.nodal.boundary_intersections;
            e["nodal"]["closed_components"] = a.nodal.closed_components;
            e["nodal"]["contained"] = a.containment.contained;
            e["nodal"]["worst_excursion"] = json_num(a.containment.worst_excursion);
            e["decay"] = decay_json(a.decay);
            j.push_back(e);
        }
        sink.write("sweep.json", j.dump(2) + "\n");
    }
    if (wants(cfg, "svg")) {
        const EpsArtifacts& a = arts.back();
        SubregionLayout layout = subregions(a.spec, cfg.r1, cfg.r2);
        sink.write("field_dirichlet.svg",
                   render_svg(a.domain, &a.mesh, &a.dirichlet.vectors[0], nullptr, nullptr));
        sink.write("field_neumann2.svg",
                   render_svg(a.domain, &a.mesh, &a.neumann.vectors[1], &a.nodal, &layout));
    }
}

void cmd_nodal(const ExperimentConfig& cfg, ArtifactSink& sink) {
    if (cfg.bc != "neumann")
        throw Error("nodal containment is defined for the Neumann second pair; set solver.bc");
    double eps = cfg.eps_list.back();
    DumbbellSpec spec = cfg.spec(eps);
    PolygonDomain domain = build_dumbbell(spec);
    Mesh mesh = triangulate(domain, mesh_options(cfg, spec));
    auto [K, M] = assemble(mesh);
    SolverOptions solver;
    solver.k = 2;
    solver.tol = cfg.tol;
    solver.seed = cfg.seed;
    solver.high_precision = use_quad(cfg, false);
    EigenResult eig = fix_sign(solve_eigs(K, M, mesh, BC::Neumann, solver), mesh,
                               SignConvention::Neumann2NegativeOnOmega1);
    NodalPath path = nodal_set(eig.vectors[1], mesh,
                               cfg.nodal_noise_floor_rel * eig.vectors[1].cwiseAbs().maxCoeff());
    SubregionLayout layout = subregions(spec, cfg.r1, cfg.r2);
    ContainmentResult cont = nodal_containment(path, layout, spec);
    json j = nodal_json(path);
    j["eps"] = json_num(eps);
    j["mu2"] = json_num(eig.eigenvalues[1]);
    j["contained"] = cont.contained;
    j["worst_excursion"] = json_num(cont.worst_excursion);
    sink.write("nodal.json", j.dump(2) + "\n");
    if (wants(cfg, "svg"))
        sink.write("nodal.svg", render_svg(domain, &mesh, &eig.vectors[1], &path, &layout));
}

void cmd_decay(const ExperimentConfig& cfg, ArtifactSink& sink, int jobs) {
    auto arts = run_eps_sweep(cfg, jobs, use_quad(cfg, true));
    std::ostringstream csv;
    csv << "eps,z,norm,mu_z,bound\n";
    json j = json::array();
    for (const auto& a : arts) {
        const DecayReport& d = a.decay;
        double rate = d.hypothesis_holds ? d.beta * std::sqrt(d.mu - d.lambda) : 0.0;
        for (std::size_t i = 0; i < d.z_grid.size(); ++i) {
            double bound = d.hypothesis_holds
                               ? d.norm_z0 * std::exp(-rate * (d.z_grid[i] - d.z0))
                               : 0.0;
            csv << fmt12(a.eps) << "," << fmt12(d.z_grid[i]) << "," << fmt12(d.norms[i]) << ","
                << fmt12(d.mu_of_z[i]) << "," << fmt12(bound) << "\n";
        }
        json e = decay_json(d);
        e["eps"] = json_num(a.eps);
        j.push_back(e);
    }
    if (wants(cfg, "csv")) sink.write("decay.csv", csv.str());
    if (wants(cfg, "json")) sink.write("decay.json", j.dump(2) + "\n");
}

void cmd_obstacle(const ExperimentConfig& cfg, ArtifactSink& sink, int jobs) {
    double eps = cfg.eps_list.front();
    DumbbellSpec spec = cfg.spec(eps);
    PolygonDomain domain = build_dumbbell(spec);
    ObstacleShape shape = cfg.obstacle();
    auto grid = placement_grid(domain, shape, cfg.spacing, cfg.effective_clearance());
    ObstacleSweepParams params;
    params.h_max = cfg.h_max;
    params.min_angle_deg = cfg.min_angle_deg;
    params.connector_factor = cfg.connector_factor;
    params.clearance = cfg.effective_clearance();
    params.solver.tol = cfg.tol;
    params.solver.seed = cfg.seed;
    params.x0 = cfg.omega1_center();
    params.jobs = jobs;
    ObstacleSweepResult result = sweep(spec, shape, grid, params);
    if (wants(cfg, "csv")) sink.write("obstacle.csv", obstacle_csv(result));
    json j;
    j["eps"] = json_num(eps);
    j["y_star"] = {json_num(result.y_star.x), json_num(result.y_star.y)};
    j["lambda_star"] = json_num(result.lambda_star);
    j["lambda_baseline"] = json_num(result.lambda_baseline);
    j["dist_to_x0"] = json_num(result.dist_to_x0);
    j["largeness_ratio"] = json_num(result.largeness_ratio);
    j["tie"] = result.tie;
    j["feasible_count"] =
        static_cast<int>(std::count_if(result.placements.begin(), result.placements.end(),
                                       [](const Placement& p) { return p.feasible; }));
    sink.write("obstacle.json", j.dump(2) + "\n");
}

void cmd_oracle_check(const ExperimentConfig& cfg, ArtifactSink& sink) {
    json j;
    bool ok = true;
    PolygonDomain square = PolygonDomain::rectangle(0.0, 0.0, 1.0, 1.0);

    auto solve_square = [&](double h, BC bc, int k) {
        MeshOptions opts;
        opts.h_max = h;
        opts.min_angle_deg = cfg.min_angle_deg;
        Mesh mesh = triangulate(square, opts);
        auto [K, M] = assemble(mesh);
        SolverOptions solver;
        solver.k = k;
        solver.tol = cfg.tol;
        solver.seed = cfg.seed;
        return solve_eigs(K, M, mesh, bc, solver);
    };

    double lam_exact = 2.0 * M_PI * M_PI;
    double l1_h4 = solve_square(0.04, BC::Dirichlet, 1).eigenvalues[0];
    double l1_h2 = solve_square(0.02, BC::Dirichlet, 1).eigenvalues[0];
    double err_h4 = std::abs(l1_h4 - lam_exact) / lam_exact;
    double err_h2 = std::abs(l1_h2 - lam_exact) / lam_exact;
    double ratio = err_h4 / err_h2;
    j["dirichlet_lambda1_h004"] = json_num(l1_h4);
    j["dirichlet_lambda1_h002"] = json_num(l1_h2);
    j["relative_error_h002"] = json_num(err_h2);
    j["error_ratio"] = json_num(ratio);
    ok = ok && err_h2 <= 0.005 && ratio >= 3.0 && ratio <= 5.0;

    auto neu = solve_square(0.02, BC::Neumann, 2);
    double mu2_err = std::abs(neu.eigenvalues[1] - M_PI * M_PI) / (M_PI * M_PI);
    j["neumann_mu2_h002"] = json_num(neu.eigenvalues[1]);
    j["neumann_mu2_error"] = json_num(mu2_err);
    ok = ok && mu2_err <= 0.01;

    // sparse vs dense on a coarse mesh
    {
        MeshOptions opts;
        opts.h_max = 0.12;
        opts.min_angle_deg = cfg.min_angle_deg;
        Mesh mesh = triangulate(square, opts);
        auto [K, M] = assemble(mesh);
        for (BC bc : {BC::Dirichlet, BC::Neumann}) {
            SolverOptions solver;
            solver.k = 5;
            solver.tol = cfg.tol;
            solver.seed = cfg.seed;
            EigenResult sparse = solve_eigs(K, M, mesh, bc, solver);
            EigenResult dense = dense_reference_eigs(K, M, mesh, bc, 5);
            double worst = 0.0;
            for (int i = 0; i < 5; ++i)
                worst = std::max(worst, std::abs(sparse.eigenvalues[i] - dense.eigenvalues[i]) /
                                            std::max(std::abs(dense.eigenvalues[i]), 1.0));
            j[std::string(bc_name(bc)) + "_sparse_dense_gap"] = json_num(worst);
            ok = ok && worst <= 1e-7;
        }
    }
    j["pass"] = ok;
    sink.write("oracle.json", j.dump(2) + "\n");
    if (!ok) throw InvariantViolation("oracle check failed (see oracle.json)");
}

void cmd_report(const ExperimentConfig& cfg, ArtifactSink& sink, int jobs) {
    cmd_sweep(cfg, sink, jobs);
    cmd_decay(cfg, sink, jobs);
}

} // namespace

void run_command(const std::string& command, const ExperimentConfig& cfg,
                 const std::string& out_dir, int jobs) {
    bool sweep_like = command == "sweep-eps" || command == "decay" || command == "report";
    std::string precision = use_quad(cfg, sweep_like) ? "quad" : "double";
    ArtifactSink sink(out_dir, cfg, command, precision);
    try {
        if (command == "mesh") {
            cmd_mesh(cfg, sink);
        } else if (command == "solve") {
            cmd_solve(cfg, sink);
        } else if (command == "sweep-eps") {
            cmd_sweep(cfg, sink, jobs);
        } else if (command == "nodal") {
            cmd_nodal(cfg, sink);
        } else if (command == "decay") {
            cmd_decay(cfg, sink, jobs);
        } else if (command == "obstacle") {
            cmd_obstacle(cfg, sink, jobs);
        } else if (command == "report") {
            cmd_report(cfg, sink, jobs);
        } else if (command == "oracle-check") {
            cmd_oracle_check(cfg, sink);
        } else {
            throw ConfigError("unknown command: " + command);
        }
    } catch (const InvariantViolation&) {
        // assertion failures still leave their diagnostics behind
        sink.finalize();
        throw;
    }
    sink.finalize();
}

} // namespace dumbbell
