#include "dumbbell/obstacle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "dumbbell/errors.hpp"
#include "dumbbell/mesh.hpp"

namespace dumbbell {

std::vector<Vec2> placement_grid(const PolygonDomain& domain, const ObstacleShape& shape,
                                 double spacing, double clearance) {
    if (spacing <= 0.0) throw Error("grid spacing must be positive");
    shape.validate();
    auto dom_bb = domain.bbox();
    auto obs_bb = shape.bbox();
    double x_lo = dom_bb[0].x - obs_bb[0].x + clearance;
    double x_hi = dom_bb[1].x - obs_bb[1].x - clearance;
    double y_lo = dom_bb[0].y - obs_bb[0].y + clearance;
    double y_hi = dom_bb[1].y - obs_bb[1].y - clearance;

    std::vector<Vec2> feasible;
    for (double x = x_lo; x <= x_hi + 1e-12; x += spacing) {
        for (double y = y_lo; y <= y_hi + 1e-12; y += spacing) {
            try {
                subtract_obstacle(domain, shape, {x, y}, clearance);
                feasible.push_back({x, y});
            } catch (const InfeasiblePlacement&) {
            }
        }
    }
    if (feasible.empty()) throw Error("no feasible obstacle placement on the grid");
    return feasible;
}

namespace {

double point_to_polygon_dist(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) inside = !inside;
        }
    }
    if (inside) return 0.0;
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, point_segment_dist(p, poly[i], poly[(i + 1) % n]));
    return d;
}

} // namespace

ObstacleSweepResult sweep(const DumbbellSpec& spec, const ObstacleShape& shape,
                          const std::vector<Vec2>& grid, const ObstacleSweepParams& params) {
    spec.validate();
    PolygonDomain base = build_dumbbell(spec);
    auto size_field = dumbbell_size_field(spec, params.h_max, params.connector_factor);
    auto classifier = [spec](const Vec2& p) { return classify_point(p, spec); };

    MeshOptions mesh_opts;
    mesh_opts.h_max = params.h_max;
    mesh_opts.min_angle_deg = params.min_angle_deg;
    mesh_opts.size_field = size_field;
    mesh_opts.classifier = classifier;

    SolverOptions solver = params.solver;
    solver.k = 1;

    ObstacleSweepResult result;
    {
        Mesh mesh = triangulate(base, mesh_opts);
        auto [K, M] = assemble(mesh);
        EigenResult eig = solve_eigs(K, M, mesh, BC::Dirichlet, solver);
        result.lambda_baseline = eig.eigenvalues[0];
    }

    result.placements.resize(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            Placement& pl = result.placements[i];
            pl.y = grid[i];
            try {
                PolygonDomain perforated = subtract_obstacle(base, shape, grid[i], params.clearance);
                Mesh mesh = triangulate(perforated, mesh_opts);
                auto [K, M] = assemble(mesh);
                EigenResult eig = solve_eigs(K, M, mesh, BC::Dirichlet, solver);
                pl.feasible = true;
                pl.lambda1 = eig.eigenvalues[0];
                pl.residual = eig.residuals[0];
                pl.n_triangles = static_cast<int>(mesh.triangles.size());
            } catch (const Error& e) {
                pl.feasible = false;
                pl.note = e.what();
            }
        }
    };
    int jobs = std::max(1, params.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // argmax over feasible placements; ties resolve to the smallest distance
    // from the reference point to the translated obstacle.
    double best = -std::numeric_limits<double>::max();
    for (const Placement& pl : result.placements)
        if (pl.feasible) best = std::max(best, pl.lambda1);
    if (best == -std::numeric_limits<double>::max())
        throw Error("obstacle sweep produced no feasible solve");
    double tie_tol = 1e-9 * std::max(1.0, std::abs(best));
    std::vector<const Placement*> candidates;
    for (const Placement& pl : result.placements)
        if (pl.feasible && pl.lambda1 >= best - tie_tol) candidates.push_back(&pl);
    const Placement* star = candidates[0];
    double star_dist = point_to_polygon_dist(params.x0, shape.translated(star->y));
    for (const Placement* c : candidates) {
        double d = point_to_polygon_dist(params.x0, shape.translated(c->y));
        if (d < star_dist - 1e-15) {
            star = c;
            star_dist = d;
        }
    }
    result.tie = candidates.size() > 1;
    result.y_star = star->y;
    result.lambda_star = star->lambda1;
    result.dist_to_x0 = star_dist;
    result.largeness_ratio = result.lambda_star / result.lambda_baseline;
    return result;
}

double asymmetry_ratio(const PolygonDomain& domain, const Vec2& x, double r, int n_samples,
                       std::uint64_t seed) {
    if (n_samples < 100) throw Error("asymmetry sampling needs at least 100 points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int outside = 0;
    for (int i = 0; i < n_samples; ++i) {
        double rad = r * std::sqrt(uni(rng));
        double th = 2.0 * M_PI * uni(rng);
        Vec2 p{x.x + rad * std::cos(th), x.y + rad * std::sin(th)};
        if (!domain.strictly_inside(p, 0.0)) ++outside;
    }
    return static_cast<double>(outside) / n_samples;
}

AsymmetryEstimate estimate_asymmetry(const PolygonDomain& domain, const std::vector<double>& radii,
                                     int n_boundary_samples, int n_volume_samples,
                                     std::uint64_t seed) {
    if (radii.empty()) throw Error("need at least one radius");
    if (n_boundary_samples < 100 || n_volume_samples < 100)
        throw Error("asymmetry sampling needs at least 100 points");

    // Arc-length uniform boundary samples over all rings.
    struct Edge {
        Vec2 a, b;
        double len;
    };
    std::vector<Edge> edges;
    double total = 0.0;
    for (const Ring& ring : domain.rings) {
        std::size_t n = ring.pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            Edge e{ring.pts[i], ring.pts[(i + 1) % n], dist(ring.pts[i], ring.pts[(i + 1) % n])};
            total += e.len;
            edges.push_back(e);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    AsymmetryEstimate est;
    est.alpha = std::numeric_limits<double>::max();
    for (int s = 0; s < n_boundary_samples; ++s) {
        double target = uni(rng) * total;
        Vec2 x = edges.back().b;
        for (const Edge& e : edges) {
            if (target <= e.len) {
                x = e.a + (e.b - e.a) * (e.len > 0 ? target / e.len : 0.0);
                break;
            }
            target -= e.len;
        }
        for (double r : radii) {
            double ratio = asymmetry_ratio(domain, x, r, n_volume_samples, rng());
            if (ratio < est.alpha) {
                est.alpha = ratio;
                est.argmin_x = x;
                est.argmin_r = r;
                est.std_error = std::sqrt(std::max(ratio * (1.0 - ratio), 1e-12) / n_volume_samples);
            }
        }
    }
    return est;
}

} // namespace dumbbell
