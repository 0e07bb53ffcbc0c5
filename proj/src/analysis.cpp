#include "dumbbell/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dumbbell/errors.hpp"

namespace dumbbell {

namespace {

// u^T M_e u for one P1 element: area/6 * (sum u_i^2 + sum_{i<j} u_i u_j).
double element_mass(double area, double u0, double u1, double u2) {
    return area / 6.0 * (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u0 * u2 + u1 * u2);
}

// Distance from a base-domain point to the closed connector region.
double connector_distance(const Vec2& p, const DumbbellSpec& spec) {
    double eps = spec.epsilon;
    if (p.x <= -1.0)
        return std::hypot(p.x + 1.0, std::max(std::abs(p.y) - 2.0 * eps, 0.0));
    if (p.x >= 1.0)
        return std::hypot(p.x - 1.0, std::max(std::abs(p.y) - 2.0 * eps, 0.0));
    double hw = spec.half_width(p.x);
    return std::max(std::abs(p.y) - hw, 0.0);
}

} // namespace

double region_mass(const Eigen::VectorXd& u, const Mesh& mesh, const DumbbellSpec& spec,
                   Region region) {
    double mass = 0.0;
    int count = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (classify_point(mesh.centroid(static_cast<int>(t)), spec) != region) continue;
        ++count;
        const auto& tri = mesh.triangles[t];
        mass += element_mass(mesh.triangle_area(static_cast<int>(t)), u[tri[0]], u[tri[1]],
                             u[tri[2]]);
    }
    if (count == 0) throw AnalysisError(std::string("no elements classify to region ") +
                                        region_name(region));
    return mass;
}

std::map<Region, double> region_masses(const Eigen::VectorXd& u, const Mesh& mesh,
                                       const DumbbellSpec& spec) {
    std::map<Region, double> masses{{Region::Omega1, 0.0},
                                    {Region::Omega2, 0.0},
                                    {Region::Connector, 0.0}};
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        Region r = classify_point(mesh.centroid(static_cast<int>(t)), spec);
        const auto& tri = mesh.triangles[t];
        masses[r] += element_mass(mesh.triangle_area(static_cast<int>(t)), u[tri[0]], u[tri[1]],
                                  u[tri[2]]);
    }
    return masses;
}

std::pair<double, double> neumann_coefficients(double area1, double area2) {
    if (area1 <= 0.0 || area2 <= 0.0) throw AnalysisError("areas must be positive");
    double t = area2 / (area1 + area2);
    double alpha1 = -std::sqrt(t);
    double alpha2 = std::sqrt(1.0 - t);
    return {alpha1, alpha2};
}

LocalizationReport localization_report(const Eigen::VectorXd& u, const Mesh& mesh,
                                       const DumbbellSpec& spec, double r1, double r2) {
    LocalizationReport rep;
    rep.masses = region_masses(u, mesh, spec);
    double a1 = spec.omega1.area(), a2 = spec.omega2.area();
    std::tie(rep.alpha1, rep.alpha2) = neumann_coefficients(a1, a2);

    rep.margin = std::max(2.0 * mesh.h_max_used, std::max(r1, r2) / 2.0);
    double sum1 = 0.0, sum2 = 0.0;
    int n1 = 0, n2 = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        Region r = mesh.vertex_region[v];
        if (r != Region::Omega1 && r != Region::Omega2) continue;
        double margin = std::max(2.0 * mesh.h_max_used, (r == Region::Omega1 ? r1 : r2) / 2.0);
        if (connector_distance(mesh.vertices[v], spec) < margin) continue;
        if (r == Region::Omega1) {
            sum1 += u[v];
            ++n1;
        } else {
            sum2 += u[v];
            ++n2;
        }
    }
    if (n1 == 0 || n2 == 0) throw AnalysisError("no deep vertices in a base domain");
    rep.deep_value1 = sum1 / n1;
    rep.deep_value2 = sum2 / n2;
    rep.deviation1 = std::abs(rep.deep_value1 - rep.alpha1 / std::sqrt(a1));
    rep.deviation2 = std::abs(rep.deep_value2 - rep.alpha2 / std::sqrt(a2));
    return rep;
}

HotSpotReport hot_spots(const Eigen::VectorXd& u, const Mesh& mesh, double tol_rel,
                        const Vec2& x0, double lambda1) {
    HotSpotReport rep;
    rep.reference = x0;
    rep.max_value = u.maxCoeff();
    if (!(rep.max_value > 0.0)) throw AnalysisError("hot spot analysis expects a positive maximum");
    double cut = (1.0 - tol_rel) * rep.max_value;
    rep.distance = std::numeric_limits<double>::max();
    for (int v = 0; v < u.size(); ++v) {
        if (u[v] >= cut) {
            rep.argmax_set.push_back(v);
            rep.distance = std::min(rep.distance, dist(mesh.vertices[v], x0));
        }
    }
    rep.inner_radius_diag = 1.0 / std::sqrt(lambda1);
    return rep;
}

double check_vanishing_on_omega2(const Eigen::VectorXd& u, const Mesh& mesh) {
    double sup = 0.0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mesh.vertex_region[v] == Region::Omega2) sup = std::max(sup, std::abs(u[v]));
    return sup;
}

// ---- nodal set extraction ----

NodalPath nodal_set(const Eigen::VectorXd& u, const Mesh& mesh, double noise_floor) {
    double umax = u.cwiseAbs().maxCoeff();
    if (noise_floor < 0.0) noise_floor = 1e-9 * umax;
    if (umax <= noise_floor) throw AnalysisError("field is identically below the noise floor");

    // Ties within the noise floor resolve to positive, so every vertex has a
    // strict sign and each mixed triangle is cut by exactly one segment.
    auto sign_of = [&](int v) { return u[v] < -noise_floor ? -1 : 1; };

    std::map<std::pair<int, int>, int> edge_point;  // mesh edge -> crossing point id
    std::vector<Vec2> points;
    std::vector<std::array<int, 2>> segments;  // pairs of crossing point ids

    auto crossing = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = edge_point.find(key);
        if (it != edge_point.end()) return it->second;
        double ua = u[a], ub = u[b];
        double t = ua / (ua - ub);
        t = std::clamp(t, 0.0, 1.0);
        Vec2 p = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t;
        points.push_back(p);
        int id = static_cast<int>(points.size()) - 1;
        edge_point[key] = id;
        return id;
    };

    for (const auto& tri : mesh.triangles) {
        int s0 = sign_of(tri[0]), s1 = sign_of(tri[1]), s2 = sign_of(tri[2]);
        if (s0 == s1 && s1 == s2) continue;
        std::vector<int> cut;
        if (s0 != s1) cut.push_back(crossing(tri[0], tri[1]));
        if (s1 != s2) cut.push_back(crossing(tri[1], tri[2]));
        if (s2 != s0) cut.push_back(crossing(tri[2], tri[0]));
        if (cut.size() == 2) segments.push_back({cut[0], cut[1]});
    }

    NodalPath path;
    if (segments.empty()) return path;

    // Chain segments into polylines: walk from degree-1 points (boundary hits),
    // remaining cycles are closed components.
    std::vector<std::vector<std::pair<int, int>>> incident(points.size());  // (segment, other end)
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incident[segments[s][0]].push_back({static_cast<int>(s), segments[s][1]});
        incident[segments[s][1]].push_back({static_cast<int>(s), segments[s][0]});
    }
    std::vector<char> used(segments.size(), 0);

    // Which crossing points sit on boundary edges?
    std::vector<char> on_boundary(points.size(), 0);
    {
        std::map<std::pair<int, int>, char> bset;
        for (const auto& e : mesh.boundary_edges) bset[std::minmax(e.a, e.b)] = 1;
        for (const auto& [key, pid] : edge_point)
            if (bset.count(key)) on_boundary[pid] = 1;
    }

    auto walk = [&](int start_point, int start_seg) {
        NodalPath::Component comp;
        comp.pts.push_back(points[start_point]);
        int cur = start_point, seg = start_seg;
        while (true) {
            used[seg] = 1;
            int next = segments[seg][0] == cur ? segments[seg][1] : segments[seg][0];
            comp.pts.push_back(points[next]);
            int next_seg = -1;
            for (auto [s2, other] : incident[next])
                if (!used[s2]) next_seg = s2;
            if (next_seg < 0) {
                comp.closed = next == start_point && comp.pts.size() > 3;
                comp.endpoint_on_boundary = {static_cast<bool>(on_boundary[start_point]),
                                             static_cast<bool>(on_boundary[next])};
                if (comp.closed) comp.pts.pop_back();
                return comp;
            }
            cur = next;
            seg = next_seg;
        }
    };

    for (std::size_t p = 0; p < points.size(); ++p) {
        if (incident[p].size() != 1) continue;
        if (used[incident[p][0].first]) continue;
        path.components.push_back(walk(static_cast<int>(p), incident[p][0].first));
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        path.components.push_back(walk(segments[s][0], static_cast<int>(s)));
    }

    for (const auto& comp : path.components) {
        if (comp.closed) {
            ++path.closed_components;
        } else {
            path.boundary_intersections += (comp.endpoint_on_boundary[0] ? 1 : 0) +
                                           (comp.endpoint_on_boundary[1] ? 1 : 0);
        }
    }
    return path;
}

ContainmentResult nodal_containment(const NodalPath& path, const SubregionLayout& layout,
                                    const DumbbellSpec& spec) {
    ContainmentResult res;
    double worst = 0.0;
    auto connector_member = [&](const Vec2& p) {
        if (p.x < -1.0 - 1e-9 || p.x > 1.0 + 1e-9) return false;
        double x = std::clamp(p.x, -1.0, 1.0);
        return std::abs(p.y) <= spec.half_width(x) + 1e-9;
    };
    auto half_disk_distance = [&](const Vec2& p, int i) {
        double r = i == 1 ? layout.r1 : layout.r2;
        Vec2 c = i == 1 ? Vec2{-1.0, 0.0} : Vec2{1.0, 0.0};
        bool on_side = i == 1 ? p.x <= c.x : p.x >= c.x;
        if (on_side) return std::max(dist(p, c) - r, 0.0);
        // nearest points lie on the flat diameter segment
        return std::hypot(p.x - c.x, std::max(std::abs(p.y - c.y) - r, 0.0));
    };
    for (const auto& comp : path.components) {
        for (const Vec2& p : comp.pts) {
            if (layout.in_half_disk(p, 1) || layout.in_half_disk(p, 2) || connector_member(p))
                continue;
            double d = std::min(half_disk_distance(p, 1), half_disk_distance(p, 2));
            d = std::min(d, connector_distance(p, spec));
            if (d > worst) {
                worst = d;
                res.worst_point = p;
            }
            res.contained = false;
        }
    }
    res.worst_excursion = worst;
    return res;
}

// ---- cross sections and decay ----

double cross_section_norm(const Eigen::VectorXd& u, const Mesh& mesh, double z) {
    double total = 0.0;
    bool any = false;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2& p0 = mesh.vertices[tri[0]];
        const Vec2& p1 = mesh.vertices[tri[1]];
        const Vec2& p2 = mesh.vertices[tri[2]];
        double xmin = std::min({p0.x, p1.x, p2.x});
        double xmax = std::max({p0.x, p1.x, p2.x});
        if (z < xmin || z > xmax) continue;

        // Intersection of {x = z} with the closed triangle.
        struct Hit {
            double y, val;
        };
        std::vector<Hit> hits;
        int on_line = 0;
        const Vec2* pts[3] = {&p0, &p1, &p2};
        double vals[3] = {u[tri[0]], u[tri[1]], u[tri[2]]};
        for (int j = 0; j < 3; ++j)
            if (pts[j]->x == z) ++on_line;
        for (int j = 0; j < 3; ++j) {
            const Vec2& a = *pts[j];
            const Vec2& b = *pts[(j + 1) % 3];
            if (a.x == z) hits.push_back({a.y, vals[j]});
            if ((a.x < z && b.x > z) || (a.x > z && b.x < z)) {
                double t2 = (z - a.x) / (b.x - a.x);
                hits.push_back({a.y + t2 * (b.y - a.y), vals[j] + t2 * (vals[(j + 1) % 3] - vals[j])});
            }
        }
        if (hits.size() < 2) continue;
        // A whole edge on the line is shared with the neighbor; the left
        // triangle owns the chord.
        if (on_line == 2) {
            double cx = (p0.x + p1.x + p2.x) / 3.0;
            if (cx > z) continue;
        }
        auto [mn, mx] = std::minmax_element(hits.begin(), hits.end(),
                                            [](const Hit& h1, const Hit& h2) { return h1.y < h2.y; });
        double L = mx->y - mn->y;
        if (L <= 0.0) continue;
        any = true;
        double v1 = mn->val, v2 = mx->val;
        total += L / 3.0 * (v1 * v1 + v1 * v2 + v2 * v2);
    }
    if (!any) throw AnalysisError("empty cross-section");
    return std::sqrt(total);
}

DecayReport decay_check(const Eigen::VectorXd& u, const Mesh& mesh, const DumbbellSpec& spec,
                        const PolygonDomain& domain, double lambda, double z0, int stations,
                        double tol) {
    if (stations < 4) throw AnalysisError("too few decay stations");
    double mass1 = region_mass(u, mesh, spec, Region::Omega1);
    if (!(mass1 > 0.5))
        throw AnalysisError("decay check expects the eigenfunction localized on omega1");

    DecayReport rep;
    rep.lambda = lambda;
    rep.beta = 1.0 / std::sqrt(2.0);
    rep.z0 = z0;
    double z2 = domain.bbox()[1].x;

    rep.norm_z0 = cross_section_norm(u, mesh, z0);
    for (int j = 0; j < stations; ++j) {
        double z = z0 + (j + 0.5) * (z2 - z0) / stations;
        rep.z_grid.push_back(z);
        rep.norms.push_back(cross_section_norm(u, mesh, z));
        auto intervals = domain.vertical_section(z);
        if (intervals.empty()) throw AnalysisError("empty geometric cross-section");
        double wmax = 0.0;
        for (const auto& [ylo, yhi] : intervals) wmax = std::max(wmax, yhi - ylo);
        rep.mu_of_z.push_back(M_PI * M_PI / (wmax * wmax));
    }
    rep.mu = *std::min_element(rep.mu_of_z.begin(), rep.mu_of_z.end());
    rep.hypothesis_holds = lambda < rep.mu;
    if (!rep.hypothesis_holds) return rep;

    double rate = rep.beta * std::sqrt(rep.mu - lambda);
    for (int j = 0; j < stations; ++j) {
        double bound = rep.norm_z0 * std::exp(-rate * (rep.z_grid[j] - z0)) * (1.0 + tol);
        if (rep.norms[j] > bound) ++rep.bound_violations;
    }

    // Slope of log ||u||_{C(z)} over the straight run of the connector
    // (the flares change the section width and would bias the fit).
    {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int n = 0;
        for (int j = 0; j < stations; ++j) {
            if (rep.z_grid[j] >= 1.0 - 2.0 * spec.epsilon) break;
            if (rep.norms[j] <= 0.0) continue;
            double x = rep.z_grid[j], y = std::log(rep.norms[j]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        rep.fitted_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    }

    // Aggregate bound over the connector branch beyond z0.
    double s = 2.0 * (rep.mu - lambda);
    rep.aggregate_D = (1.0 - std::exp(-std::sqrt(s))) / std::sqrt(s);
    double lhs = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        Vec2 c = mesh.centroid(static_cast<int>(t));
        if (c.x <= z0) continue;
        if (classify_point(c, spec) != Region::Connector) continue;
        const auto& tri = mesh.triangles[t];
        lhs += element_mass(mesh.triangle_area(static_cast<int>(t)), u[tri[0]], u[tri[1]],
                            u[tri[2]]);
    }
    rep.aggregate_lhs = lhs;
    rep.aggregate_rhs = rep.aggregate_D * rep.norm_z0 * rep.norm_z0;
    return rep;
}

} // namespace dumbbell
