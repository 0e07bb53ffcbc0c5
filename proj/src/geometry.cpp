#include "dumbbell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace dumbbell {

namespace {

constexpr double kSeamTol = 1e-12;

bool nearly(double a, double b, double tol = kSeamTol) { return std::abs(a - b) <= tol; }

// Proper or improper intersection of closed segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto bbox_separated = [](double a0, double a1, double b0, double b1) {
        if (a0 > a1) std::swap(a0, a1);
        if (b0 > b1) std::swap(b0, b1);
        return a1 < b0 || b1 < a0;
    };
    if (bbox_separated(a.x, b.x, c.x, d.x) || bbox_separated(a.y, b.y, c.y, d.y)) return false;
    double d1 = orient2d(c, d, a);
    double d2 = orient2d(c, d, b);
    double d3 = orient2d(a, b, c);
    double d4 = orient2d(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    if (d1 == 0 && on(c, d, a)) return true;
    if (d2 == 0 && on(c, d, b)) return true;
    if (d3 == 0 && on(a, b, c)) return true;
    if (d4 == 0 && on(a, b, d)) return true;
    return false;
}

double segment_segment_dist(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min(std::min(point_segment_dist(a, c, d), point_segment_dist(b, c, d)),
                    std::min(point_segment_dist(c, a, b), point_segment_dist(d, a, b)));
}

bool point_in_rings(const Vec2& p, const std::vector<Ring>& rings) {
    bool inside = false;
    for (const Ring& ring : rings) {
        std::size_t n = ring.pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = ring.pts[i];
            const Vec2& b = ring.pts[(i + 1) % n];
            if ((a.y > p.y) != (b.y > p.y)) {
                double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (p.x < xint) inside = !inside;
            }
        }
    }
    return inside;
}

// Index of the edge of `ring` lying on the vertical line {x = x0}; require the
// widest such edge. Returns npos if none.
std::size_t find_flat_edge(const Ring& ring, double x0) {
    std::size_t best = std::string::npos;
    double best_span = 0.0;
    std::size_t n = ring.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = ring.pts[i];
        const Vec2& b = ring.pts[(i + 1) % n];
        if (nearly(a.x, x0) && nearly(b.x, x0)) {
            double span = std::abs(b.y - a.y);
            if (span > best_span) {
                best_span = span;
                best = i;
            }
        }
    }
    return best;
}

} // namespace

const char* region_name(Region r) {
    switch (r) {
        case Region::Omega1: return "omega1";
        case Region::Omega2: return "omega2";
        case Region::Connector: return "connector";
        case Region::Outside: return "outside";
    }
    return "outside";
}

std::optional<Region> region_from_name(const std::string& name) {
    if (name == "omega1") return Region::Omega1;
    if (name == "omega2") return Region::Omega2;
    if (name == "connector") return Region::Connector;
    if (name == "outside") return Region::Outside;
    return std::nullopt;
}

const char* marker_name(EdgeMarker m) {
    switch (m) {
        case EdgeMarker::Outer: return "outer";
        case EdgeMarker::Obstacle: return "obstacle";
        case EdgeMarker::Synthetic: return "synthetic";
    }
    return "outer";
}

// ---- BumpProfile ----

BumpProfile BumpProfile::default_profile() {
    BumpProfile p;
    p.q_ = {-2.0, -1.0, 0.0};
    p.v_ = {1.0, 1.0, 2.0};
    p.d_ = {0.0, 0.0, 0.0};
    p.validate();
    return p;
}

BumpProfile BumpProfile::from_samples(std::vector<std::pair<double, double>> samples) {
    std::sort(samples.begin(), samples.end());
    if (samples.size() < 3) throw InvalidGeometry("bump profile needs at least 3 samples");
    BumpProfile p;
    for (const auto& [q, v] : samples) {
        p.q_.push_back(q);
        p.v_.push_back(v);
    }
    std::size_t n = p.q_.size();
    for (std::size_t i = 1; i < n; ++i)
        if (!(p.q_[i] > p.q_[i - 1])) throw InvalidGeometry("bump profile abscissae must be strictly increasing");

    // Fritsch-Carlson slopes: monotone on monotone data, zero at local extrema
    // and on flat runs.
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = p.q_[i + 1] - p.q_[i];
        delta[i] = (p.v_[i + 1] - p.v_[i]) / h[i];
    }
    p.d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            p.d_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            p.d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return d;
    };
    p.d_[0] = n > 2 ? end_slope(h[0], h[1], delta[0], delta[1]) : delta[0];
    p.d_[n - 1] = n > 2 ? end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]) : delta[n - 2];
    p.validate();
    return p;
}

void BumpProfile::validate() const {
    if (q_.front() != -2.0 || q_.back() != 0.0)
        throw InvalidGeometry("bump profile must span q in [-2, 0] exactly");
    if (v_.back() != 2.0) throw InvalidGeometry("bump profile requires value(0) = 2 exactly");
    bool has_minus_one = false;
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (v_[i] <= 0.0) throw InvalidGeometry("bump profile values must be positive");
        if (q_[i] == -1.0) has_minus_one = true;
        if (q_[i] <= -1.0 && v_[i] != 1.0)
            throw InvalidGeometry("bump profile requires value = 1 on [-2, -1]");
    }
    if (!has_minus_one) throw InvalidGeometry("bump profile needs a knot at q = -1");
    for (std::size_t i = 0; i + 1 < q_.size(); ++i) {
        if (q_[i + 1] <= -1.0 && (v_[i] != 1.0 || v_[i + 1] != 1.0))
            throw InvalidGeometry("bump profile requires value = 1 on [-2, -1]");
    }
    // Positivity between knots.
    for (int k = 0; k <= 400; ++k) {
        double q = -2.0 + 2.0 * k / 400.0;
        if ((*this)(q) <= 0.0) throw InvalidGeometry("bump profile interpolant dips below zero");
    }
}

double BumpProfile::operator()(double q) const {
    if (q <= q_.front()) return v_.front();
    if (q >= q_.back()) return v_.back();
    std::size_t hi = std::upper_bound(q_.begin(), q_.end(), q) - q_.begin();
    std::size_t lo = hi - 1;
    // Flat pieces evaluate exactly (the [-2,-1] run must return 1.0 bit-exact).
    if (v_[lo] == v_[hi] && d_[lo] == 0.0 && d_[hi] == 0.0) return v_[lo];
    double h = q_[hi] - q_[lo];
    double t = (q - q_[lo]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    return h00 * v_[lo] + h10 * h * d_[lo] + h01 * v_[hi] + h11 * h * d_[hi];
}

// ---- Ring / PolygonDomain ----

Ring::Ring(std::vector<Vec2> p, EdgeMarker m) : pts(std::move(p)) {
    markers.assign(pts.size(), m);
}

double Ring::signed_area() const {
    double a = 0.0;
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

PolygonDomain PolygonDomain::rectangle(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0 && y1 > y0)) throw InvalidGeometry("degenerate rectangle");
    PolygonDomain d;
    d.rings.emplace_back(std::vector<Vec2>{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, EdgeMarker::Outer);
    return d;
}

double PolygonDomain::area() const {
    double a = 0.0;
    for (const Ring& r : rings) a += r.signed_area();
    return a;
}

std::array<Vec2, 2> PolygonDomain::bbox() const {
    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Ring& r : rings)
        for (const Vec2& p : r.pts) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
    return {lo, hi};
}

double PolygonDomain::boundary_distance(const Vec2& p) const {
    double d = std::numeric_limits<double>::max();
    for (const Ring& r : rings) {
        std::size_t n = r.pts.size();
        for (std::size_t i = 0; i < n; ++i)
            d = std::min(d, point_segment_dist(p, r.pts[i], r.pts[(i + 1) % n]));
    }
    return d;
}

bool PolygonDomain::contains(const Vec2& p) const {
    if (point_in_rings(p, rings)) return true;
    return boundary_distance(p) <= kSeamTol;
}

bool PolygonDomain::strictly_inside(const Vec2& p, double clearance) const {
    return point_in_rings(p, rings) && boundary_distance(p) >= clearance;
}

std::vector<std::pair<double, double>> PolygonDomain::vertical_section(double z) const {
    std::vector<double> ys;
    for (const Ring& r : rings) {
        std::size_t n = r.pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = r.pts[i];
            const Vec2& b = r.pts[(i + 1) % n];
            if ((a.x > z) != (b.x > z))
                ys.push_back(a.y + (z - a.x) * (b.y - a.y) / (b.x - a.x));
        }
    }
    std::sort(ys.begin(), ys.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < ys.size(); i += 2)
        if (ys[i + 1] - ys[i] > 1e-14) out.emplace_back(ys[i], ys[i + 1]);
    return out;
}

void PolygonDomain::validate() const {
    if (rings.empty()) throw InvalidGeometry("polygon has no rings");
    for (std::size_t ri = 0; ri < rings.size(); ++ri) {
        const Ring& r = rings[ri];
        if (r.pts.size() < 3) throw InvalidGeometry("ring with fewer than 3 vertices");
        if (r.markers.size() != r.pts.size()) throw InvalidGeometry("ring marker count mismatch");
        std::size_t n = r.pts.size();
        for (std::size_t i = 0; i < n; ++i)
            if (dist(r.pts[i], r.pts[(i + 1) % n]) <= kSeamTol)
                throw InvalidGeometry("consecutive coincident vertices");
        double a = r.signed_area();
        if (ri == 0 && a <= 0.0) throw InvalidGeometry("outer ring must be counter-clockwise");
        if (ri > 0 && a >= 0.0) throw InvalidGeometry("hole rings must be clockwise");
        // Simplicity: no two non-adjacent edges of the same ring intersect.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (segments_intersect(r.pts[i], r.pts[(i + 1) % n], r.pts[j], r.pts[(j + 1) % n]))
                    throw InvalidGeometry("self-intersecting ring");
            }
        }
    }
    // Holes strictly inside the outer ring, pairwise disjoint.
    std::vector<Ring> outer_only{rings[0]};
    for (std::size_t ri = 1; ri < rings.size(); ++ri) {
        for (const Vec2& p : rings[ri].pts)
            if (!point_in_rings(p, outer_only)) throw InvalidGeometry("hole not strictly inside outer ring");
        for (std::size_t rj = 1; rj < rings.size(); ++rj) {
            if (ri == rj) continue;
            std::vector<Ring> other{rings[rj]};
            for (const Vec2& p : rings[ri].pts)
                if (point_in_rings(p, other)) throw InvalidGeometry("holes overlap");
        }
        std::size_t n = rings[ri].pts.size();
        for (std::size_t rj = 0; rj < ri; ++rj) {
            std::size_t m = rings[rj].pts.size();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (segments_intersect(rings[ri].pts[i], rings[ri].pts[(i + 1) % n],
                                           rings[rj].pts[j], rings[rj].pts[(j + 1) % m]))
                        throw InvalidGeometry("rings intersect");
        }
    }
}

std::string to_json_string(const PolygonDomain& d) {
    nlohmann::json j;
    j["rings"] = nlohmann::json::array();
    j["markers"] = nlohmann::json::array();
    for (const Ring& r : d.rings) {
        nlohmann::json ring = nlohmann::json::array();
        nlohmann::json marks = nlohmann::json::array();
        for (const Vec2& p : r.pts) ring.push_back({p.x, p.y});
        for (EdgeMarker m : r.markers) marks.push_back(marker_name(m));
        j["rings"].push_back(ring);
        j["markers"].push_back(marks);
    }
    return j.dump(2);
}

PolygonDomain polygon_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PolygonDomain d;
    const auto& rings = j.at("rings");
    const auto& markers = j.at("markers");
    if (rings.size() != markers.size()) throw InvalidGeometry("rings/markers length mismatch");
    for (std::size_t i = 0; i < rings.size(); ++i) {
        Ring r;
        for (const auto& pt : rings[i]) r.pts.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        for (const auto& m : markers[i]) {
            std::string name = m.get<std::string>();
            if (name == "outer") r.markers.push_back(EdgeMarker::Outer);
            else if (name == "obstacle") r.markers.push_back(EdgeMarker::Obstacle);
            else if (name == "synthetic") r.markers.push_back(EdgeMarker::Synthetic);
            else throw InvalidGeometry("unknown edge marker: " + name);
        }
        d.rings.push_back(std::move(r));
    }
    d.validate();
    return d;
}

// ---- ObstacleShape ----

ObstacleShape ObstacleShape::square(double side) {
    if (side <= 0.0) throw InvalidGeometry("obstacle side must be positive");
    double h = side / 2.0;
    return ObstacleShape{{{-h, -h}, {h, -h}, {h, h}, {-h, h}}};
}

void ObstacleShape::validate() const {
    if (vertices.size() < 3) throw InvalidGeometry("obstacle needs at least 3 vertices");
    std::size_t n = vertices.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % n];
        const Vec2& c = vertices[(i + 2) % n];
        if (orient2d(a, b, c) < -1e-14) throw InvalidGeometry("obstacle must be convex and counter-clockwise");
        area2 += a.cross(b);
    }
    if (area2 <= 0.0) throw InvalidGeometry("obstacle must be counter-clockwise");
}

std::array<Vec2, 2> ObstacleShape::bbox() const {
    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Vec2& p : vertices) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return {lo, hi};
}

std::vector<Vec2> ObstacleShape::translated(const Vec2& y) const {
    std::vector<Vec2> out;
    out.reserve(vertices.size());
    for (const Vec2& p : vertices) out.push_back(p + y);
    return out;
}

// ---- DumbbellSpec ----

DumbbellSpec DumbbellSpec::rectangles(double x0a, double y0a, double x1a, double y1a,
                                      double x0b, double y0b, double x1b, double y1b,
                                      double epsilon, double xi) {
    DumbbellSpec s;
    s.omega1 = PolygonDomain::rectangle(x0a, y0a, x1a, y1a);
    s.omega2 = PolygonDomain::rectangle(x0b, y0b, x1b, y1b);
    s.epsilon = epsilon;
    s.xi = xi;
    return s;
}

void DumbbellSpec::validate() const {
    if (epsilon <= 0.0) throw InvalidGeometry("epsilon must be positive");
    if (xi <= 0.0) throw InvalidGeometry("xi must be positive");
    if (!(2.0 * epsilon < 3.0 * xi))
        throw InvalidGeometry("connector does not fit the flat segment (need 2*eps < 3*xi)");
    if (connector_samples < 8) throw InvalidGeometry("connector_samples must be >= 8");
    omega1.validate();
    omega2.validate();
    if (omega1.rings.size() != 1 || omega2.rings.size() != 1)
        throw InvalidGeometry("base domains must be single-ring polygons");
    if (omega1.bbox()[1].x > -1.0 + kSeamTol) throw InvalidGeometry("omega1 must lie in {x <= -1}");
    if (omega2.bbox()[0].x < 1.0 - kSeamTol) throw InvalidGeometry("omega2 must lie in {x >= +1}");
    std::size_t e1 = find_flat_edge(omega1.rings[0], -1.0);
    std::size_t e2 = find_flat_edge(omega2.rings[0], 1.0);
    if (e1 == std::string::npos || e2 == std::string::npos)
        throw InvalidGeometry("flat seam edge not found on a base domain");
    auto span = [](const Ring& r, std::size_t i) {
        double ya = r.pts[i].y, yb = r.pts[(i + 1) % r.pts.size()].y;
        return std::pair<double, double>{std::min(ya, yb), std::max(ya, yb)};
    };
    auto [lo1, hi1] = span(omega1.rings[0], e1);
    auto [lo2, hi2] = span(omega2.rings[0], e2);
    if (lo1 > -3.0 * xi + kSeamTol || hi1 < 3.0 * xi - kSeamTol ||
        lo2 > -3.0 * xi + kSeamTol || hi2 < 3.0 * xi - kSeamTol)
        throw InvalidGeometry("flat seam edge does not cover |y| < 3*xi");
}

double DumbbellSpec::half_width(double x) const {
    if (x < -1.0 || x > 1.0) throw InvalidGeometry("half_width outside connector extent");
    if (x <= -1.0 + 2.0 * epsilon) return epsilon * rho((-1.0 - x) / epsilon);
    if (x >= 1.0 - 2.0 * epsilon) return epsilon * rho((x - 1.0) / epsilon);
    return epsilon;
}

DumbbellSpec DumbbellSpec::with_epsilon(double eps) const {
    DumbbellSpec s = *this;
    s.epsilon = eps;
    return s;
}

// ---- connector / dumbbell construction ----

namespace {

// Upper connector wall, left to right: (-1, 2 eps) ... (1, 2 eps).
// Bump pieces sampled at `samples` uniform abscissae each; the straight run
// is a single span (the mesher pre-splits it to the size field).
std::vector<Vec2> upper_wall(double eps, const BumpProfile& rho, int samples) {
    std::vector<Vec2> pts;
    for (int j = 0; j <= samples; ++j) {
        double x = -1.0 + 2.0 * eps * j / samples;
        pts.push_back({x, eps * rho((-1.0 - x) / eps)});
    }
    double xr = 1.0 - 2.0 * eps;
    if (xr > pts.back().x + 1e-15) pts.push_back({xr, eps});
    for (int j = 1; j <= samples; ++j) {
        double x = 1.0 - 2.0 * eps + 2.0 * eps * j / samples;
        pts.push_back({x, eps * rho((x - 1.0) / eps)});
    }
    return pts;
}

} // namespace

PolygonDomain build_connector(double epsilon, const BumpProfile& rho, int samples) {
    if (epsilon <= 0.0) throw InvalidGeometry("epsilon must be positive");
    if (samples < 8) throw InvalidGeometry("connector samples must be >= 8");
    std::vector<Vec2> up = upper_wall(epsilon, rho, samples);

    Ring ring;
    // Lower wall left to right, then the right seam, upper wall right to left,
    // then the left seam closes the loop.
    for (const Vec2& p : up) ring.pts.push_back({p.x, -p.y});
    for (std::size_t i = 0; i + 1 < ring.pts.size(); ++i) ring.markers.push_back(EdgeMarker::Outer);
    ring.markers.push_back(EdgeMarker::Synthetic);  // (1,-2eps) -> (1,2eps)
    for (std::size_t i = up.size(); i-- > 0;) {
        ring.pts.push_back(up[i]);
        ring.markers.push_back(i > 0 ? EdgeMarker::Outer : EdgeMarker::Synthetic);
    }
    // The final marker closes (-1, 2eps) -> (-1, -2eps).
    PolygonDomain d;
    d.rings.push_back(std::move(ring));
    d.validate();
    return d;
}

PolygonDomain build_dumbbell(const DumbbellSpec& spec) {
    spec.validate();
    double eps = spec.epsilon;
    const Ring& r1 = spec.omega1.rings[0];
    const Ring& r2 = spec.omega2.rings[0];
    std::size_t e1 = find_flat_edge(r1, -1.0);
    std::size_t e2 = find_flat_edge(r2, 1.0);
    std::size_t n1 = r1.pts.size(), n2 = r2.pts.size();

    double ya1 = r1.pts[e1].y, yb1 = r1.pts[(e1 + 1) % n1].y;
    if (!(ya1 < yb1)) throw InvalidGeometry("omega1 flat edge must ascend in ring order");
    double yt2 = r2.pts[e2].y, yb2 = r2.pts[(e2 + 1) % n2].y;
    if (!(yt2 > yb2)) throw InvalidGeometry("omega2 flat edge must descend in ring order");
    if (ya1 >= -2.0 * eps || yb1 <= 2.0 * eps || yb2 >= -2.0 * eps || yt2 <= 2.0 * eps ||
        yb1 - ya1 < 4.0 * eps || yt2 - yb2 < 4.0 * eps)
        throw InvalidGeometry("flat edge too short for the connector opening");

    std::vector<Vec2> up = upper_wall(eps, spec.rho, spec.connector_samples);

    Ring ring;
    auto push = [&ring](const Vec2& p, EdgeMarker m) {
        ring.pts.push_back(p);
        ring.markers.push_back(m);  // marker of the edge leaving p
    };

    // omega1 boundary from the top of its flat edge around to the bottom.
    for (std::size_t k = 0; k < n1; ++k) {
        std::size_t i = (e1 + 1 + k) % n1;
        push(r1.pts[i], k + 1 < n1 ? r1.markers[i] : EdgeMarker::Outer);
    }
    // Down the flat edge remnant to the lower seam corner, then the lower wall.
    push({-1.0, -2.0 * eps}, EdgeMarker::Outer);
    for (std::size_t i = 1; i < up.size(); ++i) push({up[i].x, -up[i].y}, EdgeMarker::Outer);
    // Fix the marker out of the last lower-wall point: it starts the omega2
    // flat-edge remnant, still an outer edge.
    // omega2 boundary from below its flat edge around to the top.
    for (std::size_t k = 0; k < n2; ++k) {
        std::size_t i = (e2 + 1 + k) % n2;
        push(r2.pts[i], k + 1 < n2 ? r2.markers[i] : EdgeMarker::Outer);
    }
    push({1.0, 2.0 * eps}, EdgeMarker::Outer);
    for (std::size_t i = up.size() - 1; i-- > 0;) push(up[i], EdgeMarker::Outer);
    // Closing edge: (-1, 2 eps) up to (-1, yb1) = ring.pts[0].

    PolygonDomain d;
    d.rings.push_back(std::move(ring));
    try {
        d.validate();
    } catch (const InvalidGeometry& e) {
        throw InvalidGeometry(std::string("stitching failed: ") + e.what());
    }
    return d;
}

Region classify_point(const Vec2& p, const DumbbellSpec& spec) {
    if (p.x >= -1.0 && p.x <= 1.0 && std::abs(p.y) <= spec.half_width(p.x)) return Region::Connector;
    if (p.x <= -1.0 && spec.omega1.contains(p)) return Region::Omega1;
    if (p.x >= 1.0 && spec.omega2.contains(p)) return Region::Omega2;
    return Region::Outside;
}

PolygonDomain subtract_obstacle(const PolygonDomain& domain, const ObstacleShape& shape,
                                const Vec2& y, double clearance) {
    shape.validate();
    if (clearance < 0.0) throw InvalidGeometry("clearance must be non-negative");
    std::vector<Vec2> tpts = shape.translated(y);
    std::size_t n = tpts.size();

    for (const Vec2& p : tpts)
        if (!point_in_rings(p, {domain.rings[0]}))
            throw InfeasiblePlacement("obstacle vertex outside the outer ring");
    double dmin = std::numeric_limits<double>::max();
    for (const Ring& ring : domain.rings) {
        std::size_t m = ring.pts.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const Vec2& a = tpts[i];
                const Vec2& b = tpts[(i + 1) % n];
                const Vec2& c = ring.pts[j];
                const Vec2& d = ring.pts[(j + 1) % m];
                if (segments_intersect(a, b, c, d))
                    throw InfeasiblePlacement("obstacle intersects the domain boundary");
                dmin = std::min(dmin, segment_segment_dist(a, b, c, d));
            }
    }
    if (dmin < clearance - kSeamTol)
        throw InfeasiblePlacement("obstacle violates the boundary clearance");
    std::vector<Ring> obstacle_ring;
    {
        Ring tmp;
        tmp.pts = tpts;
        obstacle_ring.push_back(tmp);
    }
    for (std::size_t ri = 1; ri < domain.rings.size(); ++ri)
        if (point_in_rings(domain.rings[ri].pts[0], obstacle_ring))
            throw InfeasiblePlacement("obstacle encloses an existing hole");

    PolygonDomain out = domain;
    std::reverse(tpts.begin(), tpts.end());
    out.rings.emplace_back(std::move(tpts), EdgeMarker::Obstacle);
    return out;
}

// ---- subregions ----

bool SubregionLayout::in_half_disk(const Vec2& p, int i, double scale) const {
    double r = (i == 1 ? r1 : r2) * scale;
    Vec2 c = i == 1 ? Vec2{-1.0, 0.0} : Vec2{1.0, 0.0};
    if (dist(p, c) > r + kSeamTol) return false;
    return i == 1 ? p.x <= -1.0 + kSeamTol : p.x >= 1.0 - kSeamTol;
}

namespace {

// Semicircle polyline around center c, radius r, bulging toward sign*x.
// Endpoints and the apex land exactly on (c.x, -r), (c.x + sign*r, 0), (c.x, r).
std::vector<Vec2> semicircle(const Vec2& c, double r, double sign, int segments) {
    std::vector<Vec2> pts;
    // theta parametrized so the walk runs from (c.x, -sign_dependent...) —
    // emitted bottom-to-top for omega1 (sign=-1), top-to-bottom for omega2.
    for (int j = 0; j <= segments; ++j) {
        if (j == 0) {
            pts.push_back({c.x, sign < 0 ? c.y - r : c.y + r});
        } else if (j == segments) {
            pts.push_back({c.x, sign < 0 ? c.y + r : c.y - r});
        } else if (2 * j == segments) {
            pts.push_back({c.x + sign * r, c.y});
        } else {
            double theta = sign < 0 ? -M_PI / 2.0 - M_PI * j / segments
                                    : M_PI / 2.0 - M_PI * j / segments;
            pts.push_back({c.x + r * std::cos(theta), c.y + r * std::sin(theta)});
        }
    }
    return pts;
}

// Base ring with the flat-edge span [y_from, y_to] replaced by the arc points.
Ring carve_half_disk(const Ring& base, std::size_t flat_edge, const std::vector<Vec2>& arc) {
    std::size_t n = base.pts.size();
    Ring out;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = (flat_edge + 1 + k) % n;
        out.pts.push_back(base.pts[i]);
        out.markers.push_back(k + 1 < n ? base.markers[i] : EdgeMarker::Outer);
    }
    for (const Vec2& p : arc) {
        out.pts.push_back(p);
        out.markers.push_back(EdgeMarker::Synthetic);
    }
    // Last synthetic edge closes from the arc end back to the flat edge top;
    // mark the closing edge as outer (flat-edge remnant).
    out.markers.back() = EdgeMarker::Outer;
    return out;
}

} // namespace

SubregionLayout subregions(const DumbbellSpec& spec, double r1, double r2) {
    spec.validate();
    if (r1 <= 0.0 || r2 <= 0.0) throw InvalidGeometry("half-disk radius must be positive");
    if (r1 <= 2.0 * spec.epsilon || r2 <= 2.0 * spec.epsilon)
        throw InvalidGeometry("half-disk radius must exceed the connector opening (2*eps)");

    auto check_contained = [](const PolygonDomain& base, const Vec2& c, double r, double sign) {
        for (double scale : {1.0, 0.5}) {
            for (int k = 0; k <= 64; ++k) {
                double theta = -M_PI / 2.0 + M_PI * k / 64.0;
                Vec2 p{c.x + sign * scale * r * std::cos(theta), c.y + scale * r * std::sin(theta)};
                if (!base.contains(p))
                    throw InvalidGeometry("half-disk exits the base domain");
            }
        }
    };
    check_contained(spec.omega1, {-1.0, 0.0}, r1, -1.0);
    check_contained(spec.omega2, {1.0, 0.0}, r2, 1.0);

    const Ring& ring1 = spec.omega1.rings[0];
    const Ring& ring2 = spec.omega2.rings[0];
    std::size_t e1 = find_flat_edge(ring1, -1.0);
    std::size_t e2 = find_flat_edge(ring2, 1.0);
    if (std::abs(ring1.pts[e1].y) < r1 || std::abs(ring1.pts[(e1 + 1) % ring1.size()].y) < r1 ||
        std::abs(ring2.pts[e2].y) < r2 || std::abs(ring2.pts[(e2 + 1) % ring2.size()].y) < r2)
        throw InvalidGeometry("half-disk exits through the flat edge");

    int segs = std::max(spec.connector_samples, 8);
    SubregionLayout out;
    out.r1 = r1;
    out.r2 = r2;
    out.s1 = semicircle({-1.0, 0.0}, r1, -1.0, segs);
    out.s2 = semicircle({1.0, 0.0}, r2, 1.0, segs);
    out.omega1_prime.rings.push_back(carve_half_disk(ring1, e1, out.s1));
    out.omega2_prime.rings.push_back(carve_half_disk(ring2, e2, out.s2));
    out.omega1_prime.validate();
    out.omega2_prime.validate();
    return out;
}

} // namespace dumbbell
