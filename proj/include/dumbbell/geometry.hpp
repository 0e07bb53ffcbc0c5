#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dumbbell/errors.hpp"
#include "dumbbell/vec2.hpp"

namespace dumbbell {

enum class Region { Omega1, Omega2, Connector, Outside };

const char* region_name(Region r);
std::optional<Region> region_from_name(const std::string& name);

enum class EdgeMarker { Outer, Obstacle, Synthetic };

const char* marker_name(EdgeMarker m);

/// Positive bump profile on q in [-2, 0] with value(0) = 2 and value == 1 on
/// [-2, -1]. Piecewise-cubic Hermite with monotone-preserving slopes.
class BumpProfile {
public:
    // Flat on [-2,-1], single monotone cubic rising 1 -> 2 on [-1,0] with
    // zero slope at both ends.
    static BumpProfile default_profile();

    // Interpolates user samples (q, value) with Fritsch-Carlson slopes.
    // Throws InvalidGeometry if the required endpoint conditions fail.
    static BumpProfile from_samples(std::vector<std::pair<double, double>> samples);

    double operator()(double q) const;

    const std::vector<double>& knots() const { return q_; }
    const std::vector<double>& values() const { return v_; }

private:
    BumpProfile() = default;
    void validate() const;

    std::vector<double> q_;  // strictly increasing, q_.front() == -2, q_.back() == 0
    std::vector<double> v_;
    std::vector<double> d_;  // Hermite slopes at the knots
};

/// One closed vertex loop plus a marker per edge (edge i joins pts[i] and
/// pts[(i+1) % n]).
struct Ring {
    std::vector<Vec2> pts;
    std::vector<EdgeMarker> markers;

    Ring() = default;
    Ring(std::vector<Vec2> p, EdgeMarker m);

    double signed_area() const;
    std::size_t size() const { return pts.size(); }
};

/// Polygon with optional holes. rings[0] is the outer loop (counter-clockwise),
/// the rest are holes (clockwise).
struct PolygonDomain {
    std::vector<Ring> rings;

    static PolygonDomain rectangle(double x0, double y0, double x1, double y1);

    double area() const;  // outer area minus hole areas
    std::array<Vec2, 2> bbox() const;

    // Even-odd containment; points on the boundary count as inside.
    bool contains(const Vec2& p) const;
    bool strictly_inside(const Vec2& p, double clearance) const;
    double boundary_distance(const Vec2& p) const;

    // Intersections of the vertical line {x = z} with the domain interior,
    // as sorted disjoint y-intervals.
    std::vector<std::pair<double, double>> vertical_section(double z) const;

    // Checks ring orientations, simplicity, hole disjointness/containment.
    void validate() const;
};

std::string to_json_string(const PolygonDomain& d);
PolygonDomain polygon_from_json_string(const std::string& text);

/// Convex obstacle shape with centroid at the origin, counter-clockwise.
struct ObstacleShape {
    std::vector<Vec2> vertices;

    static ObstacleShape square(double side);

    void validate() const;  // convex, CCW
    std::array<Vec2, 2> bbox() const;
    std::vector<Vec2> translated(const Vec2& y) const;
};

/// Parametric description of the one-parameter dumbbell family: two base
/// polygons with flat seam edges on {x = -1} and {x = +1}, joined by a
/// connector of half-width epsilon * rho((-1 - x)/epsilon) near the seams and
/// epsilon in the middle.
struct DumbbellSpec {
    PolygonDomain omega1;  // in {x <= -1}, flat edge on x = -1 covering |y| < 3 xi
    PolygonDomain omega2;  // in {x >= +1}, flat edge on x = +1 covering |y| < 3 xi
    double epsilon = 0.05;
    double xi = 0.15;
    BumpProfile rho = BumpProfile::default_profile();
    int connector_samples = 8;

    static DumbbellSpec rectangles(double x0a, double y0a, double x1a, double y1a,
                                   double x0b, double y0b, double x1b, double y1b,
                                   double epsilon, double xi);

    void validate() const;

    // Connector half-width at abscissa x in [-1, 1].
    double half_width(double x) const;

    DumbbellSpec with_epsilon(double eps) const;
};

/// The subregion layout used by the nodal-containment analysis: half-disks of
/// radius r_i centered at the seam midpoints (-1, 0) and (1, 0), their
/// separating semicircles, and the trimmed base domains.
struct SubregionLayout {
    double r1 = 0.0, r2 = 0.0;
    PolygonDomain omega1_prime;
    PolygonDomain omega2_prime;
    std::vector<Vec2> s1;  // semicircle polyline in omega1
    std::vector<Vec2> s2;  // semicircle polyline in omega2

    // Analytic membership in the closed half-disk D_{r_i} (i = 1 or 2),
    // optionally scaled (scale = 0.5 tests D_{r_i/2}).
    bool in_half_disk(const Vec2& p, int i, double scale = 1.0) const;
};

// ---- operations ----

// Closed polyline of the connector Q_eps; seam edges at x = -1 and x = +1 are
// marked Synthetic, the profile walls Outer.
PolygonDomain build_connector(double epsilon, const BumpProfile& rho, int samples);

// Single simple polygon: the base flat edges split at y = +-2 eps with the
// connector walls spliced in. Seam vertices coincide exactly.
PolygonDomain build_dumbbell(const DumbbellSpec& spec);

Region classify_point(const Vec2& p, const DumbbellSpec& spec);

// Adds the translated obstacle as a hole ring (marked Obstacle). Throws
// InfeasiblePlacement if the obstacle leaves the domain or violates the
// clearance, InvalidGeometry on malformed input.
PolygonDomain subtract_obstacle(const PolygonDomain& domain, const ObstacleShape& shape,
                                const Vec2& y, double clearance);

SubregionLayout subregions(const DumbbellSpec& spec, double r1, double r2);

} // namespace dumbbell
