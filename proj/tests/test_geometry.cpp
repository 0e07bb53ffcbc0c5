#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dumbbell/geometry.hpp"

using namespace dumbbell;

namespace {

DumbbellSpec default_spec(double eps) {
    return DumbbellSpec::rectangles(-3, -1, -1, 1, 1, -0.5, 2, 0.5, eps, 0.15);
}

// Independent area oracle for the connector: quadrature of the width profile.
double connector_area_quadrature(const DumbbellSpec& spec, int n = 200000) {
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = -1.0 + 2.0 * (i + 0.5) / n;
        a += 2.0 * spec.half_width(x) * (2.0 / n);
    }
    return a;
}

} // namespace

TEST_CASE("default bump profile endpoint conditions") {
    BumpProfile rho = BumpProfile::default_profile();
    CHECK(rho(0.0) == 2.0);
    CHECK(rho(-1.0) == 1.0);
    CHECK(rho(-2.0) == 1.0);
    // exactly 1 on the flat run
    for (int i = 0; i <= 50; ++i) {
        double q = -2.0 + i * (1.0 / 50.0);
        CHECK(rho(q) == 1.0);
    }
    // positive and continuous on [-2, 0]
    double prev = rho(-2.0);
    for (int i = 1; i <= 400; ++i) {
        double q = -2.0 + 2.0 * i / 400.0;
        double v = rho(q);
        CHECK(v > 0.0);
        CHECK(std::abs(v - prev) < 0.02);
        prev = v;
    }
    // monotone rise on [-1, 0]
    for (int i = 1; i <= 100; ++i) {
        double q0 = -1.0 + (i - 1) * 0.01, q1 = -1.0 + i * 0.01;
        CHECK(rho(q1) >= rho(q0) - 1e-15);
    }
}

TEST_CASE("custom bump profiles validate endpoint conditions") {
    auto good = BumpProfile::from_samples({{-2.0, 1.0}, {-1.0, 1.0}, {-0.5, 1.3}, {0.0, 2.0}});
    CHECK(good(0.0) == 2.0);
    CHECK(good(-1.5) == 1.0);
    CHECK(good(-0.5) == doctest::Approx(1.3));

    CHECK_THROWS_AS(BumpProfile::from_samples({{-2.0, 1.0}, {-1.0, 1.0}, {0.0, 1.9}}),
                    InvalidGeometry);  // value(0) != 2
    CHECK_THROWS_AS(BumpProfile::from_samples({{-2.0, 1.0}, {-1.0, 1.2}, {0.0, 2.0}}),
                    InvalidGeometry);  // not 1 on [-2, -1]
    CHECK_THROWS_AS(BumpProfile::from_samples({{-2.0, 1.0}, {0.0, 2.0}, {1.0, 2.0}}),
                    InvalidGeometry);  // support not [-2, 0]
    CHECK_THROWS_AS(BumpProfile::from_samples({{-2.0, 1.0}, {-1.0, 1.0}, {-0.5, -0.2}, {0.0, 2.0}}),
                    InvalidGeometry);  // dips below zero
}

TEST_CASE("connector corner points and mid half-width") {
    double eps = 0.05;
    PolygonDomain conn = build_connector(eps, BumpProfile::default_profile(), 8);
    const Ring& ring = conn.rings[0];
    // corner points exactly at (-1, +-2 eps) and (1, +-2 eps)
    int corners = 0;
    for (const Vec2& p : ring.pts) {
        if (p.x == -1.0 || p.x == 1.0) {
            CHECK(std::abs(p.y) == 2.0 * eps);
            ++corners;
        }
    }
    CHECK(corners == 4);
    // straight run at half-width exactly eps
    bool found = false;
    for (const Vec2& p : ring.pts)
        if (p.x == 1.0 - 2.0 * eps && p.y == eps) found = true;
    CHECK(found);

    DumbbellSpec spec = default_spec(eps);
    CHECK(spec.half_width(0.0) == eps);
    CHECK(spec.half_width(-1.0) == 2.0 * eps);
}

TEST_CASE("connector polyline matches the scaled profile at sample abscissae") {
    double eps = 0.05;
    int samples = 8;
    BumpProfile rho = BumpProfile::default_profile();
    PolygonDomain conn = build_connector(eps, rho, samples);
    for (int j = 0; j <= samples; ++j) {
        double x = -1.0 + 2.0 * eps * j / samples;
        double expect = eps * rho((-1.0 - x) / eps);
        bool found = false;
        for (const Vec2& p : conn.rings[0].pts)
            if (p.x == x && std::abs(p.y - expect) <= 1e-12 && p.y > 0) found = true;
        CHECK(found);
    }
}

TEST_CASE("connector construction rejects bad input") {
    CHECK_THROWS_AS(build_connector(0.0, BumpProfile::default_profile(), 8), InvalidGeometry);
    CHECK_THROWS_AS(build_connector(-0.1, BumpProfile::default_profile(), 8), InvalidGeometry);
    CHECK_THROWS_AS(build_connector(0.05, BumpProfile::default_profile(), 4), InvalidGeometry);
}

TEST_CASE("dumbbell area additivity and interval bound") {
    double eps = 0.05;
    DumbbellSpec spec = default_spec(eps);
    PolygonDomain dumbbell = build_dumbbell(spec);
    double conn_area = connector_area_quadrature(spec);
    double total = dumbbell.area();
    CHECK(total == doctest::Approx(4.0 + 1.0 + conn_area).epsilon(1e-7));
    // interval bound: min width times the straight length, max width times 2
    double conn_from_polygon = total - 5.0;
    CHECK(conn_from_polygon > 2.0 * eps * (2.0 - 4.0 * eps));
    CHECK(conn_from_polygon < 2.0 * 2.0 * eps * 2.0);

    // exact additivity against the polygon pieces themselves
    PolygonDomain conn = build_connector(eps, spec.rho, spec.connector_samples);
    double parts = spec.omega1.area() + spec.omega2.area() + conn.area();
    CHECK(std::abs(total - parts) <= 1e-12 * parts);
}

TEST_CASE("dumbbell area approaches the base areas as eps shrinks") {
    DumbbellSpec spec = default_spec(1e-6);
    PolygonDomain d = build_dumbbell(spec);
    CHECK(d.area() == doctest::Approx(5.0).epsilon(1e-5));
}

TEST_CASE("dumbbell rejects a connector that does not fit") {
    DumbbellSpec spec = DumbbellSpec::rectangles(-3, -1, -1, 1, 1, -0.5, 2, 0.5, 0.2, 0.1);
    CHECK_THROWS_AS(build_dumbbell(spec), InvalidGeometry);
}

TEST_CASE("dumbbell seam vertices are exact") {
    double eps = 0.03;
    DumbbellSpec spec = default_spec(eps);
    PolygonDomain d = build_dumbbell(spec);
    const Ring& ring = d.rings[0];
    for (std::size_t i = 0; i < ring.pts.size(); ++i) {
        const Vec2& p = ring.pts[i];
        const Vec2& q = ring.pts[(i + 1) % ring.pts.size()];
        CHECK(dist(p, q) > 1e-12);
        if (p.x == -1.0) {
            bool allowed = std::abs(p.y) == 2.0 * eps || std::abs(p.y) == 1.0;
            CHECK(allowed);
        }
        if (p.x == 1.0) {
            bool allowed = std::abs(p.y) == 2.0 * eps || std::abs(p.y) == 0.5;
            CHECK(allowed);
        }
    }
}

TEST_CASE("dumbbell is reflection symmetric for symmetric bases") {
    DumbbellSpec spec = default_spec(0.05);
    PolygonDomain d = build_dumbbell(spec);
    std::vector<Vec2> pts = d.rings[0].pts;
    std::vector<Vec2> mirrored;
    for (const Vec2& p : pts) mirrored.push_back({p.x, -p.y});
    auto key = [](const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    };
    std::sort(pts.begin(), pts.end(), key);
    std::sort(mirrored.begin(), mirrored.end(), key);
    REQUIRE(pts.size() == mirrored.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].x == mirrored[i].x);
        CHECK(pts[i].y == mirrored[i].y);
    }
}

TEST_CASE("classify_point on the reference configuration") {
    DumbbellSpec spec = default_spec(0.05);
    CHECK(classify_point({-2.0, 0.0}, spec) == Region::Omega1);
    CHECK(classify_point({0.0, 0.0}, spec) == Region::Connector);
    CHECK(classify_point({0.0, 3.0}, spec) == Region::Outside);
    CHECK(classify_point({1.5, 0.0}, spec) == Region::Omega2);
    // boundary ties resolve toward the connector
    CHECK(classify_point({-1.0, 0.1}, spec) == Region::Connector);
    CHECK(classify_point({-1.0, 0.5}, spec) == Region::Omega1);
    CHECK(classify_point({0.0, 0.05}, spec) == Region::Connector);
    CHECK(classify_point({0.0, 0.0500001}, spec) == Region::Outside);
}

TEST_CASE("classify_point partitions and Monte Carlo areas converge") {
    DumbbellSpec spec = default_spec(0.08);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-3.5, 2.5), uy(-1.5, 1.5);
    int counts[4] = {0, 0, 0, 0};
    int n = 200000;
    for (int i = 0; i < n; ++i) {
        Region r = classify_point({ux(rng), uy(rng)}, spec);
        counts[static_cast<int>(r)]++;
    }
    double box = 6.0 * 3.0;
    double a1 = box * counts[0] / n;
    double a2 = box * counts[1] / n;
    double ac = box * counts[2] / n;
    CHECK(a1 == doctest::Approx(4.0).epsilon(0.02));
    CHECK(a2 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(ac == doctest::Approx(connector_area_quadrature(spec)).epsilon(0.2));
}

TEST_CASE("subtract_obstacle bookkeeping and feasibility") {
    PolygonDomain omega1 = PolygonDomain::rectangle(-3, -1, -1, 1);
    ObstacleShape sq = ObstacleShape::square(0.4);

    PolygonDomain holed = subtract_obstacle(omega1, sq, {-2.0, 0.0}, 0.1);
    CHECK(holed.rings.size() == 2);
    CHECK(holed.rings[1].signed_area() == doctest::Approx(-0.16));
    CHECK(holed.rings[0].signed_area() == doctest::Approx(4.0));
    CHECK(holed.area() == doctest::Approx(4.0 - 0.16));
    holed.validate();

    CHECK_THROWS_AS(subtract_obstacle(omega1, sq, {-1.05, 0.0}, 0.1), InfeasiblePlacement);
    // top edge at 0.9 leaves exactly 0.1 of clearance
    CHECK_NOTHROW(subtract_obstacle(omega1, sq, {-2.0, 0.7}, 0.1));
    CHECK_THROWS_AS(subtract_obstacle(omega1, sq, {-2.0, 0.7}, 0.11), InfeasiblePlacement);
    // fully outside
    CHECK_THROWS_AS(subtract_obstacle(omega1, sq, {5.0, 5.0}, 0.1), InfeasiblePlacement);
}

TEST_CASE("subregions areas match the inscribed-polygon oracle") {
    DumbbellSpec spec = default_spec(0.05);
    double r1 = 0.3, r2 = 0.3;
    SubregionLayout layout = subregions(spec, r1, r2);
    int n = std::max(spec.connector_samples, 8);
    double inscribed1 = r1 * r1 / 2.0 * n * std::sin(M_PI / n);
    double inscribed2 = r2 * r2 / 2.0 * n * std::sin(M_PI / n);
    CHECK(layout.omega1_prime.area() == doctest::Approx(4.0 - inscribed1).epsilon(1e-12));
    CHECK(layout.omega2_prime.area() == doctest::Approx(1.0 - inscribed2).epsilon(1e-12));
    // and the smooth limit value within the discretization error
    CHECK(layout.omega1_prime.area() ==
          doctest::Approx(4.0 - M_PI * r1 * r1 / 2.0).epsilon(2e-2));

    CHECK(layout.s1.front().x == -1.0);
    CHECK(layout.s1.front().y == -r1);
    CHECK(layout.s1.back().y == r1);
    CHECK(layout.in_half_disk({-1.1, 0.0}, 1));
    CHECK(layout.in_half_disk({-1.1, 0.0}, 1, 0.5));
    CHECK(!layout.in_half_disk({-1.4, 0.0}, 1));
    CHECK(!layout.in_half_disk({-0.9, 0.0}, 1));
}

TEST_CASE("subregions rejects bad radii") {
    DumbbellSpec spec = default_spec(0.05);
    CHECK_THROWS_AS(subregions(spec, 1.5, 0.3), InvalidGeometry);  // exits height-2 base
    CHECK_THROWS_AS(subregions(spec, 0.0, 0.3), InvalidGeometry);  // degenerate
    CHECK_THROWS_AS(subregions(spec, 0.3, 0.08), InvalidGeometry); // below the opening
    CHECK_THROWS_AS(subregions(spec, 0.3, 0.6), InvalidGeometry);  // exits height-1 base
}

TEST_CASE("polygon JSON round trip") {
    DumbbellSpec spec = default_spec(0.05);
    PolygonDomain d = build_dumbbell(spec);
    PolygonDomain holed = subtract_obstacle(d, ObstacleShape::square(0.4), {-2.0, 0.0}, 0.05);
    std::string text = to_json_string(holed);
    PolygonDomain back = polygon_from_json_string(text);
    REQUIRE(back.rings.size() == holed.rings.size());
    for (std::size_t r = 0; r < back.rings.size(); ++r) {
        REQUIRE(back.rings[r].pts.size() == holed.rings[r].pts.size());
        for (std::size_t i = 0; i < back.rings[r].pts.size(); ++i) {
            CHECK(back.rings[r].pts[i].x == holed.rings[r].pts[i].x);
            CHECK(back.rings[r].pts[i].y == holed.rings[r].pts[i].y);
            CHECK(back.rings[r].markers[i] == holed.rings[r].markers[i]);
        }
    }
}

TEST_CASE("polygon validation catches malformed input") {
    PolygonDomain bowtie;
    bowtie.rings.emplace_back(std::vector<Vec2>{{0, 0}, {1, 1}, {1, 0}, {0, 1}},
                              EdgeMarker::Outer);
    CHECK_THROWS_AS(bowtie.validate(), InvalidGeometry);

    PolygonDomain clockwise;
    clockwise.rings.emplace_back(std::vector<Vec2>{{0, 0}, {0, 1}, {1, 1}, {1, 0}},
                                 EdgeMarker::Outer);
    CHECK_THROWS_AS(clockwise.validate(), InvalidGeometry);

    PolygonDomain hole_outside = PolygonDomain::rectangle(0, 0, 1, 1);
    hole_outside.rings.emplace_back(std::vector<Vec2>{{2, 0}, {2, 0.5}, {2.5, 0.5}},
                                    EdgeMarker::Obstacle);
    CHECK_THROWS_AS(hole_outside.validate(), InvalidGeometry);
}

TEST_CASE("vertical sections of the dumbbell") {
    DumbbellSpec spec = default_spec(0.05);
    PolygonDomain d = build_dumbbell(spec);
    auto mid = d.vertical_section(0.123456);
    REQUIRE(mid.size() == 1);
    CHECK(mid[0].second - mid[0].first == doctest::Approx(0.1).epsilon(1e-12));
    auto in_omega2 = d.vertical_section(1.5);
    REQUIRE(in_omega2.size() == 1);
    CHECK(in_omega2[0].second - in_omega2[0].first == doctest::Approx(1.0));
    auto in_omega1 = d.vertical_section(-2.0);
    REQUIRE(in_omega1.size() == 1);
    CHECK(in_omega1[0].second - in_omega1[0].first == doctest::Approx(2.0));
}
