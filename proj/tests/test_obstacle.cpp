#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dumbbell/obstacle.hpp"

using namespace dumbbell;

namespace {

DumbbellSpec default_spec(double eps) {
    return DumbbellSpec::rectangles(-3, -1, -1, 1, 1, -0.5, 2, 0.5, eps, 0.15);
}

} // namespace

TEST_CASE("placement grid anchors at the tightest feasible corner") {
    PolygonDomain omega1 = PolygonDomain::rectangle(-3, -1, -1, 1);
    ObstacleShape sq = ObstacleShape::square(0.4);
    auto grid = placement_grid(omega1, sq, 0.1, 0.05);
    REQUIRE(!grid.empty());
    double x_min = 1e9, x_max = -1e9, y_min = 1e9, y_max = -1e9;
    for (const Vec2& y : grid) {
        x_min = std::min(x_min, y.x);
        x_max = std::max(x_max, y.x);
        y_min = std::min(y_min, y.y);
        y_max = std::max(y_max, y.y);
    }
    CHECK(x_min == doctest::Approx(-2.75).epsilon(1e-12));
    CHECK(x_max == doctest::Approx(-1.25).epsilon(1e-9));
    CHECK(y_min == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(y_max == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(grid.size() == 16 * 16);
    // lexicographic ordering
    for (std::size_t i = 1; i < grid.size(); ++i) {
        bool ordered = grid[i - 1].x < grid[i].x ||
                       (grid[i - 1].x == grid[i].x && grid[i - 1].y < grid[i].y);
        CHECK(ordered);
    }
}

TEST_CASE("placement grid failure modes") {
    PolygonDomain omega1 = PolygonDomain::rectangle(-3, -1, -1, 1);
    CHECK_THROWS_AS(placement_grid(omega1, ObstacleShape::square(5.0), 0.1, 0.05), Error);
    auto single = placement_grid(omega1, ObstacleShape::square(0.4), 10.0, 0.05);
    CHECK(single.size() == 1);
}

TEST_CASE("obstacle sweep prefers the localization site") {
    DumbbellSpec spec = default_spec(0.1);
    std::vector<Vec2> grid = {{-2.5, 0.5}, {-2.0, 0.0}, {1.5, 0.0}};
    ObstacleSweepParams params;
    params.h_max = 0.12;
    params.clearance = 0.1;
    params.x0 = {-2.0, 0.0};
    params.jobs = 2;
    ObstacleSweepResult res = sweep(spec, ObstacleShape::square(0.4), grid, params);
    REQUIRE(res.placements.size() == 3);
    for (const Placement& p : res.placements) CHECK(p.feasible);

    // perforating near the hot spot raises lambda_1 most
    CHECK(res.y_star.x == -2.0);
    CHECK(res.y_star.y == 0.0);
    CHECK(res.placements[1].lambda1 > res.placements[2].lambda1);
    CHECK(res.placements[1].lambda1 > res.placements[0].lambda1);
    CHECK(res.dist_to_x0 == 0.0);
    CHECK(res.largeness_ratio > 1.2);
    // omega1 placements raise lambda_1 well beyond discretization noise
    CHECK(res.placements[0].lambda1 > res.lambda_baseline);
    CHECK(res.placements[1].lambda1 > res.lambda_baseline);
    // far placement cannot lower it beyond solver noise
    CHECK(res.placements[2].lambda1 > res.lambda_baseline - 5e-3);
}

TEST_CASE("mirror symmetry of the lambda landscape") {
    DumbbellSpec spec = default_spec(0.1);
    std::vector<Vec2> grid = {{-2.2, 0.4}, {-2.2, -0.4}};
    ObstacleSweepParams params;
    params.h_max = 0.12;
    params.clearance = 0.1;
    ObstacleSweepResult res = sweep(spec, ObstacleShape::square(0.4), grid, params);
    REQUIRE(res.placements[0].feasible);
    REQUIRE(res.placements[1].feasible);
    // re-meshing jitter dominates the solver tolerance here; 1% band
    CHECK(res.placements[0].lambda1 ==
          doctest::Approx(res.placements[1].lambda1).epsilon(1e-2));
}

TEST_CASE("infeasible placements are recorded, not fatal") {
    DumbbellSpec spec = default_spec(0.1);
    std::vector<Vec2> grid = {{-2.0, 0.0}, {0.0, 0.0}};  // second sits in the connector
    ObstacleSweepParams params;
    params.h_max = 0.12;
    params.clearance = 0.1;
    ObstacleSweepResult res = sweep(spec, ObstacleShape::square(0.4), grid, params);
    CHECK(res.placements[0].feasible);
    CHECK(!res.placements[1].feasible);
    CHECK(!res.placements[1].note.empty());
}

TEST_CASE("asymmetry ratio at flat boundary and reflex corner") {
    PolygonDomain rect = PolygonDomain::rectangle(0, 0, 4, 2);
    // flat boundary point: half the ball is outside
    double flat = asymmetry_ratio(rect, {2.0, 0.0}, 0.2, 20000, 99);
    CHECK(flat == doctest::Approx(0.5).epsilon(0.02));

    // reflex corner of an L-shaped domain: interior angle 3 pi / 2
    PolygonDomain ell;
    ell.rings.emplace_back(
        std::vector<Vec2>{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, EdgeMarker::Outer);
    ell.validate();
    double reflex = asymmetry_ratio(ell, {1.0, 1.0}, 0.1, 20000, 99);
    CHECK(reflex == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("estimate_asymmetry on a convex domain") {
    PolygonDomain rect = PolygonDomain::rectangle(0, 0, 3, 1);
    AsymmetryEstimate est = estimate_asymmetry(rect, {0.05, 0.15}, 150, 400, 1234);
    CHECK(est.alpha >= 0.5 - 3.0 * est.std_error - 0.02);
    // determinism under a fixed seed
    AsymmetryEstimate again = estimate_asymmetry(rect, {0.05, 0.15}, 150, 400, 1234);
    CHECK(est.alpha == again.alpha);
    CHECK(est.argmin_x.x == again.argmin_x.x);
    CHECK_THROWS_AS(estimate_asymmetry(rect, {}, 150, 400, 1), Error);
    CHECK_THROWS_AS(estimate_asymmetry(rect, {0.1}, 10, 400, 1), Error);
}
