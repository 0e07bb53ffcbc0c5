#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dumbbell/mesh.hpp"
#include "dumbbell/oracle.hpp"

using namespace dumbbell;

TEST_CASE("rectangle spectra reference values") {
    auto sq_d = rectangle_spectrum(1.0, 1.0, BC::Dirichlet, 4);
    CHECK(sq_d.entries[0].lambda == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
    CHECK(sq_d.entries[1].lambda == doctest::Approx(5.0 * M_PI * M_PI).epsilon(1e-14));
    CHECK(sq_d.entries[2].lambda == doctest::Approx(5.0 * M_PI * M_PI).epsilon(1e-14));

    auto big_d = rectangle_spectrum(2.0, 2.0, BC::Dirichlet, 1);
    CHECK(big_d.entries[0].lambda == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));

    auto sq_n = rectangle_spectrum(1.0, 1.0, BC::Neumann, 3);
    CHECK(sq_n.entries[0].lambda == 0.0);
    CHECK(sq_n.entries[1].lambda == doctest::Approx(M_PI * M_PI).epsilon(1e-14));
    CHECK(sq_n.entries[2].lambda == doctest::Approx(M_PI * M_PI).epsilon(1e-14));

    // sorted ascending
    auto many = rectangle_spectrum(1.3, 0.7, BC::Dirichlet, 60);
    for (std::size_t i = 1; i < many.entries.size(); ++i)
        CHECK(many.entries[i].lambda >= many.entries[i - 1].lambda);
}

TEST_CASE("interval Dirichlet eigenvalues") {
    auto eta2 = interval_dirichlet(2.0, 3);
    CHECK(eta2[0] == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-14));
    auto eta1 = interval_dirichlet(1.0, 5);
    CHECK(eta1[0] == doctest::Approx(M_PI * M_PI).epsilon(1e-14));
    for (int k = 1; k <= 5; ++k)
        CHECK(eta1[k - 1] / eta1[0] == doctest::Approx(double(k) * k).epsilon(1e-14));
}

TEST_CASE("eigenfunction evaluator self-consistency") {
    auto spec = rectangle_spectrum(1.4, 0.9, BC::Dirichlet, 6);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.05, 1.35), uy(0.05, 0.85);
    for (std::size_t idx = 0; idx < spec.entries.size(); ++idx) {
        double lam = spec.entries[idx].lambda;
        for (int s = 0; s < 10; ++s) {
            Vec2 p{ux(rng), uy(rng)};
            double u = spec.eval(idx, p);
            // analytic Laplacian identity
            CHECK(spec.eval_laplacian(idx, p) + lam * u == doctest::Approx(0.0).epsilon(1e-12));
            // five-point finite-difference cross-check
            double h = 1e-5;
            double fd = (spec.eval(idx, {p.x + h, p.y}) + spec.eval(idx, {p.x - h, p.y}) +
                         spec.eval(idx, {p.x, p.y + h}) + spec.eval(idx, {p.x, p.y - h}) -
                         4.0 * u) /
                        (h * h);
            CHECK(fd == doctest::Approx(-lam * u).epsilon(1e-4));
        }
    }
    // L2 normalization by midpoint quadrature
    int n = 400;
    double dx = 1.4 / n, dy = 0.9 / n;
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double u = spec.eval(0, {(i + 0.5) * dx, (j + 0.5) * dy});
            mass += u * u * dx * dy;
        }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("Weyl counting smoke test") {
    auto spec = rectangle_spectrum(1.0, 1.0, BC::Dirichlet, 100);
    double A = 1.0, P = 4.0;
    for (int k = 20; k <= 100; k += 10) {
        double lam = spec.entries[k - 1].lambda;
        double corrected = A * lam / (4.0 * M_PI) - P * std::sqrt(lam) / (4.0 * M_PI);
        CHECK(std::abs(k - corrected) <= 0.2 * k + 3.0);
    }
}

TEST_CASE("dense reference agrees with the sparse solver") {
    MeshOptions opts;
    opts.h_max = 0.1;
    Mesh mesh = triangulate(PolygonDomain::rectangle(0, 0, 1, 1), opts);
    REQUIRE(mesh.vertices.size() <= 2000);
    auto [K, M] = assemble(mesh);

    for (BC bc : {BC::Dirichlet, BC::Neumann}) {
        SolverOptions sopts;
        sopts.k = 6;
        EigenResult sparse = solve_eigs(K, M, mesh, bc, sopts);
        EigenResult dense = dense_reference_eigs(K, M, mesh, bc, 6);
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(sparse.eigenvalues[i] - dense.eigenvalues[i]) <=
                  1e-7 * std::max(std::abs(dense.eigenvalues[i]), 1.0));
            // eigenvector alignment per simple eigenvalue
            bool simple = (i == 0 || std::abs(dense.eigenvalues[i] - dense.eigenvalues[i - 1]) >
                                         1e-4 * std::abs(dense.eigenvalues[i])) &&
                          (i == 5 || std::abs(dense.eigenvalues[i + 1] - dense.eigenvalues[i]) >
                                         1e-4 * std::max(std::abs(dense.eigenvalues[i]), 1.0));
            if (simple) {
                double align = std::abs(sparse.vectors[i].dot(M.multiply(dense.vectors[i])));
                CHECK(align >= 1.0 - 1e-6);
            }
        }
    }
}

TEST_CASE("near-degenerate pair matches as a subspace") {
    MeshOptions opts;
    opts.h_max = 0.07;
    Mesh mesh = triangulate(PolygonDomain::rectangle(0, 0, 1, 1), opts);
    auto [K, M] = assemble(mesh);
    SolverOptions sopts;
    sopts.k = 3;
    EigenResult sparse = solve_eigs(K, M, mesh, BC::Dirichlet, sopts);
    EigenResult dense = dense_reference_eigs(K, M, mesh, BC::Dirichlet, 3);

    // lambda_2 = lambda_3 = 5 pi^2 in the continuum; compare the discrete
    // 2D spans through the M-weighted principal angles
    Eigen::MatrixXd S(sparse.vectors[0].size(), 2), D(S.rows(), 2);
    S.col(0) = sparse.vectors[1];
    S.col(1) = sparse.vectors[2];
    D.col(0) = dense.vectors[1];
    D.col(1) = dense.vectors[2];
    Eigen::MatrixXd C(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) C(i, j) = S.col(i).dot(M.multiply(D.col(j)));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    double angle = std::acos(std::clamp(svd.singularValues()[1], 0.0, 1.0));
    CHECK(angle <= 1e-5);

    // the discrete pair splits by far more than the 1e-8 cluster threshold,
    // so the solver reports three singleton clusters
    CHECK(sparse.cluster == std::vector<int>{0, 1, 2});
}

TEST_CASE("dense reference enforces its dimension cap") {
    MeshOptions opts;
    opts.h_max = 0.02;
    Mesh mesh = triangulate(PolygonDomain::rectangle(0, 0, 1, 1), opts);
    REQUIRE(mesh.vertices.size() > 2000);
    auto [K, M] = assemble(mesh);
    CHECK_THROWS_AS(dense_reference_eigs(K, M, mesh, BC::Dirichlet, 1), Error);
}
