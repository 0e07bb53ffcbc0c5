#pragma once

#include <vector>

#include "dumbbell/fem.hpp"

namespace dumbbell {

/// Separation-of-variables spectrum of a rectangle [0,a] x [0,b].
struct AnalyticSpectrum {
    struct Entry {
        double lambda;
        int m, n;
    };
    double a = 1.0, b = 1.0;
    BC bc = BC::Dirichlet;
    std::vector<Entry> entries;  // ascending, ties in (m, n) lexicographic order

    // L2-normalized eigenfunction value at p (coordinates relative to [0,a]x[0,b]).
    double eval(std::size_t idx, const Vec2& p) const;
    // Analytic Laplacian of the same eigenfunction.
    double eval_laplacian(std::size_t idx, const Vec2& p) const;
};

AnalyticSpectrum rectangle_spectrum(double a, double b, BC bc, int k);

// Dirichlet eigenvalues (j pi / L)^2 of a segment of length L, j = 1..k.
std::vector<double> interval_dirichlet(double L, int k);

// Brute-force dense symmetric-definite reference; throws on dimensions > 2000.
EigenResult dense_reference_eigs(const SparseSymmetricMatrix& K, const SparseSymmetricMatrix& M,
                                 const Mesh& mesh, BC bc, int k);

} // namespace dumbbell
