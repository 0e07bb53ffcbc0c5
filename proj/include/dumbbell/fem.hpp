#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dumbbell/mesh.hpp"

namespace dumbbell {

enum class BC { Dirichlet, Neumann };

const char* bc_name(BC bc);

/// Symmetric sparse matrix storing only the lower triangle (row >= col).
struct SparseSymmetricMatrix {
    int n = 0;
    std::vector<int> row_ptr;  // size n + 1
    std::vector<int> col;      // sorted within each row
    std::vector<double> val;

    static SparseSymmetricMatrix from_triplets(int n, std::vector<Eigen::Triplet<double>> trips);

    // y = A x with the symmetric part expanded.
    void multiply(const double* x, double* y) const;
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

    double sum_all() const;          // sum over all entries of the full matrix
    double diag(int i) const;
    double max_diag() const;
    Eigen::SparseMatrix<double> to_eigen() const;  // full symmetric expansion
};

/// Eigenpairs of K u = lambda M u with vertex-value eigenvectors over the full
/// mesh (Dirichlet vectors vanish on boundary vertices exactly).
struct EigenResult {
    BC bc = BC::Dirichlet;
    std::vector<double> eigenvalues;            // ascending
    std::vector<Eigen::VectorXd> vectors;       // M-normalized
    std::vector<double> residuals;              // lumped-M^{-1} norm, relative
    std::vector<int> cluster;                   // cluster id per pair (1e-8 relative)
    int iterations = 0;
    int restarts = 0;
};

// P1 stiffness and consistent mass matrices.
std::pair<SparseSymmetricMatrix, SparseSymmetricMatrix> assemble(const Mesh& mesh);

struct SolverOptions {
    int k = 1;
    double tol = 1e-9;
    std::uint64_t seed = 20240901;
    bool high_precision = false;  // run the shift-invert iteration in float128
    int max_applications = 50000;
    int max_subspace = 220;
};

EigenResult solve_eigs(const SparseSymmetricMatrix& K, const SparseSymmetricMatrix& M,
                       const Mesh& mesh, BC bc, const SolverOptions& opts);

enum class SignConvention { GroundStatePositive, Neumann2NegativeOnOmega1 };

// Deterministic sign gauge. GroundStatePositive flips the first pair so the
// dominant values are positive and checks it has no genuinely mixed sign;
// Neumann2NegativeOnOmega1 additionally flips the second pair so its mean over
// Omega1 vertices is negative.
EigenResult fix_sign(EigenResult result, const Mesh& mesh, SignConvention conv,
                     double noise_floor_rel = 1e-6);

// Shared by the sparse solver and the dense oracle: the free (non-boundary)
// vertex list under the given boundary condition.
std::vector<int> free_vertices(const Mesh& mesh, BC bc);

// Reduced full-storage matrix over the free vertices.
Eigen::SparseMatrix<double> reduce_matrix(const SparseSymmetricMatrix& A,
                                          const std::vector<int>& free);

} // namespace dumbbell
