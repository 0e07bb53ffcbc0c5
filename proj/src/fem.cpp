#include "dumbbell/fem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/Eigenvalues>
#include <boost/multiprecision/float128.hpp>

#include "dumbbell/errors.hpp"

// The distro's boost (1.74) ships an Eigen interop header that predates the
// NumTraits members Eigen 3.4 requires (infinity, quiet_NaN), so the float128
// scalar is registered here directly. std::numeric_limits<float128> is fully
// specialized by boost, which is all GenericNumTraits needs.
namespace Eigen {
template <>
struct NumTraits<boost::multiprecision::float128>
    : GenericNumTraits<boost::multiprecision::float128> {
    using Real = boost::multiprecision::float128;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 8,
        MulCost = 16,
    };
    static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
    static Real dummy_precision() { return Real(1000) * epsilon(); }
    static Real highest() { return (std::numeric_limits<Real>::max)(); }
    static Real lowest() { return (std::numeric_limits<Real>::min)(); }
    static int digits10() { return std::numeric_limits<Real>::digits10; }
};
} // namespace Eigen

namespace dumbbell {

const char* bc_name(BC bc) { return bc == BC::Dirichlet ? "dirichlet" : "neumann"; }

// ---- SparseSymmetricMatrix ----

SparseSymmetricMatrix SparseSymmetricMatrix::from_triplets(int n,
                                                           std::vector<Eigen::Triplet<double>> trips) {
    // Keep the lower triangle, merge duplicates.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (const auto& t : trips) {
        int i = t.row(), j = t.col();
        if (i < j) std::swap(i, j);
        rows[i].push_back({j, t.value()});
    }
    SparseSymmetricMatrix A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        int distinct = 0;
        for (std::size_t k = 0; k < r.size();) {
            std::size_t k2 = k;
            double s = 0.0;
            while (k2 < r.size() && r[k2].first == r[k].first) s += r[k2++].second;
            r[distinct++] = {r[k].first, s};
            k = k2;
        }
        r.resize(distinct);
        A.row_ptr[i + 1] = A.row_ptr[i] + distinct;
    }
    A.col.reserve(A.row_ptr[n]);
    A.val.reserve(A.row_ptr[n]);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, v] : rows[i]) {
            A.col.push_back(j);
            A.val.push_back(v);
        }
    return A;
}

void SparseSymmetricMatrix::multiply(const double* x, double* y) const {
    std::fill(y, y + n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            int j = col[k];
            y[i] += val[k] * x[j];
            if (j != i) y[j] += val[k] * x[i];
        }
    }
}

Eigen::VectorXd SparseSymmetricMatrix::multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(n);
    multiply(x.data(), y.data());
    return y;
}

double SparseSymmetricMatrix::sum_all() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += col[k] == i ? val[k] : 2.0 * val[k];
    return s;
}

double SparseSymmetricMatrix::diag(int i) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col[k] == i) return val[k];
    return 0.0;
}

double SparseSymmetricMatrix::max_diag() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(diag(i)));
    return m;
}

Eigen::SparseMatrix<double> SparseSymmetricMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(col.size() * 2);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            trips.emplace_back(i, col[k], val[k]);
            if (col[k] != i) trips.emplace_back(col[k], i, val[k]);
        }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

// ---- assembly ----

std::pair<SparseSymmetricMatrix, SparseSymmetricMatrix> assemble(const Mesh& mesh) {
    int n = static_cast<int>(mesh.vertices.size());
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(mesh.triangles.size() * 9);
    mt.reserve(mesh.triangles.size() * 9);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2& p0 = mesh.vertices[tri[0]];
        const Vec2& p1 = mesh.vertices[tri[1]];
        const Vec2& p2 = mesh.vertices[tri[2]];
        double area = 0.5 * orient2d(p0, p1, p2);
        if (area <= 0.0) throw SolverError("degenerate triangle in assembly");
        // Hat gradients: grad phi_i = (b_i, c_i) / (2 area).
        double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) {
                double kij = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                double mij = area / 12.0 * (i == j ? 2.0 : 1.0);
                kt.emplace_back(tri[i], tri[j], kij);
                mt.emplace_back(tri[i], tri[j], mij);
            }
    }
    return {SparseSymmetricMatrix::from_triplets(n, std::move(kt)),
            SparseSymmetricMatrix::from_triplets(n, std::move(mt))};
}

std::vector<int> free_vertices(const Mesh& mesh, BC bc) {
    std::vector<int> free;
    if (bc == BC::Neumann) {
        free.resize(mesh.vertices.size());
        for (std::size_t i = 0; i < free.size(); ++i) free[i] = static_cast<int>(i);
        return free;
    }
    auto mask = mesh.boundary_vertex_mask();
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i]) free.push_back(static_cast<int>(i));
    return free;
}

Eigen::SparseMatrix<double> reduce_matrix(const SparseSymmetricMatrix& A,
                                          const std::vector<int>& free) {
    std::vector<int> to_free(A.n, -1);
    for (std::size_t i = 0; i < free.size(); ++i) to_free[free[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < A.n; ++i) {
        int fi = to_free[i];
        if (fi < 0) continue;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            int fj = to_free[A.col[k]];
            if (fj < 0) continue;
            trips.emplace_back(fi, fj, A.val[k]);
            if (fi != fj) trips.emplace_back(fj, fi, A.val[k]);
        }
    }
    Eigen::SparseMatrix<double> R(static_cast<int>(free.size()), static_cast<int>(free.size()));
    R.setFromTriplets(trips.begin(), trips.end());
    return R;
}

// ---- shift-invert Lanczos ----

namespace {

template <typename Scalar>
using SpMat = Eigen::SparseMatrix<Scalar>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct LanczosOutcome {
    std::vector<Scalar> lambdas;
    std::vector<Vec<Scalar>> vectors;  // M-normalized
    std::vector<double> residuals;     // relative, lumped-M^{-1} proxy
    int applications = 0;
    int restarts = 0;
};

// Smallest k eigenpairs of K u = lambda M u by Lanczos on (K - sigma M)^{-1} M
// in the M-inner product, with full reorthogonalization.
template <typename Scalar>
LanczosOutcome<Scalar> lanczos_smallest(const SpMat<Scalar>& K, const SpMat<Scalar>& M,
                                        const Vec<Scalar>& mlump, double sigma_in, int k,
                                        double tol, std::uint64_t seed, int max_apps,
                                        int max_subspace, double kscale) {
    using std::abs;
    using std::sqrt;
    const int n = static_cast<int>(K.rows());
    if (k < 1) throw SolverError("k must be >= 1");
    if (k > n) throw SolverError("k exceeds the problem dimension");

    Scalar sigma = Scalar(sigma_in);
    Eigen::SimplicialLDLT<SpMat<Scalar>> ldlt;
    for (int attempt = 0;; ++attempt) {
        SpMat<Scalar> A = K - sigma * M;
        ldlt.compute(A);
        if (ldlt.info() == Eigen::Success) break;
        if (attempt >= 3) throw SolverError("factorization failed (shift adjustment exhausted)");
        sigma = sigma - Scalar(std::max(1.0, std::abs(sigma_in)));
    }

    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    LanczosOutcome<Scalar> out;
    int m_max = std::min(n, max_subspace);
    double tol_theta = tol * 1e-2;

    for (int restart = 0; restart < 4; ++restart) {
        std::mt19937_64 rng(seed + 7919 * restart);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Vec<Scalar> v(n);
        for (int i = 0; i < n; ++i) v[i] = Scalar(uni(rng));
        {
            Scalar nrm = sqrt(Scalar(v.dot(M * v)));
            v /= nrm;
        }
        std::vector<Vec<Scalar>> V{v};
        std::vector<Scalar> alpha, beta;

        auto make_T = [&](int m) {
            Mat<Scalar> T = Mat<Scalar>::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            return T;
        };

        bool breakdown = false;
        for (int j = 0; j < m_max; ++j) {
            Vec<Scalar> w = ldlt.solve(M * V[j]);
            ++out.applications;
            if (out.applications > max_apps)
                throw SolverError("eigensolver exceeded its matrix-application budget");
            if (j > 0) w -= beta[j - 1] * V[j - 1];
            Scalar a = Scalar(w.dot(M * V[j]));
            w -= a * V[j];
            alpha.push_back(a);
            // full reorthogonalization, twice
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& vi : V) w -= Scalar(w.dot(M * vi)) * vi;
            Scalar b = sqrt(Scalar(w.dot(M * w)));
            if (!(b > Scalar(0)) || b < eps * Scalar(64)) {
                breakdown = true;
                beta.push_back(Scalar(0));
                break;
            }
            beta.push_back(b);
            V.push_back(w / b);

            int m = j + 1;
            bool check = breakdown || m >= n || (m >= std::max(2 * k, 8) && (m % 4 == 0 || m == m_max));
            if (!check) continue;

            Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(make_T(m));
            if (es.info() != Eigen::Success) throw SolverError("tridiagonal eigensolve failed");
            // largest theta <-> smallest lambda = sigma + 1/theta
            std::vector<int> order(m);
            for (int i = 0; i < m; ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](int a2, int b2) { return es.eigenvalues()[a2] > es.eigenvalues()[b2]; });
            if (m < k) continue;
            bool ok = true;
            for (int i = 0; i < k && ok; ++i) {
                Scalar theta = es.eigenvalues()[order[i]];
                if (!(theta > Scalar(0))) { ok = false; break; }
                Scalar est = abs(beta[m - 1] * es.eigenvectors()(m - 1, order[i]));
                if (!(est <= Scalar(tol_theta) * abs(theta))) ok = false;
            }
            if (!ok && m < m_max && !breakdown && m < n) continue;
            if (!ok) break;

            // Assemble Ritz vectors and verify true residuals.
            std::vector<Scalar> lambdas;
            std::vector<Vec<Scalar>> vecs;
            std::vector<double> res;
            bool residual_ok = true;
            for (int i = 0; i < k; ++i) {
                Scalar theta = es.eigenvalues()[order[i]];
                Scalar lam = sigma + Scalar(1) / theta;
                Vec<Scalar> x = Vec<Scalar>::Zero(n);
                for (int q = 0; q < m; ++q) x += es.eigenvectors()(q, order[i]) * V[q];
                Scalar nrm = sqrt(Scalar(x.dot(M * x)));
                x /= nrm;
                Vec<Scalar> r = K * x - lam * (M * x);
                Scalar rn = Scalar(0);
                for (int q = 0; q < n; ++q) rn += r[q] * r[q] / mlump[q];
                rn = sqrt(rn);
                double rel = static_cast<double>(rn) /
                             std::max({std::abs(static_cast<double>(lam)), std::abs(sigma_in), 1e-300});
                if (rel > tol) residual_ok = false;
                lambdas.push_back(lam);
                vecs.push_back(std::move(x));
                res.push_back(rel);
            }
            if (residual_ok) {
                out.lambdas = std::move(lambdas);
                out.vectors = std::move(vecs);
                out.residuals = std::move(res);
                out.restarts = restart;
                return out;
            }
            if (breakdown || m >= m_max || m >= n) {
                // keep the best-so-far result in case all restarts stagnate
                if (out.lambdas.empty()) {
                    out.lambdas = std::move(lambdas);
                    out.vectors = std::move(vecs);
                    out.residuals = std::move(res);
                }
                break;
            }
            tol_theta *= 0.1;
        }
    }
    if (!out.lambdas.empty()) {
        double worst = *std::max_element(out.residuals.begin(), out.residuals.end());
        if (worst < 1e3 * tol) {
            out.restarts = 3;
            return out;  // close enough to report, caller sees residuals
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "eigensolver did not converge (best residual %.3e, tol %.3e)", worst, tol);
        throw SolverError(buf);
    }
    (void)kscale;
    throw SolverError("eigensolver did not converge within the restart budget");
}

} // namespace

EigenResult solve_eigs(const SparseSymmetricMatrix& K, const SparseSymmetricMatrix& M,
                       const Mesh& mesh, BC bc, const SolverOptions& opts) {
    if (opts.k < 1) throw SolverError("k must be >= 1");
    if (opts.tol <= 0.0) throw SolverError("tol must be positive");
    std::vector<int> free = free_vertices(mesh, bc);
    if (free.empty()) throw SolverError("no free vertices under Dirichlet conditions");
    if (static_cast<int>(free.size()) < opts.k)
        throw SolverError("k exceeds the number of free vertices");

    Eigen::SparseMatrix<double> Kr = reduce_matrix(K, free);
    Eigen::SparseMatrix<double> Mr = reduce_matrix(M, free);
    Eigen::VectorXd mlump(free.size());
    for (int i = 0; i < Kr.rows(); ++i) mlump[i] = 0.0;
    for (int j = 0; j < Mr.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Mr, j); it; ++it)
            mlump[it.row()] += it.value();
    double kscale = 0.0;
    for (int i = 0; i < Kr.rows(); ++i) kscale = std::max(kscale, Kr.coeff(i, i) / mlump[i]);

    double sigma = bc == BC::Dirichlet ? 0.0 : -1.0;

    EigenResult result;
    result.bc = bc;
    int nfull = static_cast<int>(mesh.vertices.size());

    auto expand = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(nfull);
        for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = x[i];
        return full;
    };

    if (opts.high_precision) {
        using f128 = boost::multiprecision::float128;
        SpMat<f128> K128 = Kr.cast<f128>();
        SpMat<f128> M128 = Mr.cast<f128>();
        Vec<f128> ml = mlump.cast<f128>();
        auto out = lanczos_smallest<f128>(K128, M128, ml, sigma, opts.k, opts.tol, opts.seed,
                                          opts.max_applications, opts.max_subspace, kscale);
        result.iterations = out.applications;
        result.restarts = out.restarts;
        for (int i = 0; i < opts.k; ++i) {
            result.eigenvalues.push_back(static_cast<double>(out.lambdas[i]));
            Eigen::VectorXd x(out.vectors[i].size());
            for (int q = 0; q < x.size(); ++q) x[q] = static_cast<double>(out.vectors[i][q]);
            result.vectors.push_back(expand(x));
            result.residuals.push_back(out.residuals[i]);
        }
    } else {
        auto out = lanczos_smallest<double>(Kr, Mr, mlump, sigma, opts.k, opts.tol, opts.seed,
                                            opts.max_applications, opts.max_subspace, kscale);
        result.iterations = out.applications;
        result.restarts = out.restarts;
        for (int i = 0; i < opts.k; ++i) {
            result.eigenvalues.push_back(out.lambdas[i]);
            result.vectors.push_back(expand(out.vectors[i]));
            result.residuals.push_back(out.residuals[i]);
        }
    }

    // ascending order and cluster tags
    std::vector<int> order(opts.k);
    for (int i = 0; i < opts.k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return result.eigenvalues[a] < result.eigenvalues[b]; });
    EigenResult sorted;
    sorted.bc = bc;
    sorted.iterations = result.iterations;
    sorted.restarts = result.restarts;
    for (int i : order) {
        sorted.eigenvalues.push_back(result.eigenvalues[i]);
        sorted.vectors.push_back(std::move(result.vectors[i]));
        sorted.residuals.push_back(result.residuals[i]);
    }
    sorted.cluster.assign(opts.k, 0);
    for (int i = 1; i < opts.k; ++i) {
        double a = sorted.eigenvalues[i - 1], b = sorted.eigenvalues[i];
        bool same = std::abs(b - a) <= 1e-8 * std::max({std::abs(a), std::abs(b), 1.0});
        sorted.cluster[i] = same ? sorted.cluster[i - 1] : sorted.cluster[i - 1] + 1;
    }
    return sorted;
}

EigenResult fix_sign(EigenResult result, const Mesh& mesh, SignConvention conv,
                     double noise_floor_rel) {
    if (result.vectors.empty()) return result;
    auto flip_to_positive = [&](Eigen::VectorXd& u) {
        int arg = 0;
        for (int i = 1; i < u.size(); ++i)
            if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
        if (u[arg] < 0.0) u = -u;
        double floor = noise_floor_rel * std::abs(u[arg]);
        double min_interior = 0.0;
        auto mask = mesh.boundary_vertex_mask();
        for (int i = 0; i < u.size(); ++i)
            if (!mask[i]) min_interior = std::min(min_interior, u[i]);
        if (min_interior < -floor)
            throw SolverError("ground state has genuinely mixed sign beyond the noise floor");
    };
    flip_to_positive(result.vectors[0]);
    if (conv == SignConvention::Neumann2NegativeOnOmega1 && result.vectors.size() > 1) {
        Eigen::VectorXd& u = result.vectors[1];
        double mean = 0.0;
        int count = 0;
        for (int i = 0; i < u.size(); ++i)
            if (mesh.vertex_region[i] == Region::Omega1) {
                mean += u[i];
                ++count;
            }
        if (count == 0) throw SolverError("no Omega1 vertices for the sign convention");
        if (mean > 0.0) u = -u;
    }
    return result;
}

} // namespace dumbbell
