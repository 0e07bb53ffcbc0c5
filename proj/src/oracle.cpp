#include "dumbbell/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dumbbell/errors.hpp"

namespace dumbbell {

AnalyticSpectrum rectangle_spectrum(double a, double b, BC bc, int k) {
    if (a <= 0.0 || b <= 0.0) throw Error("rectangle sides must be positive");
    if (k < 1) throw Error("k must be >= 1");
    AnalyticSpectrum s;
    s.a = a;
    s.b = b;
    s.bc = bc;
    int lo = bc == BC::Dirichlet ? 1 : 0;
    int hi = lo + k + 8;
    for (int m = lo; m <= hi; ++m)
        for (int n = lo; n <= hi; ++n) {
            double lambda = M_PI * M_PI * (m * m / (a * a) + n * n / (b * b));
            s.entries.push_back({lambda, m, n});
        }
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& x, const auto& y) {
        if (x.lambda != y.lambda) return x.lambda < y.lambda;
        if (x.m != y.m) return x.m < y.m;
        return x.n < y.n;
    });
    s.entries.resize(k);
    return s;
}

double AnalyticSpectrum::eval(std::size_t idx, const Vec2& p) const {
    const Entry& e = entries.at(idx);
    if (bc == BC::Dirichlet) {
        double norm = 2.0 / std::sqrt(a * b);
        return norm * std::sin(e.m * M_PI * p.x / a) * std::sin(e.n * M_PI * p.y / b);
    }
    double cm = e.m == 0 ? 1.0 : 2.0;
    double cn = e.n == 0 ? 1.0 : 2.0;
    double norm = std::sqrt(cm * cn / (a * b));
    return norm * std::cos(e.m * M_PI * p.x / a) * std::cos(e.n * M_PI * p.y / b);
}

double AnalyticSpectrum::eval_laplacian(std::size_t idx, const Vec2& p) const {
    const Entry& e = entries.at(idx);
    double lam = M_PI * M_PI * (e.m * e.m / (a * a) + e.n * e.n / (b * b));
    return -lam * eval(idx, p);
}

std::vector<double> interval_dirichlet(double L, int k) {
    if (L <= 0.0) throw Error("interval length must be positive");
    std::vector<double> eta;
    for (int j = 1; j <= k; ++j) eta.push_back(j * M_PI / L * (j * M_PI / L));
    return eta;
}

EigenResult dense_reference_eigs(const SparseSymmetricMatrix& K, const SparseSymmetricMatrix& M,
                                 const Mesh& mesh, BC bc, int k) {
    std::vector<int> free = free_vertices(mesh, bc);
    if (static_cast<int>(free.size()) > 2000)
        throw Error("dense reference capped at dimension 2000");
    if (static_cast<int>(free.size()) < k) throw Error("k exceeds the reduced dimension");

    Eigen::MatrixXd Kd = Eigen::MatrixXd(reduce_matrix(K, free));
    Eigen::MatrixXd Md = Eigen::MatrixXd(reduce_matrix(M, free));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolve failed");

    Eigen::VectorXd mlump = Md.rowwise().sum();
    double sigma_scale = bc == BC::Neumann ? 1.0 : 0.0;

    EigenResult result;
    result.bc = bc;
    int nfull = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < k; ++i) {
        double lam = es.eigenvalues()[i];
        Eigen::VectorXd x = es.eigenvectors().col(i);
        double nrm = std::sqrt(x.dot(Md * x));
        x /= nrm;
        Eigen::VectorXd r = Kd * x - lam * (Md * x);
        double rn = 0.0;
        for (int q = 0; q < x.size(); ++q) rn += r[q] * r[q] / mlump[q];
        result.eigenvalues.push_back(lam);
        result.residuals.push_back(std::sqrt(rn) / std::max({std::abs(lam), sigma_scale, 1e-300}));
        Eigen::VectorXd full = Eigen::VectorXd::Zero(nfull);
        for (std::size_t q = 0; q < free.size(); ++q) full[free[q]] = x[q];
        result.vectors.push_back(std::move(full));
    }
    result.cluster.assign(k, 0);
    for (int i = 1; i < k; ++i) {
        double a = result.eigenvalues[i - 1], b = result.eigenvalues[i];
        bool same = std::abs(b - a) <= 1e-8 * std::max({std::abs(a), std::abs(b), 1.0});
        result.cluster[i] = same ? result.cluster[i - 1] : result.cluster[i - 1] + 1;
    }
    return result;
}

} // namespace dumbbell
