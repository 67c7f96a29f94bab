#include "distkit/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace distkit::quadrature {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix, weights are mu0 * (first eigenvector component)^2.
Rule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("quadrature rule eigen decomposition failed");

    Rule rule;
    rule.nodes = solver.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

Rule make_hermite(int n) {
    Eigen::VectorXd offdiag(n - 1);
    for (int i = 1; i < n; ++i)
        offdiag[i - 1] = std::sqrt(i / 2.0);
    return golub_welsch(offdiag, std::sqrt(M_PI));
}

Rule make_legendre(int n) {
    Eigen::VectorXd offdiag(n - 1);
    for (int i = 1; i < n; ++i)
        offdiag[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
    return golub_welsch(offdiag, 2.0);
}

const Rule& cached(std::map<int, Rule>& cache, std::mutex& mtx, int n, Rule (*make)(int)) {
    if (n < 1)
        throw std::invalid_argument("quadrature rule needs at least one node");
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, make(n)).first;
    return it->second;
}

} // namespace

const Rule& gauss_hermite(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    return cached(cache, mtx, n, make_hermite);
}

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    return cached(cache, mtx, n, make_legendre);
}

Rule gauss_legendre_on(int n, double a, double b) {
    const Rule& base = gauss_legendre(n);
    Rule rule;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    rule.nodes = (base.nodes.array() * half + mid).matrix();
    rule.weights = base.weights * half;
    return rule;
}

} // namespace distkit::quadrature
