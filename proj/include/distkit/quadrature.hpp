#pragma once

#include <Eigen/Dense>

namespace distkit::quadrature {

struct Rule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Gauss-Hermite rule for weight exp(-x^2) on (-inf, inf).
// Nodes/weights from the eigen decomposition of the Jacobi matrix.
const Rule& gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1].
const Rule& gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre_on(int n, double a, double b);

} // namespace distkit::quadrature
