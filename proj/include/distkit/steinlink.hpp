#pragma once

#include <cstdint>
#include <functional>
#include <utility>

namespace distkit::steinlink {

// A joint (X, Y) model with known marginal densities, used to exercise the
// covariance-coefficient identity. The sampler must be a pure function of
// (seed, index) so runs are reproducible and parallelizable.
struct BivariateSampleModel {
    std::function<std::pair<double, double>(std::uint64_t seed, std::uint64_t index)> sample;
    std::function<double(double)> marginal_x;
    std::function<double(double)> marginal_y;
    double mean_y = 0.0;
    double support_lo = -12.0; // quadrature range for the coefficient
    double support_hi = 12.0;
};

// c(t) = t - sqrt(f_Y(t) / f_X(t)).
double c_function(double t, const BivariateSampleModel& model);

// Bhattacharyya coefficient of the two marginals by trapezoidal quadrature
// over the declared support.
double coefficient_from_marginals(const BivariateSampleModel& model, double step = 1e-3);

struct ResidualReport {
    double residual = 0.0;   // left minus right side of the identity
    double std_error = 0.0;  // Monte Carlo standard error of the residual
    double rho = 0.0;        // quadrature coefficient used on the right side
    double cov_c_y = 0.0;    // Cov[c(X), Y]
    double cov_x_y = 0.0;    // Cov(X, Y)
    double mean_ratio_y = 0.0; // E[sqrt(f_Y/f_X)(X) * Y]
    std::int64_t samples = 0;
};

// Estimates every term of Cov[c(X),Y] = Cov(X,Y) - E[sqrt(f_Y/f_X)(X) Y]
// + mu_Y rho by Monte Carlo (rho by quadrature) and reports the residual.
// The identity is exact, so the residual is pure sampling noise.
ResidualReport verify_covariance_identity(const BivariateSampleModel& model,
                                          std::int64_t mc_samples, std::uint64_t seed);

// Correlated Gaussian test model: X ~ N(mu_x, 1), Y ~ N(mu_y, 1),
// corr(X, Y) = corr.
BivariateSampleModel make_bivariate_normal_model(double mu_x, double mu_y, double corr);

} // namespace distkit::steinlink
