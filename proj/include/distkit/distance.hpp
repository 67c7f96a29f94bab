#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "distkit/density_grid.hpp"
#include "distkit/stats.hpp"

namespace distkit::distance {

// Probability vector over k categories; nonnegative entries summing to 1.
struct DiscreteDistribution {
    Eigen::VectorXd probs;

    // Validates nonnegativity and unit mass (1e-12 absolute).
    static DiscreteDistribution make(Eigen::VectorXd probs);
};

// Normal parameters with box truncation; entries of lower/upper may be
// -inf / +inf for one-sided or absent truncation.
struct TruncatedGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return mean.size(); }
    void validate() const;

    static TruncatedGaussian univariate(double mean, double variance, double lower, double upper);
};

// Overlap box used by the truncated cross terms. `intersection` is the
// support of the product density, [max(a,c), min(b,d)], and the default;
// `as_printed` keeps the [min(a,c), min(b,d)] variant of the source formula
// for comparison runs.
enum class OverlapConvention { intersection, as_printed };

// Monte Carlo estimate with its standard error (0 for exact paths).
struct McResult {
    double value = 0.0;
    double std_error = 0.0;
};

// -- normal CDF helpers ------------------------------------------------------

// Phi(x) via erfc; relative accuracy ~1e-15 in both tails.
double normal_cdf(double x);

// Phi(b) - Phi(a), evaluated to avoid cancellation when both arguments sit
// in the same tail. Requires a <= b.
double normal_cdf_diff(double a, double b);

// -- coefficients and distances ----------------------------------------------

// sum_i sqrt(p_i q_i), clamped to [0,1].
double bc_coefficient_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q);

// -ln(rho); rho = 0 maps to +inf. Inputs outside [-1e-12, 1+1e-12] are errors.
double distance_from_coefficient(double rho);

// Closed form for two univariate normals.
double bc_distance_normal_1d(double mean_p, double var_p, double mean_q, double var_q);

// Closed form for two multivariate normals. The log-determinant ratio goes
// through stats::log_det_psd and the quadratic form through a symmetric
// solve; no covariance is ever inverted explicitly.
double bc_distance_mvn(const stats::GaussianModel& p, const stats::GaussianModel& q,
                       double eigen_floor = 1e-12);

// Trapezoidal quadrature of sqrt(f*g) over a shared grid.
double bc_coefficient_grid(const DensityGrid& f, const DensityGrid& g);

// M-population coefficient: quadrature of the M-th root of the product.
double bc_coefficient_multi(const std::vector<DensityGrid>& populations);

// Truncated univariate normal distance (closed form). Disjoint truncation
// intervals give +inf.
double bc_distance_truncated_normal_1d(const TruncatedGaussian& p, const TruncatedGaussian& q,
                                       OverlapConvention convention = OverlapConvention::intersection);

// Truncated multivariate normal distance. The three box masses are exact
// products of univariate Phi-differences when every covariance involved is
// diagonal; otherwise they are estimated by antithetic Monte Carlo with
// mc_samples draws from the given seed, and the distance carries a
// delta-method standard error.
McResult bc_distance_truncated_mvn(const TruncatedGaussian& p, const TruncatedGaussian& q,
                                   std::int64_t mc_samples, std::uint64_t seed,
                                   OverlapConvention convention = OverlapConvention::intersection);

// -- box-probability kernels (used by the truncated path; exposed for the
//    serial/parallel consistency tests and the benchmark) -------------------

// P(N(mean, cov) in [lo, hi]) by antithetic Monte Carlo. Deterministic for a
// given seed and bit-identical for any worker count.
McResult gaussian_box_probability_mc(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     std::int64_t n_samples, std::uint64_t seed);

// Single-thread reference implementation; identical arithmetic, same result.
McResult gaussian_box_probability_mc_serial(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                            std::int64_t n_samples, std::uint64_t seed);

// Exact product of Phi-differences for a diagonal covariance.
double gaussian_box_probability_diagonal(const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

} // namespace distkit::distance
