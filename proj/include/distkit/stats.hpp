#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace distkit::stats {

// One market's panel: rows are tickers, columns are trading dates.
struct PanelData {
    std::string market_id;
    std::vector<std::string> tickers;
    std::vector<std::string> dates; // ISO-8601, strictly increasing
    Eigen::MatrixXd values;         // tickers.size() x dates.size()

    // Throws if shapes, date ordering, or finiteness are violated.
    // require_positive additionally enforces entries > 0 (price/volume panels).
    void validate(bool require_positive) const;
};

// Mean vector and covariance matrix of a multivariate normal model.
struct GaussianModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    Eigen::Index dim() const { return mean.size(); }
};

// Relative tolerance for the symmetry checks below.
inline constexpr double kSymmetryTol = 1e-12;

// Row means and unbiased sample covariance (divisor n-1) of an m x n sample
// matrix (columns are observations), plus an optional ridge on the diagonal.
GaussianModel estimate_gaussian(const Eigen::MatrixXd& samples, double regularization = 0.0);

// Default ridge for ill-conditioned covariances: 1e-8 * trace(cov) / m.
double default_regularization(const Eigen::MatrixXd& cov);

// ln det of a symmetric PSD matrix as the sum of log eigenvalues, each
// clamped below by eigen_floor. Never forms the determinant itself, so it
// cannot overflow for any practical dimension.
double log_det_psd(const Eigen::MatrixXd& cov, double eigen_floor = 1e-12);

// Trailing-window volatility: sample standard deviation of the log-returns
// inside each window of `window` consecutive values (window-1 returns).
// Output has size n - window + 1; entry t covers series[t .. t+window-1].
Eigen::VectorXd rolling_volatility(const Eigen::VectorXd& series, int window);

} // namespace distkit::stats
