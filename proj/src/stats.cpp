#include "distkit/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace distkit::stats {

void PanelData::validate(bool require_positive) const {
    if (values.rows() != static_cast<Eigen::Index>(tickers.size()))
        throw std::invalid_argument("panel row count does not match ticker count");
    if (values.cols() != static_cast<Eigen::Index>(dates.size()))
        throw std::invalid_argument("panel column count does not match date count");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i]))
            throw std::invalid_argument("dates not strictly increasing");
    if (!values.allFinite())
        throw std::invalid_argument("non-finite entry in panel");
    if (require_positive && (values.array() <= 0.0).any())
        throw std::invalid_argument("nonpositive value in panel");
}

GaussianModel estimate_gaussian(const Eigen::MatrixXd& samples, double regularization) {
    const Eigen::Index n = samples.cols();
    if (n < 2)
        throw std::invalid_argument("insufficient observations");
    if (regularization < 0.0)
        throw std::invalid_argument("regularization must be nonnegative");

    GaussianModel model;
    model.mean = samples.rowwise().mean();
    Eigen::MatrixXd centered = samples.colwise() - model.mean;
    model.cov = (centered * centered.transpose()) / static_cast<double>(n - 1);
    // exact symmetry for downstream eigen decompositions
    model.cov = 0.5 * (model.cov + model.cov.transpose()).eval();
    if (regularization > 0.0)
        model.cov.diagonal().array() += regularization;
    return model;
}

double default_regularization(const Eigen::MatrixXd& cov) {
    if (cov.rows() == 0)
        return 0.0;
    return 1e-8 * cov.trace() / static_cast<double>(cov.rows());
}

namespace {

void require_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("not symmetric");
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * (1.0 + scale))
        throw std::invalid_argument("not symmetric");
}

} // namespace

double log_det_psd(const Eigen::MatrixXd& cov, double eigen_floor) {
    if (eigen_floor <= 0.0)
        throw std::invalid_argument("eigen_floor must be positive");
    require_symmetric(cov);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen decomposition failed");

    double sum = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        sum += std::log(std::max(solver.eigenvalues()[i], eigen_floor));
    return sum;
}

Eigen::VectorXd rolling_volatility(const Eigen::VectorXd& series, int window) {
    const Eigen::Index n = series.size();
    if (window < 2)
        throw std::invalid_argument("window must cover at least one return");
    if (window > n)
        throw std::invalid_argument("window exceeds series length");
    if ((series.array() <= 0.0).any())
        throw std::invalid_argument("nonpositive value in series");

    Eigen::VectorXd returns(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        returns[i] = std::log(series[i + 1] / series[i]);

    const int r = window - 1; // returns per window
    Eigen::VectorXd out(n - window + 1);
    for (Eigen::Index t = 0; t < out.size(); ++t) {
        const auto w = returns.segment(t, r);
        const double mean = w.mean();
        const double ss = (w.array() - mean).square().sum();
        out[t] = r > 1 ? std::sqrt(ss / (r - 1)) : 0.0;
    }
    return out;
}

} // namespace distkit::stats
