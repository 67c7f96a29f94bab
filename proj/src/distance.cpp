#include "distkit/distance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "distkit/parallel.hpp"
#include "distkit/rng.hpp"

namespace distkit::distance {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("not symmetric");
    if (m.size() == 0)
        return;
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > stats::kSymmetryTol * (1.0 + scale))
        throw std::invalid_argument("not symmetric");
}

// Symmetric square root via eigen decomposition; tolerates PSD inputs with
// eigenvalues clamped at zero. Used to map N(0,I) draws to N(0,cov).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen decomposition failed");
    Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

bool is_diagonal(const Eigen::MatrixXd& m) {
    const double scale = m.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > 1e-14 * (1.0 + scale))
                return false;
    return true;
}

} // namespace

DiscreteDistribution DiscreteDistribution::make(Eigen::VectorXd probs) {
    if ((probs.array() < 0.0).any())
        throw std::invalid_argument("negative probability");
    if (std::abs(probs.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities do not sum to 1");
    return DiscreteDistribution{std::move(probs)};
}

void TruncatedGaussian::validate() const {
    const Eigen::Index m = mean.size();
    if (cov.rows() != m || cov.cols() != m || lower.size() != m || upper.size() != m)
        throw std::invalid_argument("dimension mismatch");
    require_symmetric(cov);
    for (Eigen::Index i = 0; i < m; ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("invalid truncation interval");
}

TruncatedGaussian TruncatedGaussian::univariate(double mean, double variance, double lower,
                                                double upper) {
    TruncatedGaussian t;
    t.mean = Eigen::VectorXd::Constant(1, mean);
    t.cov = Eigen::MatrixXd::Constant(1, 1, variance);
    t.lower = Eigen::VectorXd::Constant(1, lower);
    t.upper = Eigen::VectorXd::Constant(1, upper);
    t.validate();
    return t;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_cdf_diff(double a, double b) {
    if (a >= b)
        return 0.0;
    // Evaluate on the side where erfc is small to avoid cancellation.
    if (a + b > 0.0)
        return 0.5 * (std::erfc(a * M_SQRT1_2) - std::erfc(b * M_SQRT1_2));
    return 0.5 * (std::erfc(-b * M_SQRT1_2) - std::erfc(-a * M_SQRT1_2));
}

double bc_coefficient_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.probs.size() != q.probs.size())
        throw std::invalid_argument("dimension mismatch");
    const double rho = (p.probs.array() * q.probs.array()).sqrt().sum();
    return std::clamp(rho, 0.0, 1.0);
}

double distance_from_coefficient(double rho) {
    if (rho < -1e-12 || rho > 1.0 + 1e-12)
        throw std::invalid_argument("coefficient out of range");
    rho = std::clamp(rho, 0.0, 1.0);
    if (rho == 0.0)
        return kInf;
    return -std::log(rho);
}

double bc_distance_normal_1d(double mean_p, double var_p, double mean_q, double var_q) {
    if (var_p <= 0.0 || var_q <= 0.0)
        throw std::invalid_argument("nonpositive variance");
    const double ratio = var_p / var_q + var_q / var_p + 2.0;
    const double dmu = mean_p - mean_q;
    return 0.25 * std::log(0.25 * ratio) + 0.25 * dmu * dmu / (var_p + var_q);
}

double bc_distance_mvn(const stats::GaussianModel& p, const stats::GaussianModel& q,
                       double eigen_floor) {
    if (p.dim() != q.dim())
        throw std::invalid_argument("dimension mismatch");

    const Eigen::MatrixXd avg = 0.5 * (p.cov + q.cov);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(avg, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen decomposition failed");
    const double lmax = solver.eigenvalues().maxCoeff();
    const double lmin = solver.eigenvalues().minCoeff();
    if (lmax <= 0.0 || lmin <= 1e-13 * lmax)
        throw std::runtime_error("singular average covariance");

    const Eigen::VectorXd d = p.mean - q.mean;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(avg);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("singular average covariance");
    const double quad = 0.125 * d.dot(ldlt.solve(d));

    const double log_det_term = stats::log_det_psd(avg, eigen_floor) -
                                0.5 * stats::log_det_psd(p.cov, eigen_floor) -
                                0.5 * stats::log_det_psd(q.cov, eigen_floor);
    return quad + 0.5 * log_det_term;
}

double bc_coefficient_grid(const DensityGrid& f, const DensityGrid& g) {
    if (!f.same_grid(g))
        throw std::invalid_argument("grid mismatch");
    const Eigen::Index n = f.size();
    if (n < 2)
        throw std::invalid_argument("grid too small");

    Eigen::ArrayXd integrand = (f.values.array() * g.values.array()).sqrt();
    double s = integrand.segment(1, n - 2).sum() + 0.5 * (integrand[0] + integrand[n - 1]);
    return std::clamp(s * f.step, 0.0, 1.0);
}

double bc_coefficient_multi(const std::vector<DensityGrid>& populations) {
    const std::size_t m = populations.size();
    if (m < 2)
        throw std::invalid_argument("at least two populations required");
    for (std::size_t i = 1; i < m; ++i)
        if (!populations[0].same_grid(populations[i]))
            throw std::invalid_argument("grid mismatch");

    const Eigen::Index n = populations[0].size();
    if (n < 2)
        throw std::invalid_argument("grid too small");

    // Geometric mean of the tabulated densities; any zero kills the point.
    Eigen::ArrayXd integrand(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double log_sum = 0.0;
        bool zero = false;
        for (const DensityGrid& g : populations) {
            const double v = g.values[j];
            if (v <= 0.0) {
                zero = true;
                break;
            }
            log_sum += std::log(v);
        }
        integrand[j] = zero ? 0.0 : std::exp(log_sum / static_cast<double>(m));
    }
    double s = integrand.segment(1, n - 2).sum() + 0.5 * (integrand[0] + integrand[n - 1]);
    return std::clamp(s * populations[0].step, 0.0, 1.0);
}

double bc_distance_truncated_normal_1d(const TruncatedGaussian& p, const TruncatedGaussian& q,
                                       OverlapConvention convention) {
    p.validate();
    q.validate();
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument("dimension mismatch");

    const double var_p = p.cov(0, 0);
    const double var_q = q.cov(0, 0);
    if (var_p <= 0.0 || var_q <= 0.0)
        throw std::invalid_argument("nonpositive variance");

    const double a = p.lower[0], b = p.upper[0];
    const double c = q.lower[0], d = q.upper[0];
    const double l = convention == OverlapConvention::intersection ? std::max(a, c) : std::min(a, c);
    const double u = std::min(b, d);
    if (!(l < u))
        return kInf;

    const double sp = std::sqrt(var_p);
    const double sq = std::sqrt(var_q);
    const double mass_p = normal_cdf_diff((a - p.mean[0]) / sp, (b - p.mean[0]) / sp);
    const double mass_q = normal_cdf_diff((c - q.mean[0]) / sq, (d - q.mean[0]) / sq);
    if (mass_p <= 0.0 || mass_q <= 0.0)
        throw std::runtime_error("truncation mass underflow");

    const double nu = (p.mean[0] * var_q + q.mean[0] * var_p) / (var_p + var_q);
    const double zeta = std::sqrt(2.0 * var_p * var_q / (var_p + var_q));
    const double cross = normal_cdf_diff((l - nu) / zeta, (u - nu) / zeta);
    if (cross <= 0.0)
        return kInf; // coefficient underflows to zero

    const double untruncated = bc_distance_normal_1d(p.mean[0], var_p, q.mean[0], var_q);
    return untruncated + 0.5 * std::log(mass_p) + 0.5 * std::log(mass_q) - std::log(cross);
}

namespace {

// Deterministic antithetic Monte Carlo over the box: pairs (mean + Lz,
// mean - Lz) with z regenerated from (seed, pair index). Partial sums per
// fixed-size block, combined in block order.
McResult box_probability_mc_impl(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                 const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 std::int64_t n_samples, std::uint64_t seed, bool use_omp) {
    const Eigen::Index m = mean.size();
    if (cov.rows() != m || lo.size() != m || hi.size() != m)
        throw std::invalid_argument("dimension mismatch");
    if (n_samples < 2)
        throw std::invalid_argument("need at least two samples");

    const Eigen::MatrixXd root = psd_sqrt(cov);
    const std::int64_t pairs = n_samples / 2;
    const std::int64_t nblocks = (pairs + parallel::kReductionBlock - 1) / parallel::kReductionBlock;

    std::vector<double> block_sum(nblocks, 0.0);
    std::vector<double> block_sumsq(nblocks, 0.0);

    const auto run_block = [&](std::int64_t blk) {
        const std::int64_t begin = blk * parallel::kReductionBlock;
        const std::int64_t end = std::min(begin + parallel::kReductionBlock, pairs);
        Eigen::VectorXd z(m), x(m);
        double s = 0.0, ss = 0.0;
        for (std::int64_t j = begin; j < end; ++j) {
            for (Eigen::Index i = 0; i < m; ++i)
                z[i] = rng::normal_at(seed, static_cast<std::uint64_t>(j) * m + i);
            x = mean + root * z;
            double h = 0.0;
            if (((x.array() >= lo.array()) && (x.array() <= hi.array())).all())
                h += 0.5;
            x = mean - root * z;
            if (((x.array() >= lo.array()) && (x.array() <= hi.array())).all())
                h += 0.5;
            s += h;
            ss += h * h;
        }
        block_sum[blk] = s;
        block_sumsq[blk] = ss;
    };

    if (use_omp) {
#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
        for (std::int64_t blk = 0; blk < nblocks; ++blk)
            run_block(blk);
    } else {
        for (std::int64_t blk = 0; blk < nblocks; ++blk)
            run_block(blk);
    }

    double total = 0.0, total_sq = 0.0;
    for (std::int64_t blk = 0; blk < nblocks; ++blk) {
        total += block_sum[blk];
        total_sq += block_sumsq[blk];
    }

    McResult result;
    result.value = total / static_cast<double>(pairs);
    if (pairs > 1) {
        const double var =
            std::max(0.0, (total_sq - pairs * result.value * result.value) / (pairs - 1.0));
        result.std_error = std::sqrt(var / static_cast<double>(pairs));
    }
    return result;
}

} // namespace

McResult gaussian_box_probability_mc(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     std::int64_t n_samples, std::uint64_t seed) {
    return box_probability_mc_impl(mean, cov, lo, hi, n_samples, seed, true);
}

McResult gaussian_box_probability_mc_serial(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                            std::int64_t n_samples, std::uint64_t seed) {
    return box_probability_mc_impl(mean, cov, lo, hi, n_samples, seed, false);
}

double gaussian_box_probability_diagonal(const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    double p = 1.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double s = std::sqrt(var[i]);
        p *= normal_cdf_diff((lo[i] - mean[i]) / s, (hi[i] - mean[i]) / s);
    }
    return p;
}

McResult bc_distance_truncated_mvn(const TruncatedGaussian& p, const TruncatedGaussian& q,
                                   std::int64_t mc_samples, std::uint64_t seed,
                                   OverlapConvention convention) {
    p.validate();
    q.validate();
    const Eigen::Index m = p.dim();
    if (q.dim() != m)
        throw std::invalid_argument("dimension mismatch");
    if (mc_samples < 2)
        throw std::invalid_argument("need at least two samples");

    Eigen::VectorXd l(m), u(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        l[i] = convention == OverlapConvention::intersection ? std::max(p.lower[i], q.lower[i])
                                                             : std::min(p.lower[i], q.lower[i]);
        u[i] = std::min(p.upper[i], q.upper[i]);
        if (!(l[i] < u[i]))
            return {kInf, 0.0};
    }

    const double untruncated =
        bc_distance_mvn(stats::GaussianModel{p.mean, p.cov}, stats::GaussianModel{q.mean, q.cov});

    // Cross-density parameters: covariance 2*(Sp^-1 + Sq^-1)^-1 = Sp*avg^-1*Sq
    // and mean (Sp^-1 + Sq^-1)^-1 (Sp^-1 mu_p + Sq^-1 mu_q), all via solves.
    const Eigen::MatrixXd avg = 0.5 * (p.cov + q.cov);
    const Eigen::LDLT<Eigen::MatrixXd> avg_ldlt(avg);
    const Eigen::LDLT<Eigen::MatrixXd> p_ldlt(p.cov);
    const Eigen::LDLT<Eigen::MatrixXd> q_ldlt(q.cov);
    if (avg_ldlt.info() != Eigen::Success || p_ldlt.info() != Eigen::Success ||
        q_ldlt.info() != Eigen::Success)
        throw std::runtime_error("singular average covariance");

    Eigen::MatrixXd cross_cov = p.cov * avg_ldlt.solve(q.cov);
    cross_cov = 0.5 * (cross_cov + cross_cov.transpose()).eval();
    const Eigen::VectorXd w = p_ldlt.solve(p.mean) + q_ldlt.solve(q.mean);
    const Eigen::VectorXd cross_mean = 0.5 * cross_cov * w;

    McResult result;
    if (is_diagonal(p.cov) && is_diagonal(q.cov)) {
        const double mass_p = gaussian_box_probability_diagonal(p.mean, p.cov.diagonal(), p.lower,
                                                                p.upper);
        const double mass_q = gaussian_box_probability_diagonal(q.mean, q.cov.diagonal(), q.lower,
                                                                q.upper);
        if (mass_p <= 0.0 || mass_q <= 0.0)
            throw std::runtime_error("truncation mass underflow");
        const double cross = gaussian_box_probability_diagonal(cross_mean, cross_cov.diagonal(), l, u);
        if (cross <= 0.0)
            return {kInf, 0.0};
        result.value = untruncated + 0.5 * std::log(mass_p) + 0.5 * std::log(mass_q) -
                       std::log(cross);
        result.std_error = 0.0;
        return result;
    }

    const McResult mass_p =
        gaussian_box_probability_mc(p.mean, p.cov, p.lower, p.upper, mc_samples, rng::derive(seed, 1));
    const McResult mass_q =
        gaussian_box_probability_mc(q.mean, q.cov, q.lower, q.upper, mc_samples, rng::derive(seed, 2));
    const McResult cross =
        gaussian_box_probability_mc(cross_mean, cross_cov, l, u, mc_samples, rng::derive(seed, 3));
    if (mass_p.value <= 0.0 || mass_q.value <= 0.0 || cross.value <= 0.0)
        throw std::runtime_error("integration failure");

    result.value = untruncated + 0.5 * std::log(mass_p.value) + 0.5 * std::log(mass_q.value) -
                   std::log(cross.value);
    // Delta method on the three log terms.
    const double rp = mass_p.std_error / mass_p.value;
    const double rq = mass_q.std_error / mass_q.value;
    const double rc = cross.std_error / cross.value;
    result.std_error = std::sqrt(0.25 * rp * rp + 0.25 * rq * rq + rc * rc);
    return result;
}

} // namespace distkit::distance
