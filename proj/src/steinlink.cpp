#include "distkit/steinlink.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "distkit/parallel.hpp"
#include "distkit/rng.hpp"

namespace distkit::steinlink {

namespace {

double density_ratio_sqrt(double t, const BivariateSampleModel& model) {
    const double fx = model.marginal_x(t);
    const double fy = model.marginal_y(t);
    if (fx <= 0.0) {
        if (fy > 0.0)
            throw std::runtime_error("ratio undefined");
        return 0.0;
    }
    return std::sqrt(fy / fx);
}

} // namespace

double c_function(double t, const BivariateSampleModel& model) {
    return t - density_ratio_sqrt(t, model);
}

double coefficient_from_marginals(const BivariateSampleModel& model, double step) {
    if (step <= 0.0)
        throw std::invalid_argument("step must be positive");
    const double lo = model.support_lo;
    const double hi = model.support_hi;
    const auto n = static_cast<std::int64_t>(std::llround((hi - lo) / step)) + 1;
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double t = lo + step * static_cast<double>(i);
        const double v = std::sqrt(std::max(model.marginal_x(t), 0.0) *
                                   std::max(model.marginal_y(t), 0.0));
        sum += (i == 0 || i == n - 1) ? 0.5 * v : v;
    }
    return std::min(sum * step, 1.0);
}

ResidualReport verify_covariance_identity(const BivariateSampleModel& model,
                                          std::int64_t mc_samples, std::uint64_t seed) {
    if (mc_samples < 10000)
        throw std::invalid_argument("need at least 1e4 samples");

    const std::int64_t nblocks =
        (mc_samples + parallel::kReductionBlock - 1) / parallel::kReductionBlock;

    // Per-block partial sums of (x, y, r, xy, ry, r^2, y^2); combined in
    // block order so the result is independent of the thread count.
    struct Sums {
        double x = 0, y = 0, r = 0, xy = 0, ry = 0, rr = 0, yy = 0;
    };
    std::vector<Sums> partial(nblocks);
    std::atomic<bool> ratio_error{false};

#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
    for (std::int64_t blk = 0; blk < nblocks; ++blk) {
        const std::int64_t begin = blk * parallel::kReductionBlock;
        const std::int64_t end = std::min(begin + parallel::kReductionBlock, mc_samples);
        Sums s;
        for (std::int64_t i = begin; i < end; ++i) {
            const auto [x, y] = model.sample(seed, static_cast<std::uint64_t>(i));
            double r;
            try {
                r = density_ratio_sqrt(x, model);
            } catch (const std::runtime_error&) {
                ratio_error.store(true);
                break;
            }
            s.x += x;
            s.y += y;
            s.r += r;
            s.xy += x * y;
            s.ry += r * y;
            s.rr += r * r;
            s.yy += y * y;
        }
        partial[blk] = s;
    }
    if (ratio_error.load())
        throw std::runtime_error("ratio undefined");

    Sums t;
    for (const Sums& s : partial) {
        t.x += s.x;
        t.y += s.y;
        t.r += s.r;
        t.xy += s.xy;
        t.ry += s.ry;
        t.rr += s.rr;
        t.yy += s.yy;
    }

    const double n = static_cast<double>(mc_samples);
    const double mean_x = t.x / n;
    const double mean_y = t.y / n;
    const double mean_r = t.r / n;
    const double mean_xy = t.xy / n;
    const double mean_ry = t.ry / n;

    ResidualReport report;
    report.samples = mc_samples;
    report.rho = coefficient_from_marginals(model);
    report.cov_x_y = mean_xy - mean_x * mean_y;
    // c(X) = X - r(X), so Cov[c(X),Y] decomposes exactly with divisor n.
    report.cov_c_y = report.cov_x_y - (mean_ry - mean_r * mean_y);
    report.mean_ratio_y = mean_ry;
    report.residual =
        report.cov_c_y - (report.cov_x_y - report.mean_ratio_y + model.mean_y * report.rho);

    // The combination collapses to mean_r * mean_y - mu_Y rho; delta-method
    // standard error from the sample (co)variances of r and y.
    const double s_rr = std::max(0.0, (t.rr - n * mean_r * mean_r) / (n - 1.0));
    const double s_yy = std::max(0.0, (t.yy - n * mean_y * mean_y) / (n - 1.0));
    const double s_ry = (t.ry - n * mean_r * mean_y) / (n - 1.0);
    const double var = (mean_y * mean_y * s_rr + mean_r * mean_r * s_yy +
                        2.0 * mean_r * mean_y * s_ry) /
                       n;
    report.std_error = std::sqrt(std::max(var, 0.0));
    return report;
}

BivariateSampleModel make_bivariate_normal_model(double mu_x, double mu_y, double corr) {
    if (!(corr > -1.0 && corr < 1.0))
        throw std::invalid_argument("correlation must be in (-1, 1)");

    BivariateSampleModel model;
    model.sample = [mu_x, mu_y, corr](std::uint64_t seed, std::uint64_t index) {
        const double z1 = rng::normal_at(seed, 2 * index);
        const double z2 = rng::normal_at(seed, 2 * index + 1);
        return std::pair<double, double>{mu_x + z1,
                                         mu_y + corr * z1 + std::sqrt(1.0 - corr * corr) * z2};
    };
    const auto pdf = [](double mu) {
        return [mu](double t) {
            const double z = t - mu;
            return std::exp(-0.5 * z * z) / std::sqrt(6.283185307179586476925287);
        };
    };
    model.marginal_x = pdf(mu_x);
    model.marginal_y = pdf(mu_y);
    model.mean_y = mu_y;
    model.support_lo = std::min(mu_x, mu_y) - 12.0;
    model.support_hi = std::max(mu_x, mu_y) + 12.0;
    return model;
}

} // namespace distkit::steinlink
