#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "distkit/rng.hpp"

namespace testhelp {

inline double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Independent Simpson-rule integral of sqrt(p*q) for two normal densities.
// Used as the quadrature oracle against the closed-form distances.
inline double bc_coefficient_normal_quadrature(double mu_p, double var_p, double mu_q,
                                               double var_q, double lo = -30.0, double hi = 30.0,
                                               std::int64_t intervals = 60000) {
    if (intervals % 2)
        ++intervals;
    const double h = (hi - lo) / static_cast<double>(intervals);
    const double sp = std::sqrt(var_p);
    const double sq = std::sqrt(var_q);
    const auto f = [&](double x) {
        return std::sqrt(normal_pdf(x, mu_p, sp) * normal_pdf(x, mu_q, sq));
    };
    double sum = f(lo) + f(hi);
    for (std::int64_t i = 1; i < intervals; ++i)
        sum += f(lo + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Monte Carlo kernel-density oracle for the mixture component densities:
// n_samples draws of U (with the antithetic mirror -U), Gaussian kernel of
// bandwidth h, evaluated at each probe point. `lognormal` selects U = X e^Y
// versus U = X Y, with X ~ N(0, 1/k) and Y ~ N(mu_y, sigma_y^2).
inline std::vector<double> mc_kde_component_density(const std::vector<double>& probes, double mu_y,
                                                    double sigma_y, int k, bool lognormal,
                                                    std::int64_t n_samples, double bandwidth,
                                                    std::uint64_t seed) {
    const double sx = 1.0 / std::sqrt(static_cast<double>(k));
    std::vector<double> acc(probes.size(), 0.0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double x = sx * distkit::rng::normal_at(seed, 2 * static_cast<std::uint64_t>(i));
        const double y =
            mu_y + sigma_y * distkit::rng::normal_at(seed, 2 * static_cast<std::uint64_t>(i) + 1);
        const double u = lognormal ? x * std::exp(y) : x * y;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const double z1 = (probes[p] - u) / bandwidth;
            const double z2 = (probes[p] + u) / bandwidth; // antithetic mirror
            acc[p] += 0.5 * (std::exp(-0.5 * z1 * z1) + std::exp(-0.5 * z2 * z2));
        }
    }
    const double norm = 1.0 / (static_cast<double>(n_samples) * bandwidth * std::sqrt(2.0 * M_PI));
    for (double& v : acc)
        v *= norm;
    return acc;
}

} // namespace testhelp
