#include "distkit/density_grid.hpp"

#include <cmath>

namespace distkit {

namespace {

// Trapezoid weights: interior 1, endpoints 1/2, times step.
double trapezoid(const DensityGrid& g, const Eigen::ArrayXd& integrand) {
    const Eigen::Index n = integrand.size();
    if (n == 0)
        return 0.0;
    if (n == 1)
        return 0.0;
    double s = integrand.segment(1, n - 2).sum();
    s += 0.5 * (integrand[0] + integrand[n - 1]);
    return s * g.step;
}

} // namespace

double DensityGrid::mass() const { return trapezoid(*this, values.array()); }

double DensityGrid::mean() const {
    Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(size(), lo, hi());
    return trapezoid(*this, values.array() * x);
}

double DensityGrid::variance() const {
    const double mu = mean();
    Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(size(), lo, hi());
    return trapezoid(*this, values.array() * (x - mu).square());
}

bool DensityGrid::same_grid(const DensityGrid& other) const {
    if (size() != other.size())
        return false;
    const double scale = std::max({1.0, std::abs(lo), std::abs(other.lo)});
    return std::abs(lo - other.lo) <= 1e-9 * scale && std::abs(step - other.step) <= 1e-12 * step;
}

} // namespace distkit
