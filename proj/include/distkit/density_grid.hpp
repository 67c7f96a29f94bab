#pragma once

#include <Eigen/Dense>

namespace distkit {

// A probability density tabulated on a uniform 1-D grid. Point i sits at
// lo + i*step; the trapezoidal integral of values is kept at 1.
struct DensityGrid {
    double lo = 0.0;
    double step = 0.0;
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
    double hi() const { return lo + step * static_cast<double>(size() - 1); }
    double point(Eigen::Index i) const { return lo + step * static_cast<double>(i); }

    // Trapezoidal integral of the tabulated values.
    double mass() const;
    double mean() const;
    double variance() const;

    bool same_grid(const DensityGrid& other) const;
};

} // namespace distkit
