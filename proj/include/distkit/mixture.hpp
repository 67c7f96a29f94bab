#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "distkit/density_grid.hpp"

namespace distkit::mixture {

// One summand U_i of the dimension-transformed variable: U = X * e^Y (nln)
// or U = X * Y (nnp) with X ~ N(0, 1/k) independent of Y ~ N(mu_y, sigma_y^2).
struct MixtureComponentSpec {
    double mu_y = 0.0;
    double sigma_y = 0.0;
    int k = 1;

    void validate() const;
};

enum class Family { nln, nnp };

// Density of the normal log-normal mixture component at u, by Gauss-Hermite
// quadrature in the log-normal exponent (quad_points nodes). sigma_y = 0
// degenerates to the closed-form normal N(0, e^{2 mu_y}/k).
double nln_component_density(double u, const MixtureComponentSpec& spec, int quad_points = 64);

// Density of the normal normal product component at u. The integral is split
// at the x = 0 singularity and evaluated in log coordinates where the
// integrand is smooth. The density may be unbounded at u = 0; evaluation at
// exactly 0 returns the value at +-zero_offset (they are equal by symmetry)
// and sets *approximated_at_zero when provided.
double nnp_component_density(double u, const MixtureComponentSpec& spec, int quad_points = 64,
                             double zero_offset = 1e-3, bool* approximated_at_zero = nullptr);

// Tabulates a pointwise density on a uniform grid and renormalizes. Errors
// if the raw trapezoidal mass falls outside [0.99, 1.01] (grid too narrow or
// too coarse). Grid points are evaluated in parallel.
DensityGrid tabulate_density(const std::function<double(double)>& f, double lo, double hi,
                             double step);

// Single-thread reference with identical arithmetic.
DensityGrid tabulate_density_serial(const std::function<double(double)>& f, double lo, double hi,
                                    double step);

// Density of the sum of two independent variables: discrete convolution
// scaled by the step, via FFT. Supports add; output is renormalized.
DensityGrid convolve(const DensityGrid& f, const DensityGrid& g);

struct GridSpec {
    double lo;
    double hi;
    double step;
};

// Per-component grid for sum_density: [-L, L] with L = 8 * (largest
// component standard deviation) * sqrt(k), at least 2^14 points.
GridSpec default_grid(const std::vector<MixtureComponentSpec>& components, Family family);

// Density of U_1 + ... + U_n: tabulate each component, then fold pairwise
// convolutions left to right.
DensityGrid sum_density(const std::vector<MixtureComponentSpec>& components, Family family,
                        std::optional<GridSpec> grid = std::nullopt, int quad_points = 64);

} // namespace distkit::mixture
