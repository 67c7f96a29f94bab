#include "distkit/mixture.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "distkit/parallel.hpp"
#include "distkit/quadrature.hpp"

namespace distkit::mixture {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(kTwoPi));
}

} // namespace

void MixtureComponentSpec::validate() const {
    if (sigma_y < 0.0)
        throw std::invalid_argument("sigma_y must be nonnegative");
    if (k < 1)
        throw std::invalid_argument("k must be positive");
}

double nln_component_density(double u, const MixtureComponentSpec& spec, int quad_points) {
    spec.validate();
    if (spec.sigma_y == 0.0) {
        // Y degenerate: U = X e^{mu_y} ~ N(0, e^{2 mu_y} / k)
        const double sd = std::exp(spec.mu_y) / std::sqrt(static_cast<double>(spec.k));
        return normal_pdf(u, 0.0, sd);
    }

    // Substitution y = mu_y + sqrt(2) sigma_y t turns the integral into a
    // Gauss-Hermite sum; the remaining factor is sqrt(2k) / (2 pi).
    const quadrature::Rule& rule = quadrature::gauss_hermite(quad_points);
    const double half_ku2 = 0.5 * spec.k * u * u;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double y = spec.mu_y + M_SQRT2 * spec.sigma_y * rule.nodes[i];
        const double exponent = -y - half_ku2 * std::exp(-2.0 * y);
        sum += rule.weights[i] * std::exp(exponent);
    }
    return std::sqrt(2.0 * spec.k) / kTwoPi * sum;
}

double nnp_component_density(double u, const MixtureComponentSpec& spec, int quad_points,
                             double zero_offset, bool* approximated_at_zero) {
    spec.validate();
    if (approximated_at_zero)
        *approximated_at_zero = false;

    if (spec.sigma_y == 0.0) {
        // Y degenerate at mu_y: U = mu_y X ~ N(0, mu_y^2 / k)
        if (spec.mu_y == 0.0)
            throw std::invalid_argument("degenerate component with mu_y = sigma_y = 0");
        const double sd = std::abs(spec.mu_y) / std::sqrt(static_cast<double>(spec.k));
        return normal_pdf(u, 0.0, sd);
    }

    if (u == 0.0) {
        if (zero_offset <= 0.0)
            throw std::invalid_argument("zero_offset must be positive");
        if (approximated_at_zero)
            *approximated_at_zero = true;
        return nnp_component_density(zero_offset, spec, quad_points);
    }

    // Each half-line x = +-e^s; in log coordinates the 1/|x| kernel becomes
    // flat and the integrand is smooth:
    //   f(u) = C * int [ G(e^s - mu) + G(e^s + mu) ] exp(-(k u^2 / 2) e^{-2s}) ds
    // with G the unnormalized Gaussian kernel and C = sqrt(k) / (2 pi sigma).
    const double mu = spec.mu_y;
    const double sigma = spec.sigma_y;
    const double a = 0.5 * spec.k * u * u;

    // Support cutoffs: the left end is set by the exp(-a e^{-2s}) turn-on,
    // the right end by the Gaussian tails.
    const double s_hi = std::log(std::abs(mu) + 40.0 * sigma);
    const double s_lo = 0.5 * std::log(a / 1480.0);
    if (!(s_lo < s_hi))
        return 0.0;

    const double inv_two_var = 0.5 / (sigma * sigma);
    const auto integrand = [&](double s) {
        const double x = std::exp(s);
        const double dm = x - mu;
        const double dp = x + mu;
        const double gauss = std::exp(-dm * dm * inv_two_var) + std::exp(-dp * dp * inv_two_var);
        return gauss * std::exp(-a * std::exp(-2.0 * s));
    };

    // Composite Gauss-Legendre with bounded panel width; quad_points nodes
    // per panel.
    const double width = s_hi - s_lo;
    const int panels = static_cast<int>(std::ceil(width / 6.0));
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double pa = s_lo + width * p / panels;
        const double pb = s_lo + width * (p + 1) / panels;
        const quadrature::Rule rule = quadrature::gauss_legendre_on(quad_points, pa, pb);
        for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
            total += rule.weights[i] * integrand(rule.nodes[i]);
    }
    const double c = std::sqrt(static_cast<double>(spec.k)) / (kTwoPi * sigma);
    return c * total;
}

namespace {

DensityGrid tabulate_impl(const std::function<double(double)>& f, double lo, double hi, double step,
                          bool use_omp) {
    if (step <= 0.0)
        throw std::invalid_argument("step must be positive");
    if (!(lo < hi))
        throw std::invalid_argument("lo must be below hi");

    const Eigen::Index n = static_cast<Eigen::Index>(std::llround((hi - lo) / step)) + 1;
    if (n < 2)
        throw std::invalid_argument("grid too small");

    DensityGrid grid;
    grid.lo = lo;
    grid.step = step;
    grid.values.resize(n);

    if (use_omp) {
#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
        for (Eigen::Index i = 0; i < n; ++i)
            grid.values[i] = f(lo + step * static_cast<double>(i));
    } else {
        for (Eigen::Index i = 0; i < n; ++i)
            grid.values[i] = f(lo + step * static_cast<double>(i));
    }

    if (!grid.values.allFinite() || (grid.values.array() < 0.0).any())
        throw std::runtime_error("density evaluation produced invalid values");

    const double mass = grid.mass();
    if (mass < 0.99 || mass > 1.01)
        throw std::runtime_error("grid does not capture density mass");
    grid.values /= mass;
    return grid;
}

} // namespace

DensityGrid tabulate_density(const std::function<double(double)>& f, double lo, double hi,
                             double step) {
    return tabulate_impl(f, lo, hi, step, true);
}

DensityGrid tabulate_density_serial(const std::function<double(double)>& f, double lo, double hi,
                                    double step) {
    return tabulate_impl(f, lo, hi, step, false);
}

DensityGrid convolve(const DensityGrid& f, const DensityGrid& g) {
    if (f.size() < 2 || g.size() < 2)
        throw std::invalid_argument("grid too small");
    if (std::abs(f.step - g.step) > 1e-12 * f.step)
        throw std::invalid_argument("step mismatch");

    const Eigen::Index n_out = f.size() + g.size() - 1;
    Eigen::Index padded = 1;
    while (padded < n_out)
        padded <<= 1;

    std::vector<std::complex<double>> fa(padded), ga(padded);
    for (Eigen::Index i = 0; i < f.size(); ++i)
        fa[i] = f.values[i];
    for (Eigen::Index i = 0; i < g.size(); ++i)
        ga[i] = g.values[i];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> fs(padded), gs(padded);
    fft.fwd(fs, fa);
    fft.fwd(gs, ga);
    for (Eigen::Index i = 0; i < padded; ++i)
        fs[i] *= gs[i];
    fft.inv(fa, fs);

    DensityGrid out;
    out.lo = f.lo + g.lo;
    out.step = f.step;
    out.values.resize(n_out);
    for (Eigen::Index i = 0; i < n_out; ++i)
        out.values[i] = std::max(fa[i].real() * f.step, 0.0);

    const double mass = out.mass();
    if (mass <= 0.0)
        throw std::runtime_error("convolution lost all mass");
    out.values /= mass;
    return out;
}

GridSpec default_grid(const std::vector<MixtureComponentSpec>& components, Family family) {
    if (components.empty())
        throw std::invalid_argument("need at least one component");

    double max_sd = 0.0;
    for (const MixtureComponentSpec& c : components) {
        c.validate();
        const double k = static_cast<double>(c.k);
        const double second_moment = family == Family::nln
                                         ? std::exp(2.0 * c.mu_y + 2.0 * c.sigma_y * c.sigma_y) / k
                                         : (c.mu_y * c.mu_y + c.sigma_y * c.sigma_y) / k;
        max_sd = std::max(max_sd, std::sqrt(second_moment));
    }
    if (max_sd <= 0.0)
        throw std::invalid_argument("all components degenerate at zero");

    const double half_width = 8.0 * max_sd * std::sqrt(static_cast<double>(components.size()));
    GridSpec spec;
    spec.lo = -half_width;
    spec.hi = half_width;
    spec.step = 2.0 * half_width / static_cast<double>((1 << 14) - 1);
    return spec;
}

DensityGrid sum_density(const std::vector<MixtureComponentSpec>& components, Family family,
                        std::optional<GridSpec> grid, int quad_points) {
    if (components.empty())
        throw std::invalid_argument("need at least one component");
    const GridSpec spec = grid ? *grid : default_grid(components, family);

    const auto tabulate_component = [&](const MixtureComponentSpec& c) {
        if (family == Family::nln)
            return tabulate_density([&](double u) { return nln_component_density(u, c, quad_points); },
                                    spec.lo, spec.hi, spec.step);
        const double offset = 0.5 * spec.step;
        return tabulate_density(
            [&](double u) { return nnp_component_density(u, c, quad_points, offset); }, spec.lo,
            spec.hi, spec.step);
    };

    DensityGrid acc = tabulate_component(components[0]);
    for (std::size_t i = 1; i < components.size(); ++i)
        acc = convolve(acc, tabulate_component(components[i]));
    return acc;
}

} // namespace distkit::mixture
