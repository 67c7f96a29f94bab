#include "distkit/dimreduce.hpp"

#include <cmath>
#include <stdexcept>

#include "distkit/parallel.hpp"
#include "distkit/rng.hpp"

namespace distkit::dimreduce {

void ReductionConfig::validate() const {
    if (pca_sig_digits < 1 || pca_sig_digits > 12)
        throw std::invalid_argument("pca_sig_digits must be in [1, 12]");
    if (!(jl_epsilon > 0.0 && jl_epsilon < 1.0))
        throw std::invalid_argument("jl_epsilon must be in (0, 1)");
    if (jl_iterations < 1)
        throw std::invalid_argument("jl_iterations must be positive");
}

int jl_min_dimension(std::int64_t n, double epsilon) {
    if (n < 1)
        throw std::invalid_argument("need at least one point");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("epsilon must be in (0, 1)");
    const double denom = epsilon * epsilon / 2.0 - epsilon * epsilon * epsilon / 3.0;
    const double k = 4.0 * std::log(static_cast<double>(n)) / denom;
    return std::max(1, static_cast<int>(std::ceil(k)));
}

Eigen::MatrixXd jl_project(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
    if (k < 1)
        throw std::invalid_argument("target dimension must be positive");
    const Eigen::Index d = points.cols();
    if (d < 1)
        throw std::invalid_argument("points must have at least one dimension");

    Eigen::MatrixXd map(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            map(i, j) = rng::normal_at(seed, static_cast<std::uint64_t>(i) * d + j);
    return points * map.transpose() / std::sqrt(static_cast<double>(k));
}

namespace {

// Shared eigen step: descending eigenvalues with deterministic signs, plus
// explained-variance fractions.
struct Decomposition {
    Eigen::MatrixXd centered;
    Eigen::MatrixXd vectors; // m x m, columns ordered by descending eigenvalue
    Eigen::VectorXd values;  // descending, clamped at 0
    Eigen::VectorXd fractions;
};

Decomposition decompose(const Eigen::MatrixXd& data) {
    const Eigen::Index m = data.rows();
    const Eigen::Index n = data.cols();
    if (n < 2)
        throw std::invalid_argument("insufficient observations");

    Decomposition dec;
    Eigen::VectorXd row_mean = data.rowwise().mean();
    dec.centered = data.colwise() - row_mean;
    Eigen::MatrixXd cov = dec.centered * dec.centered.transpose() / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen decomposition failed");

    // Eigen returns ascending order; flip to descending. Equal eigenvalues
    // keep their relative (ascending-index) order reversed deterministically.
    dec.values.resize(m);
    dec.vectors.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        dec.values[i] = std::max(solver.eigenvalues()[m - 1 - i], 0.0);
        dec.vectors.col(i) = solver.eigenvectors().col(m - 1 - i);
    }

    // Sign convention: largest-magnitude entry of each eigenvector positive.
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index arg = 0;
        dec.vectors.col(i).cwiseAbs().maxCoeff(&arg);
        if (dec.vectors(arg, i) < 0.0)
            dec.vectors.col(i) = -dec.vectors.col(i);
    }

    const double total = dec.values.sum();
    dec.fractions = total > 0.0 ? (dec.values / total).eval()
                                : Eigen::VectorXd::Zero(m).eval();
    return dec;
}

PcaResult finish(const Decomposition& dec, int r) {
    PcaResult result;
    result.eigenvalues = dec.values;
    result.explained_fraction = dec.fractions;
    result.rank_retained = r;
    result.scores = dec.vectors.leftCols(r).transpose() * dec.centered;
    return result;
}

} // namespace

PcaResult pca_reduce(const Eigen::MatrixXd& data, int sig_digits) {
    if (sig_digits < 1 || sig_digits > 12)
        throw std::invalid_argument("pca_sig_digits must be in [1, 12]");
    Decomposition dec = decompose(data);

    const double threshold = 1.0 - std::pow(10.0, -sig_digits);
    const Eigen::Index m = dec.values.size();
    int r = 1;
    double cumulative = dec.fractions[0];
    while (r < m && cumulative < threshold - 1e-14) {
        cumulative += dec.fractions[r];
        ++r;
    }
    return finish(dec, r);
}

PcaResult pca_reduce_rank(const Eigen::MatrixXd& data, int r) {
    if (r < 1 || r > data.rows())
        throw std::invalid_argument("rank out of range");
    return finish(decompose(data), r);
}

MatchResult match_dimensions(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const ReductionConfig& config) {
    config.validate();
    if (a.cols() != b.cols())
        throw std::invalid_argument("observation count mismatch");

    MatchResult result;
    result.method = config.method;

    if (config.method == Method::pca) {
        PcaResult ra = pca_reduce(a, config.pca_sig_digits);
        const int target = ra.rank_retained;
        result.target_rows = target;
        if (b.rows() >= target) {
            result.a = std::move(ra.scores);
            result.b = pca_reduce_rank(b, target).scores;
        } else {
            // b cannot reach a's retained rank: project a's variable space
            // down to b's instead and keep b whole.
            result.jl_fallback = true;
            result.target_rows = static_cast<int>(b.rows());
            result.a = jl_project(ra.scores.transpose(), result.target_rows,
                                  rng::derive(config.jl_seed, 2))
                           .transpose();
            result.b = b;
        }
        return result;
    }

    // JL path: both variable spaces are projected to the Lemma bound for the
    // number of observation points, capped by the available variable counts.
    // Equal variable counts share one random map, which is what the Lemma
    // guarantees distances under; unequal counts have no common space and
    // fall back to per-panel maps.
    result.jl_bound = jl_min_dimension(a.cols(), config.jl_epsilon);
    const int k = std::min<std::int64_t>(result.jl_bound, std::min(a.rows(), b.rows()));
    result.target_rows = k;
    if (a.rows() == b.rows()) {
        const std::uint64_t shared = rng::derive(config.jl_seed, 0);
        result.a = jl_project(a.transpose(), k, shared).transpose();
        result.b = jl_project(b.transpose(), k, shared).transpose();
    } else {
        result.a = jl_project(a.transpose(), k, rng::derive(config.jl_seed, 0)).transpose();
        result.b = jl_project(b.transpose(), k, rng::derive(config.jl_seed, 1)).transpose();
    }
    return result;
}

ProjectionReport jl_distortion_audit(const Eigen::MatrixXd& original,
                                     const Eigen::MatrixXd& projected, double epsilon) {
    if (original.rows() != projected.rows())
        throw std::invalid_argument("point count mismatch");
    const Eigen::Index n = original.rows();

    ProjectionReport report;
    report.n_points = static_cast<int>(n);
    report.original_dim = static_cast<int>(original.cols());
    report.reduced_dim = static_cast<int>(projected.cols());

    const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
    if (total == 0) {
        report.pair_fraction_within_bound = 1.0;
        return report;
    }

    std::int64_t within = 0;
#pragma omp parallel for schedule(static) reduction(+ : within) \
    num_threads(parallel::worker_count())
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double orig = (original.row(i) - original.row(j)).squaredNorm();
            const double proj = (projected.row(i) - projected.row(j)).squaredNorm();
            if (orig == 0.0) {
                ++within; // coincident points cannot be distorted
                continue;
            }
            const double ratio = proj / orig;
            if (ratio >= 1.0 - epsilon && ratio <= 1.0 + epsilon)
                ++within;
        }
    }
    report.pair_fraction_within_bound = static_cast<double>(within) / static_cast<double>(total);
    return report;
}

} // namespace distkit::dimreduce
