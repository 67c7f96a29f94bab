#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace distkit::dimreduce {

enum class Method { pca, jl };

struct ReductionConfig {
    Method method = Method::pca;
    int pca_sig_digits = 2;   // retain until explained variance >= 1 - 10^-d
    double jl_epsilon = 0.3;  // distortion bound, in (0,1)
    std::uint64_t jl_seed = 0;
    int jl_iterations = 1;

    void validate() const;
};

// Distortion audit of a projection: fraction of point pairs whose squared
// distance stayed within the (1 +- epsilon) band.
struct ProjectionReport {
    int n_points = 0;
    int original_dim = 0;
    int reduced_dim = 0;
    double pair_fraction_within_bound = 0.0;
};

struct PcaResult {
    Eigen::MatrixXd scores;             // r x n component scores
    Eigen::VectorXd eigenvalues;        // all m, descending, clamped at 0
    Eigen::VectorXd explained_fraction; // per-component share of total variance
    int rank_retained = 0;
};

// Dimension-matched pair of matrices ready for distance estimation, plus
// bookkeeping about how the match was achieved.
struct MatchResult {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Method method = Method::pca;
    bool jl_fallback = false; // PCA path had to project a's rows instead
    int jl_bound = 0;         // Lemma bound before capping (JL path only)
    int target_rows = 0;
};

// Smallest k satisfying k >= 4 (eps^2/2 - eps^3/3)^-1 ln n, floored at 1.
int jl_min_dimension(std::int64_t n, double epsilon);

// Gaussian random projection of row-points into k dimensions: points * A^T /
// sqrt(k) with A (k x d) i.i.d. standard normal from a counter-based stream,
// so the map is a pure function of (shape, seed).
Eigen::MatrixXd jl_project(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

// PCA on the row-variable covariance. Scores are projections of the centered
// data onto the top-r eigenvectors; each eigenvector is sign-fixed so its
// largest-magnitude entry is positive.
PcaResult pca_reduce(const Eigen::MatrixXd& data, int sig_digits);

// Same decomposition, but retaining exactly r components.
PcaResult pca_reduce_rank(const Eigen::MatrixXd& data, int r);

// The order-dependent dimension match of the empirical procedure: reduce a
// first, then force b onto the same number of rows. See MatchResult.
MatchResult match_dimensions(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const ReductionConfig& config);

ProjectionReport jl_distortion_audit(const Eigen::MatrixXd& original,
                                     const Eigen::MatrixXd& projected, double epsilon);

} // namespace distkit::dimreduce
