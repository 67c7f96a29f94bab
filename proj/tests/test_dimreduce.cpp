#include <doctest.h>

#include <cmath>

#include "distkit/dimreduce.hpp"
#include "distkit/distance.hpp"
#include "distkit/rng.hpp"
#include "distkit/stats.hpp"

using namespace distkit;
using namespace distkit::dimreduce;

TEST_CASE("jl_min_dimension") {
    CHECK(jl_min_dimension(1, 0.5) == 1);
    CHECK(jl_min_dimension(100, 0.5) == 222);
    CHECK(jl_min_dimension(50, 0.3) == 435);
    CHECK_THROWS_AS(jl_min_dimension(10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(jl_min_dimension(10, 1.0), std::invalid_argument);

    SUBCASE("monotone in n and epsilon") {
        int prev = 0;
        for (std::int64_t n : {2, 5, 20, 100, 1000}) {
            const int k = jl_min_dimension(n, 0.4);
            CHECK(k >= prev);
            prev = k;
        }
        prev = 1 << 30;
        for (double eps : {0.1, 0.2, 0.4, 0.6, 0.9}) {
            const int k = jl_min_dimension(64, eps);
            CHECK(k <= prev);
            prev = k;
        }
    }
}

TEST_CASE("jl_project") {
    SUBCASE("zero input maps to zero") {
        const Eigen::MatrixXd out = jl_project(Eigen::MatrixXd::Zero(4, 10), 3, 9);
        CHECK(out.rows() == 4);
        CHECK(out.cols() == 3);
        CHECK(out.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("linear for a fixed seed") {
        rng::CounterRng gen(3);
        Eigen::MatrixXd x(1, 6), y(1, 6);
        for (int i = 0; i < 6; ++i) {
            x(0, i) = gen.next_normal();
            y(0, i) = gen.next_normal();
        }
        const Eigen::MatrixXd combo = jl_project(2.5 * x - 0.75 * y, 4, 17);
        const Eigen::MatrixXd parts =
            2.5 * jl_project(x, 4, 17) - 0.75 * jl_project(y, 4, 17);
        CHECK((combo - parts).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("deterministic given the seed") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 7);
        const Eigen::MatrixXd a = jl_project(x, 3, 21);
        const Eigen::MatrixXd b = jl_project(x, 3, 21);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a - jl_project(x, 3, 22)).cwiseAbs().maxCoeff() > 0.0);
    }

    SUBCASE("projected squared norm is unbiased") {
        Eigen::MatrixXd x(1, 20);
        rng::CounterRng gen(123);
        for (int i = 0; i < 20; ++i)
            x(0, i) = gen.next_normal();
        const double target = x.squaredNorm();
        double acc = 0.0;
        for (int seed = 0; seed < 1000; ++seed)
            acc += jl_project(x, 8, seed).squaredNorm();
        acc /= 1000.0;
        CHECK(std::abs(acc - target) / target < 0.05);
    }
}

namespace {

// 2 x 4 data whose sample covariance is exactly diag(a, b): orthonormal
// zero-sum observation patterns scaled by sqrt(3 a), sqrt(3 b).
Eigen::MatrixXd two_var_data(double a, double b) {
    Eigen::RowVector4d w1(0.5, -0.5, 0.5, -0.5);
    Eigen::RowVector4d w2(0.5, 0.5, -0.5, -0.5);
    Eigen::MatrixXd x(2, 4);
    x.row(0) = std::sqrt(3.0 * a) * w1;
    x.row(1) = std::sqrt(3.0 * b) * w2;
    return x;
}

} // namespace

TEST_CASE("pca_reduce") {
    SUBCASE("rank-1 data keeps one component at any precision") {
        Eigen::MatrixXd x(3, 5);
        Eigen::VectorXd direction(3);
        direction << 1.0, -2.0, 0.5;
        Eigen::RowVectorXd pattern(5);
        pattern << 1.0, 2.0, -1.0, 0.5, -2.5;
        x = direction * pattern;
        for (int digits : {1, 4, 8, 12})
            CHECK(pca_reduce(x, digits).rank_retained == 1);
    }

    SUBCASE("eigenvalues 0.99/0.01 split on the threshold") {
        const Eigen::MatrixXd x = two_var_data(0.99, 0.01);
        CHECK(pca_reduce(x, 1).rank_retained == 1); // 0.99 >= 0.9
        CHECK(pca_reduce(x, 3).rank_retained == 2); // 0.99 < 0.999
    }

    SUBCASE("equal variances keep every component") {
        Eigen::MatrixXd x(3, 4);
        x.row(0) << 0.5, -0.5, 0.5, -0.5;
        x.row(1) << 0.5, 0.5, -0.5, -0.5;
        x.row(2) << 0.5, -0.5, -0.5, 0.5;
        CHECK(pca_reduce(x, 1).rank_retained == 3); // fractions 1/3, 2/3, 1
    }

    SUBCASE("explained fractions are nonincreasing and sum to one") {
        rng::CounterRng gen(31);
        Eigen::MatrixXd x(6, 40);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = gen.next_normal();
        const auto result = pca_reduce(x, 6);
        CHECK(std::abs(result.explained_fraction.sum() - 1.0) < 1e-10);
        for (int i = 1; i < result.explained_fraction.size(); ++i)
            CHECK(result.explained_fraction[i] <= result.explained_fraction[i - 1] + 1e-12);
    }

    SUBCASE("full precision preserves pairwise observation distances") {
        rng::CounterRng gen(77);
        Eigen::MatrixXd x(8, 50);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = gen.next_normal();
        const auto result = pca_reduce(x, 12);
        for (int a = 0; a < 10; ++a) {
            for (int b = a + 1; b < 10; ++b) {
                const double orig = (x.col(a) - x.col(b)).norm();
                const double red = (result.scores.col(a) - result.scores.col(b)).norm();
                CHECK(std::abs(orig - red) / orig < 1e-6);
            }
        }
    }

    SUBCASE("bit-identical across repeated calls") {
        rng::CounterRng gen(55);
        Eigen::MatrixXd x(5, 30);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = gen.next_normal();
        const auto a = pca_reduce(x, 4);
        const auto b = pca_reduce(x, 4);
        CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("single observation is rejected") {
        CHECK_THROWS_AS(pca_reduce(Eigen::MatrixXd::Ones(3, 1), 2), std::invalid_argument);
    }
}

namespace {

Eigen::MatrixXd random_panel(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = scale * rng::normal_at(seed, static_cast<std::uint64_t>(i));
    return x;
}

double reduced_distance(const MatchResult& match) {
    auto model = [](const Eigen::MatrixXd& m) {
        auto g = stats::estimate_gaussian(m);
        g.cov.diagonal().array() += stats::default_regularization(g.cov);
        return g;
    };
    return distance::bc_distance_mvn(model(match.a), model(match.b));
}

} // namespace

TEST_CASE("match_dimensions") {
    ReductionConfig config;
    config.pca_sig_digits = 2;

    SUBCASE("identical panels reduce identically") {
        const Eigen::MatrixXd x = random_panel(6, 30, 1);
        const auto match = match_dimensions(x, x, config);
        CHECK(match.a.rows() == match.b.rows());
        CHECK((match.a - match.b).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(reduced_distance(match) < 1e-8);
    }

    SUBCASE("second panel is forced onto the first panel's rank") {
        const Eigen::MatrixXd a = random_panel(10, 40, 2);
        const Eigen::MatrixXd b = random_panel(20, 40, 3);
        const auto match = match_dimensions(a, b, config);
        CHECK(match.a.rows() == match.b.rows());
        CHECK(match.a.cols() == 40);
        CHECK_FALSE(match.jl_fallback);
    }

    SUBCASE("JL fallback when b has too few variables") {
        ReductionConfig fine = config;
        fine.pca_sig_digits = 12; // force a high retained rank for a
        const Eigen::MatrixXd a = random_panel(12, 40, 4);
        const Eigen::MatrixXd b = random_panel(3, 40, 5);
        const auto match = match_dimensions(a, b, fine);
        CHECK(match.jl_fallback);
        CHECK(match.a.rows() == 3);
        CHECK(match.b.rows() == 3);
    }

    SUBCASE("order dependence on generic inputs") {
        const Eigen::MatrixXd a = random_panel(8, 40, 6);
        const Eigen::MatrixXd b = random_panel(14, 40, 7, 1.7);
        const double ab = reduced_distance(match_dimensions(a, b, config));
        const double ba = reduced_distance(match_dimensions(b, a, config));
        CHECK(ab != ba);
    }

    SUBCASE("JL path caps the bound at the available variables") {
        ReductionConfig jl = config;
        jl.method = Method::jl;
        jl.jl_epsilon = 0.3;
        jl.jl_seed = 11;
        const Eigen::MatrixXd a = random_panel(9, 25, 8);
        const Eigen::MatrixXd b = random_panel(15, 25, 9);
        const auto match = match_dimensions(a, b, jl);
        CHECK(match.jl_bound == jl_min_dimension(25, 0.3));
        CHECK(match.target_rows == 9); // min(m_a, m_b) since the bound exceeds both
        CHECK(match.a.rows() == 9);
        CHECK(match.b.rows() == 9);
    }

    SUBCASE("observation count mismatch") {
        CHECK_THROWS_WITH_AS(
            match_dimensions(random_panel(4, 30, 1), random_panel(4, 31, 2), config),
            "observation count mismatch", std::invalid_argument);
    }
}

TEST_CASE("jl_distortion_audit") {
    const Eigen::MatrixXd points = random_panel(30, 40, 99);

    SUBCASE("identity projection keeps every pair") {
        const auto report = jl_distortion_audit(points, points, 0.3);
        CHECK(report.pair_fraction_within_bound == 1.0);
        CHECK(report.n_points == 30);
    }

    SUBCASE("uniform over-scaling breaks every pair") {
        const Eigen::MatrixXd scaled = std::sqrt(1.0 + 2.0 * 0.3) * points;
        const auto report = jl_distortion_audit(points, scaled, 0.3);
        CHECK(report.pair_fraction_within_bound == 0.0);
    }

    SUBCASE("random projection at the Lemma bound keeps nearly all pairs") {
        const Eigen::MatrixXd wide = random_panel(50, 200, 100);
        const int k = jl_min_dimension(50, 0.3);
        const auto report = jl_distortion_audit(wide, jl_project(wide, k, 1), 0.3);
        CHECK(report.pair_fraction_within_bound >= 0.99);
        CHECK(report.reduced_dim == k);
    }
}
