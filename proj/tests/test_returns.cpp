#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "bqp/returns.hpp"
#include "bqp/rng.hpp"
#include "oracles.hpp"

using namespace bqp;

namespace {

Eigen::MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    SeededRng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index t = 0; t < rows; ++t)
        for (Eigen::Index i = 0; i < cols; ++i) m(t, i) = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("log returns of constant and doubling prices", "[returns]") {
    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 3, 42.0);
    CHECK(prices_to_log_returns(constant).isZero(0.0));

    Eigen::MatrixXd doubling(4, 2);
    doubling << 1, 3, 2, 6, 4, 12, 8, 24;
    const Eigen::MatrixXd r = prices_to_log_returns(doubling);
    for (Eigen::Index t = 0; t < r.rows(); ++t)
        for (Eigen::Index i = 0; i < r.cols(); ++i)
            CHECK(r(t, i) == Catch::Approx(0.6931471805599453).epsilon(1e-15));
}

TEST_CASE("log returns match scalar ln-ratio evaluation", "[returns]") {
    Eigen::MatrixXd prices(4, 2);
    prices << 101.25, 55.5, 99.875, 57.25, 103.5, 56.125, 102.0, 58.0;
    const Eigen::MatrixXd r = prices_to_log_returns(prices);
    REQUIRE(r.rows() == 3);
    for (Eigen::Index t = 0; t < 3; ++t)
        for (Eigen::Index i = 0; i < 2; ++i)
            CHECK(r(t, i) == Catch::Approx(std::log(prices(t + 1, i) / prices(t, i)))
                                 .epsilon(1e-15));
}

TEST_CASE("log returns reject non-positive prices", "[returns]") {
    Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(3, 2, 10.0);
    prices(1, 1) = 0.0;
    CHECK_THROWS_MATCHES(prices_to_log_returns(prices), DomainError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("row 2, column 2")));
}

TEST_CASE("sufficient statistics closed forms", "[returns]") {
    SECTION("identical rows give a zero scatter") {
        Eigen::MatrixXd window = Eigen::VectorXd::Ones(6) * Eigen::RowVector3d(0.1, -0.2, 0.05);
        const auto st = sufficient_statistics(window);
        CHECK(st.scatter.isZero(1e-18));
        CHECK(st.mean.isApprox(Eigen::Vector3d(0.1, -0.2, 0.05)));
    }
    SECTION("two observations") {
        Eigen::MatrixXd window(2, 2);
        window << 0.02, -0.01, -0.04, 0.03;
        const auto st = sufficient_statistics(window);
        const Eigen::Vector2d a(0.02, -0.01), b(-0.04, 0.03);
        CHECK(st.mean.isApprox(Eigen::Vector2d((a + b) / 2.0), 1e-15));
        const Eigen::Matrix2d expected = (a - b) * (a - b).transpose() / 2.0;
        CHECK(st.scatter.isApprox(expected, 1e-13));
    }
    SECTION("n < 2 is rejected") {
        CHECK_THROWS_AS(sufficient_statistics(Eigen::MatrixXd::Zero(1, 3)),
                        InsufficientDataError);
    }
}

TEST_CASE("scatter matches the naive double-loop oracle", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(50, 5, 11);
    const auto st = sufficient_statistics(window);
    CHECK(st.scatter.isApprox(oracles::scatter_naive(window), 1e-12));
}

TEST_CASE("scatter is symmetric PSD, PD in general position", "[returns]") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const Eigen::MatrixXd window = random_gaussian(30, 6, seed);
        const auto st = sufficient_statistics(window);
        CHECK(st.scatter.isApprox(st.scatter.transpose()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.scatter, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    // rank-deficient when n <= k
    const Eigen::MatrixXd thin = random_gaussian(4, 6, 9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sufficient_statistics(thin).scatter,
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(es.eigenvalues().minCoeff() < 1e-12);
}

TEST_CASE("Jeffreys posterior constants", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(100, 10, 21) * 0.01;
    const auto post = posterior_params(window, PriorSpec::jeffreys());
    CHECK(post.dof == 90.0);
    CHECK(post.r_scale == Catch::Approx(101.0 / 9000.0).epsilon(1e-15));
    const auto st = sufficient_statistics(window);
    CHECK(post.xbar.isApprox(st.mean));
    CHECK(post.scatter.isApprox(st.scatter));
}

TEST_CASE("Jeffreys posterior requires n > k", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(10, 10, 3);
    CHECK_THROWS_MATCHES(posterior_params(window, PriorSpec::jeffreys()), ExistenceError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("n > k")));
}

TEST_CASE("conjugate posterior with matched empirical hyperparameters", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(40, 4, 31) * 0.02;
    const auto st = sufficient_statistics(window);
    const double n = 40.0;
    // r0 = d0 = n, m0 = sample mean, S0 = 0: the location stays at the sample
    // mean and the degrees of freedom become 2(n - k).
    const auto prior = PriorSpec::conjugate(st.mean, Eigen::MatrixXd::Zero(4, 4), n, n);
    const auto post = posterior_params(window, prior);
    CHECK(post.dof == Catch::Approx(2.0 * (40.0 - 4.0)));
    CHECK(post.xbar.isApprox(st.mean, 1e-14));
    CHECK(post.scatter.isApprox(st.scatter, 1e-12));
    CHECK(post.r_scale == Catch::Approx((n + n + 1.0) / ((n + n) * (n + n - 8.0))));
}

TEST_CASE("conjugate posterior shrinks toward the prior location", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(30, 3, 41) * 0.01;
    const auto st = sufficient_statistics(window);
    const Eigen::Vector3d m0(0.5, 0.5, 0.5);
    const auto prior = PriorSpec::conjugate(m0, Eigen::MatrixXd::Identity(3, 3) * 1e-4, 10.0, 12.0);
    const auto post = posterior_params(window, prior);
    const Eigen::VectorXd expected = (30.0 * st.mean + 10.0 * m0) / 40.0;
    CHECK(post.xbar.isApprox(expected, 1e-13));
    const Eigen::VectorXd gap = m0 - expected;
    const Eigen::MatrixXd expected_scatter = st.scatter +
                                             Eigen::MatrixXd::Identity(3, 3) * 1e-4 +
                                             (30.0 * 10.0 / 40.0) * gap * gap.transpose();
    CHECK(post.scatter.isApprox(expected_scatter, 1e-12));
}

TEST_CASE("conjugate posterior approaches Jeffreys as r0 -> 0", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(25, 3, 51) * 0.01;
    const auto jeffreys = posterior_params(window, PriorSpec::jeffreys());
    const auto prior = PriorSpec::conjugate(Eigen::Vector3d(1.0, 1.0, 1.0),
                                            Eigen::MatrixXd::Zero(3, 3), 1e-8, 3.0 + 1e-8);
    const auto post = posterior_params(window, prior);
    CHECK((post.xbar - jeffreys.xbar).norm() < 1e-8);
    CHECK((post.scatter - jeffreys.scatter).norm() < 1e-6);
    CHECK(post.dof == Catch::Approx(22.0).margin(1e-7));  // n + d0 - 2k -> n - k
}

TEST_CASE("posterior parameters are exchangeable across row order", "[returns]") {
    const Eigen::MatrixXd window = random_gaussian(20, 4, 61) * 0.03;
    Eigen::MatrixXd shuffled = window;
    SeededRng rng(7);
    for (Eigen::Index i = shuffled.rows() - 1; i > 0; --i) {
        const Eigen::Index j = static_cast<Eigen::Index>(rng.uniform01() * (i + 1));
        shuffled.row(i).swap(shuffled.row(j));
    }
    const auto a = posterior_params(window, PriorSpec::jeffreys());
    const auto b = posterior_params(shuffled, PriorSpec::jeffreys());
    CHECK(a.xbar.isApprox(b.xbar, 1e-12));
    CHECK(a.scatter.isApprox(b.scatter, 1e-12));
}

TEST_CASE("degenerate data is rejected, not regularized", "[returns]") {
    Eigen::MatrixXd window(5, 3);
    // third column is the sum of the first two: scatter is singular
    window << 0.01, 0.02, 0.03, -0.02, 0.01, -0.01, 0.03, -0.01, 0.02, 0.0, 0.02, 0.02, 0.01,
        0.0, 0.01;
    CHECK_THROWS_AS(posterior_params(window, PriorSpec::jeffreys()), DegenerateDataError);
}

TEST_CASE("empirical Bayes hyperparameters", "[returns]") {
    SECTION("r0 = d0 = n") {
        const Eigen::MatrixXd window = random_gaussian(100, 10, 71) * 0.01;
        const auto prior = empirical_bayes_hyperparams(window);
        CHECK(prior.kind == PriorKind::Conjugate);
        CHECK(prior.r0 == 100.0);
        CHECK(prior.d0 == 100.0);
    }
    SECTION("composition with sufficient statistics and the stated scaling") {
        const Eigen::MatrixXd window = random_gaussian(60, 4, 81) * 0.02;
        const auto prior = empirical_bayes_hyperparams(window);
        const auto st = sufficient_statistics(window);
        CHECK(prior.m0.isApprox(st.mean, 1e-14));
        const Eigen::MatrixXd expected = (60.0 - 4.0 - 1.0) * st.scatter / 59.0;
        CHECK(prior.s0.isApprox(expected, 1e-13));
    }
    SECTION("constant window is degenerate") {
        Eigen::MatrixXd window = Eigen::VectorXd::Ones(10) * Eigen::RowVector2d(0.01, 0.02);
        CHECK_THROWS_AS(empirical_bayes_hyperparams(window), DegenerateDataError);
    }
    SECTION("needs n >= k + 2") {
        CHECK_THROWS_AS(empirical_bayes_hyperparams(random_gaussian(5, 4, 2)),
                        InsufficientDataError);
    }
}
