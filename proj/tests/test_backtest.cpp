#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "bqp/backtest.hpp"
#include "bqp/distributions.hpp"
#include "bqp/io.hpp"
#include "bqp/simulation.hpp"

using namespace bqp;

namespace {

ReturnSeries synthetic_series(int universe, int rows, std::uint64_t seed) {
    SeededRng rng(seed);
    auto [mu, sigma] = generate_scenario(universe, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const Eigen::MatrixXd chol = llt.matrixL();
    ReturnSeries series;
    series.values.resize(rows, universe);
    Eigen::VectorXd z(universe);
    for (int t = 0; t < rows; ++t) {
        for (int i = 0; i < universe; ++i) z(i) = rng.normal();
        series.values.row(t) = (mu + chol * z).transpose();
        char buf[16];
        std::snprintf(buf, sizeof(buf), "2020-%02d-%02d", 1 + t / 28, 1 + t % 28);
        series.dates.emplace_back(buf);
    }
    for (int i = 0; i < universe; ++i) series.assets.push_back("A" + std::to_string(i));
    return series;
}

}  // namespace

TEST_CASE("portfolio sampling", "[backtest]") {
    SECTION("full-universe selection is forced") {
        SeededRng rng(3);
        const auto sets = sample_portfolios(4, 4, 3, rng);
        for (const auto& s : sets) CHECK(s == std::vector<int>{0, 1, 2, 3});
    }
    SECTION("cardinality and distinctness") {
        SeededRng rng(5);
        for (const auto& s : sample_portfolios(20, 7, 50, rng)) {
            CHECK(s.size() == 7);
            CHECK(std::set<int>(s.begin(), s.end()).size() == 7);
            for (int idx : s) {
                CHECK(idx >= 0);
                CHECK(idx < 20);
            }
        }
    }
    SECTION("marginal inclusion frequency is k over universe") {
        SeededRng rng(7);
        const int universe = 10, k = 3, draws = 100'000;
        std::vector<long> hits(universe, 0);
        for (const auto& s : sample_portfolios(universe, k, draws, rng))
            for (int idx : s) ++hits[static_cast<std::size_t>(idx)];
        const double expect = static_cast<double>(k) / universe;
        // binomial tolerance: 4 standard errors
        const double se = std::sqrt(expect * (1.0 - expect) / draws);
        for (long h : hits)
            CHECK(std::fabs(static_cast<double>(h) / draws - expect) < 4.0 * se);
    }
    SECTION("oversized portfolios are rejected") {
        SeededRng rng(9);
        CHECK_THROWS_AS(sample_portfolios(5, 6, 1, rng), DomainError);
    }
}

TEST_CASE("one-asset rolling tally matches a scalar re-implementation", "[backtest]") {
    // Nine observations, window n = 4, five evaluation dates.
    const std::vector<double> xs = {0.010, -0.020, 0.015, -0.005, -0.060,
                                    0.020, 0.001,  -0.030, 0.040};
    ReturnSeries series;
    series.assets = {"X"};
    series.values.resize(9, 1);
    for (int t = 0; t < 9; ++t) series.values(t, 0) = xs[static_cast<std::size_t>(t)];
    series.dates = {"2021-01-01", "2021-01-02", "2021-01-03", "2021-01-04", "2021-01-05",
                    "2021-01-06", "2021-01-07", "2021-01-08", "2021-01-09"};

    BacktestConfig cfg;
    cfg.n = 4;
    cfg.k = 1;
    cfg.alpha = 0.95;
    cfg.portfolio_count = 1;
    cfg.seed = 1;
    cfg.methods = {Method::Jeffreys, Method::Conjugate, Method::Conventional};
    const auto report = rolling_backtest(series, cfg);

    // Independent scalar tally over the same five dates.
    long expect_j = 0, expect_c = 0, expect_v = 0;
    const double t3 = t_quantile(3.0, 0.95);
    const double t6 = t_quantile(6.0, 0.95);
    const double z = norm_quantile(0.95);
    for (int t = 4; t < 9; ++t) {
        double mean = 0.0;
        for (int i = t - 4; i < t; ++i) mean += xs[static_cast<std::size_t>(i)];
        mean /= 4.0;
        double scatter = 0.0;
        for (int i = t - 4; i < t; ++i) {
            const double d = xs[static_cast<std::size_t>(i)] - mean;
            scatter += d * d;
        }
        const double loss = -xs[static_cast<std::size_t>(t)];
        // Jeffreys: d = 3, r = 5/12
        if (loss >= -mean + t3 * std::sqrt(5.0 / 12.0 * scatter)) ++expect_j;
        // conjugate empirical Bayes: m0 = mean, S0 = 2/3 scatter, d = 6, r = 9/48
        if (loss >= -mean + t6 * std::sqrt(9.0 / 48.0 * (5.0 / 3.0) * scatter)) ++expect_c;
        // conventional: sigma^2 = scatter / 3
        if (loss >= -mean + z * std::sqrt(scatter / 3.0)) ++expect_v;
    }
    REQUIRE(report.evaluation_dates == 5);
    REQUIRE(report.included_portfolios == 1);
    CHECK(report.methods[0].exceedance == Catch::Approx(expect_j / 5.0));
    CHECK(report.methods[1].exceedance == Catch::Approx(expect_c / 5.0));
    CHECK(report.methods[2].exceedance == Catch::Approx(expect_v / 5.0));
}

TEST_CASE("constant series fails with portfolio and date context", "[backtest]") {
    ReturnSeries series;
    series.assets = {"A", "B"};
    series.values = Eigen::MatrixXd::Constant(12, 2, 0.01);
    for (int t = 0; t < 12; ++t)
        series.dates.push_back("2021-02-" + std::string(t < 9 ? "0" : "") +
                               std::to_string(t + 1));
    BacktestConfig cfg;
    cfg.n = 6;
    cfg.k = 2;
    cfg.portfolio_count = 1;
    try {
        rolling_backtest(series, cfg);
        FAIL("expected DegenerateDataError");
    } catch (const DegenerateDataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("portfolio 1") != std::string::npos);
        CHECK(msg.find("2021-02-07") != std::string::npos);
    }
}

TEST_CASE("backtest validation", "[backtest]") {
    auto series = synthetic_series(6, 30, 31);
    BacktestConfig cfg;
    cfg.n = 40;
    cfg.k = 3;
    CHECK_THROWS_AS(rolling_backtest(series, cfg), DomainError);  // history too short
    cfg.n = 10;
    cfg.methods = {Method::Population};
    CHECK_THROWS_AS(rolling_backtest(series, cfg), UsageError);
    cfg.methods = {Method::Jeffreys};
    cfg.k = 7;
    CHECK_THROWS_AS(rolling_backtest(series, cfg), DomainError);  // k > universe
}

TEST_CASE("synthetic data reproduces the exceedance ordering at k/n = 0.5",
          "[backtest][slow]") {
    const auto series = synthetic_series(40, 101, 37);
    BacktestConfig cfg;
    cfg.n = 60;
    cfg.k = 30;
    cfg.alpha = 0.95;
    cfg.portfolio_count = 25;
    cfg.seed = 5;
    const auto report = rolling_backtest(series, cfg);
    REQUIRE(report.included_portfolios > 10);
    const double jeffreys = report.methods[0].exceedance;
    const double conjugate = report.methods[1].exceedance;
    const double conventional = report.methods[2].exceedance;
    CHECK(jeffreys < conjugate);
    CHECK(conjugate < conventional);
    CHECK(jeffreys > 1.0 - cfg.alpha);
    // Bayesian conditions hold at least as often as the conventional one
    CHECK(report.methods[0].existence_failures <= report.methods[2].existence_failures);
    CHECK(report.methods[1].existence_failures <= report.methods[2].existence_failures);
}

TEST_CASE("backtest reports are deterministic and thread-invariant", "[backtest]") {
    const auto series = synthetic_series(12, 60, 41);
    BacktestConfig cfg;
    cfg.n = 20;
    cfg.k = 6;
    cfg.portfolio_count = 8;
    cfg.seed = 9;
    cfg.threads = 1;
    const auto a = rolling_backtest(series, cfg);
    cfg.threads = 4;
    const auto b = rolling_backtest(series, cfg);
    REQUIRE(a.methods.size() == b.methods.size());
    CHECK(a.included_portfolios == b.included_portfolios);
    for (std::size_t i = 0; i < a.methods.size(); ++i) {
        CHECK(a.methods[i].exceedance == b.methods[i].exceedance);
        CHECK(a.methods[i].existence_failures == b.methods[i].existence_failures);
    }
}

TEST_CASE("final frontier snapshots share a grid", "[backtest]") {
    const auto series = synthetic_series(10, 80, 47);
    BacktestConfig cfg;
    cfg.n = 30;
    cfg.k = 5;
    cfg.portfolio_count = 2;
    cfg.seed = 3;
    cfg.final_frontier = true;
    cfg.frontier_points = 50;
    const auto report = rolling_backtest(series, cfg);
    REQUIRE(report.final_frontiers.size() == cfg.methods.size());
    for (const auto& curve : report.final_frontiers) {
        REQUIRE(curve.points.size() == 50);
        CHECK(curve.points.front().ret == report.final_frontiers.front().points.front().ret);
        CHECK(curve.points.back().ret == report.final_frontiers.front().points.back().ret);
    }
}
