#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bqp/errors.hpp"
#include "bqp/optimizer.hpp"
#include "bqp/returns.hpp"
#include "bqp/simulation.hpp"

namespace bqp {

/// Rolling-window backtest configuration. `portfolio_count` random asset
/// subsets of size k are drawn once and kept for the whole period; the fit is
/// refreshed at every row (the data cadence is the refit cadence).
struct BacktestConfig {
    int n = 100;
    int k = 10;
    double alpha = 0.95;
    int portfolio_count = 500;
    std::uint64_t seed = 1;
    std::vector<Method> methods = {Method::Jeffreys, Method::Conjugate, Method::Conventional};
    RiskMeasure measure = RiskMeasure::VaR;
    int threads = 0;
    bool final_frontier = false;  // snapshot mean-Q frontiers at the last window
    int frontier_points = 200;
};

struct MethodBacktest {
    Method method = Method::Jeffreys;
    long existence_failures = 0;  // portfolios where the condition failed at least once
    double exceedance = std::numeric_limits<double>::quiet_NaN();
};

struct BacktestReport {
    BacktestConfig config;
    std::vector<MethodBacktest> methods;
    long portfolios = 0;
    long included_portfolios = 0;  // no requested condition ever failed
    long evaluation_dates = 0;
    std::vector<FrontierCurve> final_frontiers;  // parallel to `methods` when requested
};

/// `count` uniformly random k-subsets of {0, ..., universe_size - 1}, each
/// sorted, drawn without replacement (partial Fisher-Yates).
inline std::vector<std::vector<int>> sample_portfolios(int universe_size, int k, int count,
                                                       SeededRng& rng) {
    if (k < 1 || count < 1) throw DomainError("need k >= 1 and count >= 1");
    if (k > universe_size)
        throw DomainError("portfolio size k exceeds the universe (" + std::to_string(k) + " > " +
                          std::to_string(universe_size) + ")");
    std::vector<int> pool(static_cast<std::size_t>(universe_size));
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        std::iota(pool.begin(), pool.end(), 0);
        for (int j = 0; j < k; ++j) {
            const int remaining = universe_size - j;
            const int pick = j + std::min(remaining - 1,
                                          static_cast<int>(rng.uniform01() * remaining));
            std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
        }
        std::vector<int> subset(pool.begin(), pool.begin() + k);
        std::sort(subset.begin(), subset.end());
        out.push_back(std::move(subset));
    }
    return out;
}

namespace detail {

struct PortfolioTally {
    std::vector<char> ever_failed;
    std::vector<long> exceed;
};

inline FrontierBasis fit_method(Method m, const Eigen::MatrixXd& window) {
    switch (m) {
        case Method::Jeffreys:
            return frontier_basis(posterior_params(window, PriorSpec::jeffreys()));
        case Method::Conjugate:
            return frontier_basis(posterior_params(window, empirical_bayes_hyperparams(window)));
        case Method::Conventional:
            return frontier_basis(conventional_estimates(window), Estimator::Conventional);
        default:
            throw UsageError("population method needs known parameters");
    }
}

inline RiskSpec backtest_spec(Method m, RiskMeasure measure, double alpha) {
    const Estimator est = (m == Method::Jeffreys || m == Method::Conjugate)
                              ? Estimator::Bayesian
                              : Estimator::Conventional;
    return RiskSpec::from(measure, alpha, est);
}

}  // namespace detail

/// Weekly-style rolling refit over user-supplied returns: at every date t the
/// window of the n preceding rows is fitted per method, the GMQ portfolio's
/// predicted risk is compared with the realized return of row t, and
/// exceedances are averaged over all (portfolio, date) cells of the portfolios
/// whose conditions held throughout.
inline BacktestReport rolling_backtest(const ReturnSeries& series, const BacktestConfig& config) {
    series.validate();
    const Eigen::Index universe = series.asset_count();
    const Eigen::Index t_total = series.periods();
    if (config.k < 1 || config.k > universe)
        throw DomainError("portfolio size k must lie in [1, universe size]");
    if (!(t_total > config.n + 1))
        throw DomainError("insufficient history: need more than n + 1 rows (have " +
                          std::to_string(t_total) + ", n=" + std::to_string(config.n) + ")");
    if (config.portfolio_count < 1) throw DomainError("portfolio count must be at least 1");
    if (!(config.alpha > 0.5 && config.alpha < 1.0))
        throw DomainError("confidence level alpha must lie in (0.5, 1)");
    for (const Method m : config.methods)
        if (m == Method::Population)
            throw UsageError("population method is unavailable on market data");
    if (config.methods.empty()) throw DomainError("at least one method must be requested");
    if (config.n - config.k < 3)
        throw DomainError("estimating methods need n >= k + 3");

    SeededRng rng(config.seed);
    const auto subsets =
        sample_portfolios(static_cast<int>(universe), config.k, config.portfolio_count, rng);
    const long eval_dates = static_cast<long>(t_total) - config.n;
    const std::size_t n_methods = config.methods.size();

    std::vector<detail::PortfolioTally> tallies(subsets.size());
    auto run_portfolio = [&](std::size_t pi) {
        const auto& subset = subsets[pi];
        Eigen::MatrixXd sub(t_total, config.k);
        for (int j = 0; j < config.k; ++j)
            sub.col(j) = series.values.col(subset[static_cast<std::size_t>(j)]);

        detail::PortfolioTally tally;
        tally.ever_failed.assign(n_methods, 0);
        tally.exceed.assign(n_methods, 0);
        for (Eigen::Index t = config.n; t < t_total; ++t) {
            const Eigen::MatrixXd window = sub.middleRows(t - config.n, config.n);
            for (std::size_t mi = 0; mi < n_methods; ++mi) {
                const Method m = config.methods[mi];
                const RiskSpec spec = detail::backtest_spec(m, config.measure, config.alpha);
                try {
                    const FrontierBasis basis = detail::fit_method(m, window);
                    if (!gmq_existence(basis, spec).exists) {
                        tally.ever_failed[mi] = 1;
                        continue;
                    }
                    const GmqPortfolio p = gmq_portfolio(basis, spec);
                    const double realized = p.weights.dot(sub.row(t));
                    if (-realized >= p.risk) ++tally.exceed[mi];
                } catch (const DegenerateDataError& e) {
                    std::ostringstream os;
                    os << e.what() << " (portfolio " << pi + 1 << ", date "
                       << series.dates[static_cast<std::size_t>(t)] << ", method "
                       << to_string(m) << ")";
                    throw DegenerateDataError(os.str());
                }
            }
        }
        tallies[pi] = std::move(tally);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned requested = config.threads > 0 ? static_cast<unsigned>(config.threads) : hw;
    const unsigned workers =
        std::min<unsigned>(requested, static_cast<unsigned>(subsets.size()));
    if (workers <= 1) {
        for (std::size_t pi = 0; pi < subsets.size(); ++pi) run_portfolio(pi);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t pi = next.fetch_add(1);
                if (pi >= subsets.size()) return;
                try {
                    run_portfolio(pi);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    BacktestReport report;
    report.config = config;
    report.portfolios = static_cast<long>(subsets.size());
    report.evaluation_dates = eval_dates;
    report.methods.resize(n_methods);
    for (std::size_t mi = 0; mi < n_methods; ++mi)
        report.methods[mi].method = config.methods[mi];

    std::vector<long> exceed_total(n_methods, 0);
    for (const auto& tally : tallies) {
        const bool included =
            std::none_of(tally.ever_failed.begin(), tally.ever_failed.end(),
                         [](char f) { return f != 0; });
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            if (tally.ever_failed[mi]) ++report.methods[mi].existence_failures;
            if (included) exceed_total[mi] += tally.exceed[mi];
        }
        if (included) ++report.included_portfolios;
    }
    if (report.included_portfolios > 0) {
        const double cells =
            static_cast<double>(report.included_portfolios) * static_cast<double>(eval_dates);
        for (std::size_t mi = 0; mi < n_methods; ++mi)
            report.methods[mi].exceedance = static_cast<double>(exceed_total[mi]) / cells;
    }

    if (config.final_frontier) {
        const auto& subset = subsets.front();
        Eigen::MatrixXd sub(config.n, config.k);
        for (int j = 0; j < config.k; ++j)
            sub.col(j) = series.values.col(subset[static_cast<std::size_t>(j)])
                             .tail(config.n);
        std::vector<double> grid;
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const Method m = config.methods[mi];
            const FrontierBasis basis = detail::fit_method(m, sub);
            if (grid.empty()) grid = default_return_grid(basis, config.frontier_points);
            report.final_frontiers.push_back(frontier_mean_q(
                basis, detail::backtest_spec(m, config.measure, config.alpha), grid));
        }
    }
    return report;
}

}  // namespace bqp
