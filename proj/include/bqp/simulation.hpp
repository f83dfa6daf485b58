#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "bqp/errors.hpp"
#include "bqp/optimizer.hpp"
#include "bqp/returns.hpp"
#include "bqp/risk.hpp"
#include "bqp/rng.hpp"

namespace bqp {

enum class Method { Jeffreys, Conjugate, Conventional, Population };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Jeffreys: return "jeffreys";
        case Method::Conjugate: return "conjugate";
        case Method::Conventional: return "conventional";
        default: return "population";
    }
}

inline const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {Method::Jeffreys, Method::Conjugate,
                                                Method::Conventional, Method::Population};
    return methods;
}

/// Monte Carlo study configuration. Each run draws a fresh scenario (mu, Sigma),
/// simulates an n x k window of normal returns, fits the requested methods and
/// evaluates the global minimum quantile portfolio one period ahead.
struct SimulationConfig {
    int n = 100;
    int k = 10;
    double alpha = 0.95;
    int runs = 2000;
    std::uint64_t seed = 1;
    std::vector<Method> methods = all_methods();
    RiskMeasure measure = RiskMeasure::VaR;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const {
        if (n < 2 || k < 1) throw DomainError("simulation requires n >= 2 and k >= 1");
        if (runs < 1) throw DomainError("simulation requires at least one run");
        if (!(alpha > 0.5 && alpha < 1.0))
            throw DomainError("confidence level alpha must lie in (0.5, 1)");
        if (methods.empty()) throw DomainError("at least one method must be requested");
        if (measure == RiskMeasure::Coherent)
            throw UsageError("simulation studies support VaR and CVaR only");
        for (const Method m : methods) {
            if (m != Method::Population && n - k < 3)
                throw DomainError("estimating methods need n >= k + 3 (got n=" +
                                  std::to_string(n) + ", k=" + std::to_string(k) + ")");
        }
    }
};

struct MethodStudy {
    Method method = Method::Jeffreys;
    long existence_failures = 0;  // over all runs
    double exceedance = std::numeric_limits<double>::quiet_NaN();
    double mean_abs_dev = std::numeric_limits<double>::quiet_NaN();
    double sd_abs_dev = std::numeric_limits<double>::quiet_NaN();
};

struct StudyResult {
    SimulationConfig config;
    std::vector<MethodStudy> methods;
    long effective_runs = 0;  // runs where every requested condition held simultaneously
};

/// Random market scenario: mu_i ~ U(-0.003, 0.005) and Sigma = D R D with
/// equicorrelation R_ij = 0.3 (i != j) and D_ii ~ U(0.03, 0.04).
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> generate_scenario(int k, SeededRng& rng) {
    if (k < 1) throw DomainError("scenario needs k >= 1");
    Eigen::VectorXd mu(k);
    for (int i = 0; i < k; ++i) mu(i) = rng.uniform(-0.003, 0.005);
    Eigen::VectorXd sd(k);
    for (int i = 0; i < k; ++i) sd(i) = rng.uniform(0.03, 0.04);
    Eigen::MatrixXd sigma(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
            sigma(i, j) = (i == j ? 1.0 : 0.3) * (sd(i) * sd(j));
    }
    return {std::move(mu), std::move(sigma)};
}

namespace detail {

struct MethodRecord {
    bool exists = false;
    double predicted = 0.0;
    double realized = 0.0;
};

struct RunRecord {
    std::vector<MethodRecord> methods;
    bool benchmark_exists = false;
    double benchmark_risk = 0.0;  // VaR/CVaR of the population GMQ portfolio
};

class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

inline RunRecord simulate_one_run(const SimulationConfig& config, std::uint64_t run_index,
                                  bool with_performance) {
    SeededRng rng = SeededRng(config.seed).derive(run_index);
    auto [mu, sigma] = generate_scenario(config.k, rng);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd window(config.n, config.k);
    Eigen::VectorXd z(config.k);
    for (int t = 0; t < config.n; ++t) {
        for (int i = 0; i < config.k; ++i) z(i) = rng.normal();
        window.row(t) = (mu + chol * z).transpose();
    }
    Eigen::VectorXd next_return;
    if (with_performance) {
        for (int i = 0; i < config.k; ++i) z(i) = rng.normal();
        next_return = mu + chol * z;
    }

    const MeanCov truth{mu, sigma};
    RunRecord rec;
    rec.methods.resize(config.methods.size());

    auto fit = [&](Method m) -> FrontierBasis {
        switch (m) {
            case Method::Jeffreys:
                return frontier_basis(posterior_params(window, PriorSpec::jeffreys()));
            case Method::Conjugate:
                return frontier_basis(
                    posterior_params(window, empirical_bayes_hyperparams(window)));
            case Method::Conventional:
                return frontier_basis(conventional_estimates(window), Estimator::Conventional);
            default:
                return frontier_basis(truth, Estimator::Population);
        }
    };
    auto spec_for = [&](Method m) {
        const Estimator est = m == Method::Jeffreys || m == Method::Conjugate
                                  ? Estimator::Bayesian
                                  : (m == Method::Conventional ? Estimator::Conventional
                                                               : Estimator::Population);
        return RiskSpec::from(config.measure, config.alpha, est);
    };

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        const Method m = config.methods[mi];
        const FrontierBasis basis = fit(m);
        const RiskSpec spec = spec_for(m);
        const GmqExistence ex = gmq_existence(basis, spec);
        rec.methods[mi].exists = ex.exists;
        if (ex.exists && with_performance) {
            const GmqPortfolio p = gmq_portfolio(basis, spec);
            rec.methods[mi].predicted = p.risk;
            rec.methods[mi].realized = p.weights.dot(next_return);
        }
    }

    if (with_performance) {
        const FrontierBasis pop_basis = frontier_basis(truth, Estimator::Population);
        const RiskSpec pop_spec = spec_for(Method::Population);
        const GmqExistence ex = gmq_existence(pop_basis, pop_spec);
        rec.benchmark_exists = ex.exists;
        if (ex.exists) rec.benchmark_risk = gmq_portfolio(pop_basis, pop_spec).risk;
    }
    return rec;
}

inline std::vector<RunRecord> collect_runs(const SimulationConfig& config,
                                           bool with_performance) {
    std::vector<RunRecord> records(static_cast<std::size_t>(config.runs));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned requested = config.threads > 0 ? static_cast<unsigned>(config.threads) : hw;
    const unsigned workers =
        std::min<unsigned>(requested, static_cast<unsigned>(config.runs));

    if (workers <= 1) {
        for (int i = 0; i < config.runs; ++i)
            records[static_cast<std::size_t>(i)] =
                simulate_one_run(config, static_cast<std::uint64_t>(i), with_performance);
        return records;
    }

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= config.runs) return;
            records[static_cast<std::size_t>(i)] =
                simulate_one_run(config, static_cast<std::uint64_t>(i), with_performance);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return records;
}

}  // namespace detail

/// Tally, per requested method, how often the existence condition of the
/// global minimum quantile portfolio fails across all runs.
inline StudyResult run_existence_study(const SimulationConfig& config) {
    config.validate();
    const auto records = detail::collect_runs(config, /*with_performance=*/false);

    StudyResult result;
    result.config = config;
    result.methods.resize(config.methods.size());
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
        result.methods[mi].method = config.methods[mi];

    for (const auto& rec : records) {
        bool all_hold = true;
        for (std::size_t mi = 0; mi < rec.methods.size(); ++mi) {
            if (!rec.methods[mi].exists) {
                ++result.methods[mi].existence_failures;
                all_hold = false;
            }
        }
        if (all_hold) ++result.effective_runs;
    }
    return result;
}

/// Out-of-sample study of the GMQ portfolios: per-method exceedance frequency
/// of the predicted risk and absolute deviation from the population value.
/// A run contributes to the performance aggregates only when every requested
/// method's existence condition holds simultaneously; the per-method failure
/// counts are tallied over all runs regardless.
inline StudyResult run_performance_study(const SimulationConfig& config) {
    config.validate();
    const auto records = detail::collect_runs(config, /*with_performance=*/true);

    StudyResult result;
    result.config = config;
    result.methods.resize(config.methods.size());
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
        result.methods[mi].method = config.methods[mi];

    std::vector<char> effective(records.size(), 0);
    for (std::size_t ri = 0; ri < records.size(); ++ri) {
        bool all_hold = records[ri].benchmark_exists;
        for (std::size_t mi = 0; mi < records[ri].methods.size(); ++mi) {
            if (!records[ri].methods[mi].exists) {
                ++result.methods[mi].existence_failures;
                all_hold = false;
            }
        }
        effective[ri] = all_hold ? 1 : 0;
        if (all_hold) ++result.effective_runs;
    }
    if (result.effective_runs == 0)
        throw EmptyResultError(
            "no run satisfied all existence conditions simultaneously; nothing to aggregate");

    const double n_eff = static_cast<double>(result.effective_runs);
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        detail::KahanSum exceed, dev;
        for (std::size_t ri = 0; ri < records.size(); ++ri) {
            if (!effective[ri]) continue;
            const auto& mr = records[ri].methods[mi];
            exceed.add(-mr.realized >= mr.predicted ? 1.0 : 0.0);
            dev.add(std::fabs(mr.predicted - records[ri].benchmark_risk));
        }
        result.methods[mi].exceedance = exceed.value() / n_eff;
        const double mean_dev = dev.value() / n_eff;
        result.methods[mi].mean_abs_dev = mean_dev;
        if (result.effective_runs > 1) {
            detail::KahanSum sq;
            for (std::size_t ri = 0; ri < records.size(); ++ri) {
                if (!effective[ri]) continue;
                const double gap = std::fabs(records[ri].methods[mi].predicted -
                                             records[ri].benchmark_risk) -
                                   mean_dev;
                sq.add(gap * gap);
            }
            result.methods[mi].sd_abs_dev = std::sqrt(sq.value() / (n_eff - 1.0));
        }
    }
    return result;
}

}  // namespace bqp
