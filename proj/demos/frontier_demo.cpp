// Prints a small mean-VaR frontier table for one simulated market, one row
// per grid return, with the GMV and GMQ markers of each estimator.

#include <cstdio>

#include "bqp/bqp.hpp"

int main() {
    using namespace bqp;

    SeededRng rng(7);
    auto [mu, sigma] = generate_scenario(10, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd window(100, 10);
    Eigen::VectorXd z(10);
    for (int t = 0; t < 100; ++t) {
        for (int i = 0; i < 10; ++i) z(i) = rng.normal();
        window.row(t) = (mu + chol * z).transpose();
    }

    const RiskSpec bayes_spec = RiskSpec::value_at_risk(0.95);
    const RiskSpec pop_spec = RiskSpec::value_at_risk(0.95, Estimator::Population);
    const auto bayes = frontier_basis(posterior_params(window, PriorSpec::jeffreys()));
    const auto pop = frontier_basis(MeanCov{mu, sigma}, Estimator::Population);

    const auto grid = default_return_grid(bayes, 9);
    const auto bayes_curve = frontier_mean_q(bayes, bayes_spec, grid);
    const auto pop_curve = frontier_mean_q(pop, pop_spec, grid);

    std::printf("%12s %14s %14s\n", "R", "Q (Jeffreys)", "Q (population)");
    for (std::size_t i = 0; i < grid.size(); ++i)
        std::printf("%12.6f %14.6f %14.6f\n", bayes_curve.points[i].ret,
                    bayes_curve.points[i].value, pop_curve.points[i].value);

    const auto bayes_gmq = gmq_portfolio(bayes, bayes_spec);
    const auto pop_gmq = gmq_portfolio(pop, pop_spec);
    std::printf("\nGMV  (Jeffreys):   R=%.6f Q=%.6f\n", bayes_curve.gmv_point.ret,
                bayes_curve.gmv_point.value);
    std::printf("GMQ  (Jeffreys):   R=%.6f Q=%.6f\n", bayes_gmq.ret, bayes_gmq.risk);
    std::printf("GMQ  (population): R=%.6f Q=%.6f\n", pop_gmq.ret, pop_gmq.risk);
    return 0;
}
