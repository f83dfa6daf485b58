// Minimal library walkthrough: simulate a 5-asset market, fit the posterior
// under both priors, and compare the global minimum VaR portfolios with the
// conventional plug-in answer.

#include <cstdio>

#include "bqp/bqp.hpp"

int main() {
    using namespace bqp;

    SeededRng rng(2024);
    auto [mu, sigma] = generate_scenario(5, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd window(100, 5);
    Eigen::VectorXd z(5);
    for (int t = 0; t < 100; ++t) {
        for (int i = 0; i < 5; ++i) z(i) = rng.normal();
        window.row(t) = (mu + chol * z).transpose();
    }

    const double alpha = 0.95;
    auto report = [&](const char* name, const GmqPortfolio& p) {
        std::printf("%-22s ret=% .5f  sd=%.5f  VaR=%.5f  weights:", name, p.ret,
                    std::sqrt(p.variance), p.risk);
        for (int i = 0; i < p.weights.size(); ++i) std::printf(" % .3f", p.weights(i));
        std::printf("\n");
    };

    const auto jeffreys = posterior_params(window, PriorSpec::jeffreys());
    report("Jeffreys prior", gmq_portfolio(jeffreys, RiskSpec::value_at_risk(alpha)));

    const auto conjugate = posterior_params(window, empirical_bayes_hyperparams(window));
    report("conjugate prior", gmq_portfolio(conjugate, RiskSpec::value_at_risk(alpha)));

    const auto plug_in = conventional_estimates(window);
    report("conventional plug-in",
           gmq_portfolio(plug_in, RiskSpec::value_at_risk(alpha, Estimator::Conventional)));

    report("population truth",
           gmq_portfolio(MeanCov{mu, sigma},
                         RiskSpec::value_at_risk(alpha, Estimator::Population)));

    // CVaR versions exist whenever the VaR versions do (k_alpha > d_alpha).
    report("Jeffreys prior, CVaR",
           gmq_portfolio(jeffreys, RiskSpec::conditional_value_at_risk(alpha)));
    return 0;
}
