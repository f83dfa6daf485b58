#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "bqp/distributions.hpp"
#include "bqp/errors.hpp"
#include "bqp/predictive.hpp"
#include "bqp/returns.hpp"

namespace bqp {

enum class RiskMeasure { VaR, CVaR, Coherent };

/// Which law the risk coefficient is taken from: the posterior predictive t
/// (Bayesian), or the normal with plug-in / true parameters (Conventional /
/// Population).
enum class Estimator { Bayesian, Conventional, Population };

inline std::string to_string(RiskMeasure m) {
    switch (m) {
        case RiskMeasure::VaR: return "var";
        case RiskMeasure::CVaR: return "cvar";
        default: return "coherent";
    }
}

inline std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Bayesian: return "bayesian";
        case Estimator::Conventional: return "conventional";
        default: return "population";
    }
}

/// Risk measure selection. `alpha` is the confidence level in (0.5, 1) for
/// VaR/CVaR; a coherent measure is identified by its coefficient rho(tau),
/// which replaces q_alpha unchanged (the measure must be relevant, translation
/// invariant and positively homogeneous).
struct RiskSpec {
    RiskMeasure measure = RiskMeasure::VaR;
    double alpha = 0.95;
    Estimator estimator = Estimator::Bayesian;
    double rho_tau = 0.0;  // Coherent only

    static RiskSpec value_at_risk(double alpha, Estimator est = Estimator::Bayesian) {
        check_alpha(alpha);
        return {RiskMeasure::VaR, alpha, est, 0.0};
    }

    static RiskSpec conditional_value_at_risk(double alpha,
                                              Estimator est = Estimator::Bayesian) {
        check_alpha(alpha);
        return {RiskMeasure::CVaR, alpha, est, 0.0};
    }

    static RiskSpec coherent(double rho_tau, Estimator est = Estimator::Bayesian) {
        if (!std::isfinite(rho_tau)) throw DomainError("coherent risk coefficient must be finite");
        return {RiskMeasure::Coherent, 0.95, est, rho_tau};
    }

    static RiskSpec from(RiskMeasure m, double alpha, Estimator est) {
        switch (m) {
            case RiskMeasure::VaR: return value_at_risk(alpha, est);
            case RiskMeasure::CVaR: return conditional_value_at_risk(alpha, est);
            default: throw UsageError("coherent risk needs an explicit rho(tau) value");
        }
    }

private:
    static void check_alpha(double alpha) {
        if (!(alpha > 0.5 && alpha < 1.0))
            throw DomainError("confidence level alpha must lie in (0.5, 1)");
    }
};

/// Mean vector and covariance matrix, as estimated (Conventional) or known
/// exactly (Population).
struct MeanCov {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

/// The scalar q multiplying the dispersion term of the risk formula.
///
/// Bayesian:     d_alpha (VaR) or k_alpha (CVaR) of the t with `dof` degrees
///               of freedom; k_alpha is evaluated in log space and needs dof > 1.
/// Conv./Pop.:   z_alpha (VaR) or exp(-z_alpha^2/2) / ((1-alpha) sqrt(2 pi)) (CVaR).
/// Coherent:     rho(tau) passed through.
inline double risk_coefficient(const RiskSpec& spec, double dof = 0.0) {
    if (spec.measure == RiskMeasure::Coherent) return spec.rho_tau;
    if (spec.estimator == Estimator::Bayesian) {
        if (!(dof > 0.0)) throw DomainError("Bayesian risk coefficient requires dof > 0");
        const double d_alpha = t_quantile(dof, spec.alpha);
        if (spec.measure == RiskMeasure::VaR) return d_alpha;
        if (!(dof > 1.0))
            throw DomainError("Bayesian CVaR coefficient is undefined for dof <= 1");
        const double ln =
            -std::log1p(-spec.alpha) + std::lgamma(0.5 * (dof + 1.0)) -
            std::lgamma(0.5 * dof) - 0.5 * std::log(M_PI * dof) + std::log(dof / (dof - 1.0)) -
            0.5 * (dof - 1.0) * std::log1p(d_alpha * d_alpha / dof);
        return std::exp(ln);
    }
    const double z = norm_quantile(spec.alpha);
    if (spec.measure == RiskMeasure::VaR) return z;
    return std::exp(-0.5 * z * z) / ((1.0 - spec.alpha) * std::sqrt(2.0 * M_PI));
}

/// Portfolio risk under the posterior predictive law:
/// Q(w) = -w'xbar + q_alpha sqrt(r) sqrt(w'Sw).
inline double portfolio_risk(const PosteriorParams& post, const Eigen::VectorXd& w,
                             const RiskSpec& spec) {
    if (spec.estimator != Estimator::Bayesian)
        throw UsageError("posterior parameters require a Bayesian risk specification");
    if (w.size() != post.k) throw DomainError("weight vector length does not match asset count");
    detail::require_weights_sum_to_one(w);
    const double q = risk_coefficient(spec, post.dof);
    return -w.dot(post.xbar) + q * std::sqrt(post.r_scale * w.dot(post.scatter * w));
}

/// Portfolio risk under the normal law with the given moments:
/// Q(w) = -w'mu + q_{P;alpha} sqrt(w'Sigma w).
inline double portfolio_risk(const MeanCov& mc, const Eigen::VectorXd& w, const RiskSpec& spec) {
    if (spec.estimator == Estimator::Bayesian)
        throw UsageError("moment inputs require a conventional or population risk specification");
    if (w.size() != mc.mu.size())
        throw DomainError("weight vector length does not match asset count");
    detail::require_weights_sum_to_one(w);
    const double q = risk_coefficient(spec);
    return -w.dot(mc.mu) + q * std::sqrt(w.dot(mc.sigma * w));
}

/// Confidence level beta with F_dof(rho_tau) = beta, so that a coherent
/// measure with coefficient rho(tau) coincides with VaR at level beta.
inline double coherent_to_var_level(double rho_tau, double dof) {
    return t_cdf(rho_tau, dof);
}

}  // namespace bqp
