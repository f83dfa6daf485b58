#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "bqp/errors.hpp"
#include "bqp/returns.hpp"
#include "bqp/risk.hpp"

namespace bqp {

/// Global minimum variance portfolio: weights, expected return, variance and
/// the frontier slope s = xbar' M xbar with M = S^-1 - S^-1 1 1' S^-1 / (1' S^-1 1).
/// In Bayesian mode the variance carries the predictive factor d r / (d - 2).
struct GmvSummary {
    Eigen::VectorXd weights;
    double ret = 0.0;
    double variance = 0.0;
    double slope = 0.0;
};

/// Global minimum quantile portfolio (GMVaR / GMCVaR / general coherent).
struct GmqPortfolio {
    Eigen::VectorXd weights;
    double ret = 0.0;
    double variance = 0.0;
    double risk = 0.0;
    double q_alpha = 0.0;  // coefficient the portfolio was built with
};

enum class FrontierMode { MeanQuantile, MeanVariance };

struct FrontierPoint {
    double ret = 0.0;    // expected return R
    double value = 0.0;  // risk Q (mean-quantile) or variance V (mean-variance)
};

struct FrontierCurve {
    FrontierMode mode = FrontierMode::MeanQuantile;
    Estimator estimator = Estimator::Bayesian;
    std::vector<FrontierPoint> points;
    FrontierPoint gmv_point;
};

/// Everything the closed-form portfolio formulas need, factored out of the
/// inputs once: the GMV summary, the excess-return direction M xbar (or M mu),
/// and the predictive constants in Bayesian mode.
struct FrontierBasis {
    GmvSummary gmv;
    Eigen::VectorXd excess_direction;  // M xbar / M mu
    double dof = 0.0;                  // Bayesian only
    double r_scale = 0.0;              // Bayesian only
    bool bayesian = false;
    Estimator estimator = Estimator::Population;

    /// sqrt((d-2)/d) in Bayesian mode, 1 otherwise; converts sqrt(predictive
    /// variance) into the dispersion term of the risk formula.
    double tail_factor() const { return bayesian ? std::sqrt((dof - 2.0) / dof) : 1.0; }

    /// Slope entering the existence condition and the mean-Q frontier:
    /// r^-1 s in Bayesian mode, s otherwise.
    double normalized_slope() const { return bayesian ? gmv.slope / r_scale : gmv.slope; }
};

namespace detail {

inline FrontierBasis make_basis(const Eigen::VectorXd& mean, const Eigen::MatrixXd& scale,
                                double variance_factor) {
    const Eigen::LLT<Eigen::MatrixXd> llt = checked_llt(scale, "scale matrix");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(scale.rows());
    const Eigen::VectorXd sinv_one = llt.solve(ones);
    const Eigen::VectorXd sinv_mean = llt.solve(mean);
    const double a = ones.dot(sinv_one);  // 1' S^-1 1 > 0 for PD S
    const double b = ones.dot(sinv_mean);

    FrontierBasis basis;
    basis.gmv.weights = sinv_one / a;
    basis.gmv.ret = b / a;
    basis.gmv.variance = variance_factor / a;
    basis.excess_direction = sinv_mean - sinv_one * (b / a);
    basis.gmv.slope = std::max(0.0, mean.dot(basis.excess_direction));
    return basis;
}

inline void require_matching_estimator(const FrontierBasis& basis, const RiskSpec& spec) {
    if (basis.estimator != spec.estimator)
        throw UsageError("risk specification estimator does not match the inputs (" +
                         to_string(spec.estimator) + " vs " + to_string(basis.estimator) + ")");
}

}  // namespace detail

inline FrontierBasis frontier_basis(const PosteriorParams& post) {
    if (!(post.dof > 2.0))
        throw DomainError("Bayesian portfolio formulas require dof > 2 (predictive variance)");
    const double factor = post.dof * post.r_scale / (post.dof - 2.0);
    FrontierBasis basis = detail::make_basis(post.xbar, post.scatter, factor);
    basis.dof = post.dof;
    basis.r_scale = post.r_scale;
    basis.bayesian = true;
    basis.estimator = Estimator::Bayesian;
    return basis;
}

inline FrontierBasis frontier_basis(const MeanCov& mc,
                                    Estimator estimator = Estimator::Population) {
    if (estimator == Estimator::Bayesian)
        throw UsageError("moment inputs cannot form a Bayesian basis");
    FrontierBasis basis = detail::make_basis(mc.mu, mc.sigma, 1.0);
    basis.estimator = estimator;
    return basis;
}

/// Sample mean and covariance (divisor n - ddof) as plug-in estimates.
inline MeanCov conventional_estimates(const Eigen::MatrixXd& window, int ddof = 1) {
    const Eigen::Index n = window.rows();
    const Eigen::Index k = window.cols();
    if (!(n > k + 1)) throw InsufficientDataError("conventional estimates need n > k + 1");
    if (ddof < 0 || n - ddof < 1) throw DomainError("invalid covariance divisor");
    const SufficientStats st = sufficient_statistics(window);
    MeanCov mc;
    mc.mu = st.mean;
    mc.sigma = st.scatter / static_cast<double>(n - ddof);
    detail::require_positive_definite(mc.sigma, "sample covariance");
    return mc;
}

inline GmvSummary gmv_summary(const PosteriorParams& post) { return frontier_basis(post).gmv; }

inline GmvSummary gmv_summary(const MeanCov& mc) { return frontier_basis(mc).gmv; }

/// Minimum-variance weights for expected return R0:
/// w = w_GMV + (R0 - R_GMV) / s * M mu. Requires s > 0 unless R0 = R_GMV.
inline Eigen::VectorXd mean_variance_weights(const FrontierBasis& basis, double target_return) {
    if (basis.gmv.slope <= 0.0) {
        if (target_return == basis.gmv.ret) return basis.gmv.weights;
        throw DomainError("target return is infeasible: frontier slope is zero");
    }
    return basis.gmv.weights +
           ((target_return - basis.gmv.ret) / basis.gmv.slope) * basis.excess_direction;
}

inline Eigen::VectorXd mean_variance_weights(const PosteriorParams& post, double target_return) {
    return mean_variance_weights(frontier_basis(post), target_return);
}

inline Eigen::VectorXd mean_variance_weights(const MeanCov& mc, double target_return) {
    return mean_variance_weights(frontier_basis(mc), target_return);
}

struct GmqExistence {
    bool exists = false;
    double q_squared = 0.0;
    double slope_term = 0.0;  // r^-1 s (Bayesian) or s (conventional/population)
};

/// Strict existence condition of the global minimum quantile portfolio:
/// q_alpha^2 > r^-1 s (Bayesian) or q^2 > s (conventional/population).
inline GmqExistence gmq_existence(const FrontierBasis& basis, const RiskSpec& spec) {
    detail::require_matching_estimator(basis, spec);
    const double q = risk_coefficient(spec, basis.dof);
    GmqExistence e;
    e.q_squared = q * q;
    e.slope_term = basis.normalized_slope();
    e.exists = e.q_squared > e.slope_term;
    return e;
}

/// Global minimum quantile portfolio. Throws ExistenceError carrying
/// (q_alpha^2, slope term) when the existence condition fails.
inline GmqPortfolio gmq_portfolio(const FrontierBasis& basis, const RiskSpec& spec) {
    detail::require_matching_estimator(basis, spec);
    const double q = risk_coefficient(spec, basis.dof);
    const double q2 = q * q;
    const double st = basis.normalized_slope();
    if (!(q2 > st)) {
        std::ostringstream os;
        os << "global minimum quantile portfolio does not exist: q_alpha^2 = " << q2
           << " must exceed " << (basis.bayesian ? "r^-1 s = " : "s = ") << st;
        throw ExistenceError(os.str(), q2, st);
    }
    const double root = std::sqrt(q2 - st);
    const double tf = basis.tail_factor();
    const double sqrt_v_gmv = std::sqrt(basis.gmv.variance);

    GmqPortfolio p;
    p.q_alpha = q;
    p.variance = q2 / (q2 - st) * basis.gmv.variance;
    p.ret = basis.gmv.ret + st / root * tf * sqrt_v_gmv;
    const double step = basis.bayesian ? sqrt_v_gmv * tf / (basis.r_scale * root)
                                       : sqrt_v_gmv / root;
    p.weights = basis.gmv.weights + step * basis.excess_direction;
    p.risk = -p.ret + q * tf * std::sqrt(p.variance);
    return p;
}

inline GmqPortfolio gmq_portfolio(const PosteriorParams& post, const RiskSpec& spec) {
    return gmq_portfolio(frontier_basis(post), spec);
}

inline GmqPortfolio gmq_portfolio(const MeanCov& mc, const RiskSpec& spec) {
    return gmq_portfolio(frontier_basis(mc, spec.estimator), spec);
}

/// Mean-quantile efficient frontier over a strictly increasing return grid:
/// Q(R) = q sqrt((R - R_GMV)^2 / slope + tf^2 V_GMV) - R, a hyperbola for s > 0.
/// The GMV point (R_GMV, Q(w_GMV)) lies on the curve but not at its minimum.
inline FrontierCurve frontier_mean_q(const FrontierBasis& basis, const RiskSpec& spec,
                                     const std::vector<double>& return_grid) {
    detail::require_matching_estimator(basis, spec);
    if (!(basis.gmv.slope > 0.0))
        throw DomainError("mean-quantile frontier is degenerate: slope is zero");
    for (std::size_t i = 1; i < return_grid.size(); ++i)
        if (!(return_grid[i - 1] < return_grid[i]))
            throw DomainError("return grid must be strictly increasing");

    const double q = risk_coefficient(spec, basis.dof);
    const double st = basis.normalized_slope();
    const double tf2 = basis.tail_factor() * basis.tail_factor();
    const double base = tf2 * basis.gmv.variance;

    FrontierCurve curve;
    curve.mode = FrontierMode::MeanQuantile;
    curve.estimator = basis.estimator;
    curve.points.reserve(return_grid.size());
    for (const double r : return_grid) {
        const double gap = r - basis.gmv.ret;
        curve.points.push_back({r, q * std::sqrt(gap * gap / st + base) - r});
    }
    curve.gmv_point = {basis.gmv.ret, q * std::sqrt(base) - basis.gmv.ret};
    return curve;
}

inline FrontierCurve frontier_mean_q(const PosteriorParams& post, const RiskSpec& spec,
                                     const std::vector<double>& return_grid) {
    return frontier_mean_q(frontier_basis(post), spec, return_grid);
}

inline FrontierCurve frontier_mean_q(const MeanCov& mc, const RiskSpec& spec,
                                     const std::vector<double>& return_grid) {
    return frontier_mean_q(frontier_basis(mc, spec.estimator), spec, return_grid);
}

/// Upper branch of the mean-variance frontier over a grid of variances
/// V >= V_GMV: R = R_GMV + sqrt(factor (V - V_GMV)), where the slope factor is
/// (d-2)/(d r) * s in Bayesian mode and s otherwise.
inline FrontierCurve frontier_mean_variance(const FrontierBasis& basis,
                                            const std::vector<double>& variance_grid) {
    const double factor = basis.bayesian
                              ? (basis.dof - 2.0) / (basis.dof * basis.r_scale) * basis.gmv.slope
                              : basis.gmv.slope;
    FrontierCurve curve;
    curve.mode = FrontierMode::MeanVariance;
    curve.estimator = basis.estimator;
    curve.points.reserve(variance_grid.size());
    for (const double v : variance_grid) {
        const double gap = v - basis.gmv.variance;
        if (gap < -1e-12 * std::max(1.0, basis.gmv.variance))
            throw DomainError("variance grid value below the GMV variance");
        curve.points.push_back({basis.gmv.ret + std::sqrt(factor * std::max(0.0, gap)), v});
    }
    curve.gmv_point = {basis.gmv.ret, basis.gmv.variance};
    return curve;
}

inline FrontierCurve frontier_mean_variance(const PosteriorParams& post,
                                            const std::vector<double>& variance_grid) {
    return frontier_mean_variance(frontier_basis(post), variance_grid);
}

inline FrontierCurve frontier_mean_variance(const MeanCov& mc,
                                            const std::vector<double>& variance_grid) {
    return frontier_mean_variance(frontier_basis(mc), variance_grid);
}

/// Display grid of `points` returns spanning [R_GMV, R_GMV + 4 sqrt(s V_GMV)];
/// presentation-only default used by the command-line frontend.
inline std::vector<double> default_return_grid(const FrontierBasis& basis, int points = 200) {
    if (points < 2) throw DomainError("return grid needs at least two points");
    const double span = 4.0 * std::sqrt(std::max(0.0, basis.gmv.slope * basis.gmv.variance));
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] =
            basis.gmv.ret + span * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

}  // namespace bqp
