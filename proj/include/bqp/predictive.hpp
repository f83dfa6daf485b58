#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "bqp/errors.hpp"
#include "bqp/returns.hpp"
#include "bqp/rng.hpp"

namespace bqp {

namespace detail {

inline void require_weights_sum_to_one(const Eigen::VectorXd& w) {
    if (std::fabs(w.sum() - 1.0) > 1e-12)
        throw DomainError("portfolio weights must sum to 1 (within 1e-12)");
}

}  // namespace detail

/// Posterior predictive mean and variance of the portfolio return. The
/// variance is d * scale / (d - 2) and is absent when dof <= 2.
struct PredictiveSummary {
    double mean = 0.0;
    std::optional<double> variance;
    double dof = 0.0;
    double scale = 0.0;  // r * w'Sw
};

/// Moments of w'X_next under the posterior predictive law: mean w'xbar
/// (needs dof > 1) and variance d r (w'Sw) / (d - 2) (needs dof > 2).
inline PredictiveSummary predictive_moments(const PosteriorParams& post,
                                            const Eigen::VectorXd& w) {
    if (w.size() != post.k) throw DomainError("weight vector length does not match asset count");
    detail::require_weights_sum_to_one(w);
    if (!(post.dof > 1.0))
        throw DomainError("posterior predictive mean requires dof > 1");
    PredictiveSummary s;
    s.dof = post.dof;
    s.mean = w.dot(post.xbar);
    s.scale = post.r_scale * w.dot(post.scatter * w);
    if (post.dof > 2.0) s.variance = post.dof * s.scale / (post.dof - 2.0);
    return s;
}

/// Draws of the predictive portfolio return via the stochastic representation
/// w'xbar + tau * sqrt(r w'Sw) with tau ~ t(dof).
inline std::vector<double> sample_predictive_return(const PosteriorParams& post,
                                                    const Eigen::VectorXd& w, SeededRng& rng,
                                                    std::size_t count) {
    if (w.size() != post.k) throw DomainError("weight vector length does not match asset count");
    detail::require_weights_sum_to_one(w);
    if (count < 1) throw DomainError("draw count must be at least 1");
    const double loc = w.dot(post.xbar);
    const double width = std::sqrt(post.r_scale * w.dot(post.scatter * w));
    std::vector<double> out(count);
    for (auto& x : out) x = loc + rng.student_t(post.dof) * width;
    return out;
}

/// Multivariate-t sampler for the predictive asset-return vector: draws
/// xbar + sqrt(r) * L z * sqrt(d / chi^2_d) with L the lower Cholesky factor
/// of S. Factors once; reusable across draws.
class PredictiveVectorSampler {
public:
    explicit PredictiveVectorSampler(const PosteriorParams& post)
        : dof_(post.dof), sqrt_r_(std::sqrt(post.r_scale)), xbar_(post.xbar) {
        chol_ = detail::checked_llt(post.scatter, "posterior scale matrix").matrixL();
    }

    Eigen::VectorXd operator()(SeededRng& rng) const {
        Eigen::VectorXd z(xbar_.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        const double mix = std::sqrt(dof_ / rng.chi_squared(dof_));
        return xbar_ + (sqrt_r_ * mix) * (chol_ * z);
    }

private:
    double dof_;
    double sqrt_r_;
    Eigen::VectorXd xbar_;
    Eigen::MatrixXd chol_;
};

/// One draw from the k-variate predictive distribution t_k(d, xbar, r S).
inline Eigen::VectorXd sample_predictive_vector(const PosteriorParams& post, SeededRng& rng) {
    return PredictiveVectorSampler(post)(rng);
}

/// Draws of z = tau1 / sqrt(v d) + sqrt(1 + tau1^2 / d) tau2 / sqrt(d + 1)
/// with independent tau1 ~ t(d), tau2 ~ t(d+1). Distributed as a t(d) scaled
/// by sqrt((v+1) / (v d)).
inline std::vector<double> lemma1_sample(double dof, double v, SeededRng& rng,
                                         std::size_t count) {
    if (!(dof > 0.0)) throw DomainError("lemma1_sample requires dof > 0");
    if (!(v > 0.0)) throw DomainError("lemma1_sample requires v > 0");
    std::vector<double> out(count);
    const double inv_sqrt_vd = 1.0 / std::sqrt(v * dof);
    const double inv_sqrt_d1 = 1.0 / std::sqrt(dof + 1.0);
    for (auto& x : out) {
        const double t1 = rng.student_t(dof);
        const double t2 = rng.student_t(dof + 1.0);
        x = t1 * inv_sqrt_vd + std::sqrt(1.0 + t1 * t1 / dof) * t2 * inv_sqrt_d1;
    }
    return out;
}

}  // namespace bqp
