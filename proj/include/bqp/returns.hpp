#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <sstream>
#include <string>
#include <vector>

#include "bqp/errors.hpp"

namespace bqp {

/// Dated matrix of per-asset logarithmic returns. `values` is T x k with one
/// row per date and one column per asset.
struct ReturnSeries {
    std::vector<std::string> dates;   // ISO-8601, strictly increasing
    std::vector<std::string> assets;  // identifiers, length k
    Eigen::MatrixXd values;           // T x k log returns

    Eigen::Index periods() const { return values.rows(); }
    Eigen::Index asset_count() const { return values.cols(); }

    void validate() const {
        if (values.rows() < 1) throw DomainError("return series needs at least one row");
        if (static_cast<Eigen::Index>(dates.size()) != values.rows())
            throw DomainError("date count does not match row count");
        if (static_cast<Eigen::Index>(assets.size()) != values.cols())
            throw DomainError("asset count does not match column count");
        for (std::size_t i = 1; i < dates.size(); ++i) {
            if (!(dates[i - 1] < dates[i]))
                throw DomainError("dates must be strictly increasing (row " +
                                  std::to_string(i + 1) + ": " + dates[i] + ")");
        }
        if (!values.allFinite()) throw DomainError("return series contains non-finite values");
    }
};

enum class PriorKind { Jeffreys, Conjugate };

/// Prior on (mu, Sigma): either the diffuse Jeffreys prior or the conjugate
/// normal-inverse-Wishart prior with hyperparameters (m0, S0, r0, d0).
struct PriorSpec {
    PriorKind kind = PriorKind::Jeffreys;
    Eigen::VectorXd m0;  // prior mean belief
    Eigen::MatrixXd s0;  // prior scale matrix, symmetric PSD
    double r0 = 0.0;     // mean precision
    double d0 = 0.0;     // scale precision

    static PriorSpec jeffreys() { return {}; }

    static PriorSpec conjugate(Eigen::VectorXd m0, Eigen::MatrixXd s0, double r0, double d0) {
        if (!(r0 > 0.0)) throw DomainError("conjugate prior requires r0 > 0");
        if (!(d0 > 0.0)) throw DomainError("conjugate prior requires d0 > 0");
        if (s0.rows() != s0.cols() || s0.rows() != m0.size())
            throw DomainError("conjugate prior S0 must be k x k matching m0");
        if (!s0.isApprox(s0.transpose(), 1e-10))
            throw DomainError("conjugate prior S0 must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s0, Eigen::EigenvaluesOnly);
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() < -1e-12 * scale)
            throw DomainError("conjugate prior S0 must be positive semi-definite");
        PriorSpec p;
        p.kind = PriorKind::Conjugate;
        p.m0 = std::move(m0);
        p.s0 = std::move(s0);
        p.r0 = r0;
        p.d0 = d0;
        return p;
    }
};

/// The quadruple (d, r, xbar, S) that fully determines the posterior
/// predictive distribution of next-period returns under either prior:
/// w'X_next ~ t(dof, w'xbar, r_scale * w'Sw).
struct PosteriorParams {
    double dof = 0.0;         // d_{k,n}
    double r_scale = 0.0;     // r_{k,n}
    Eigen::VectorXd xbar;     // posterior predictive location
    Eigen::MatrixXd scatter;  // posterior scale matrix, symmetric PD
    Eigen::Index n = 0;       // sample size
    Eigen::Index k = 0;       // asset count
};

/// Element-wise ln(P_t / P_{t-1}) over a (T+1) x k matrix of positive prices.
inline Eigen::MatrixXd prices_to_log_returns(const Eigen::MatrixXd& prices) {
    if (prices.rows() < 2) throw DomainError("need at least two price rows");
    for (Eigen::Index t = 0; t < prices.rows(); ++t) {
        for (Eigen::Index i = 0; i < prices.cols(); ++i) {
            if (!(prices(t, i) > 0.0)) {
                std::ostringstream os;
                os << "non-positive price at row " << t + 1 << ", column " << i + 1;
                throw DomainError(os.str());
            }
        }
    }
    const Eigen::Index t_out = prices.rows() - 1;
    Eigen::MatrixXd out(t_out, prices.cols());
    for (Eigen::Index t = 0; t < t_out; ++t)
        out.row(t) = (prices.row(t + 1).array() / prices.row(t).array()).log();
    return out;
}

struct SufficientStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scatter;  // un-normalized sum of centered outer products
};

/// Sample mean and un-normalized scatter of an n x k window (n >= 2). The
/// scatter is kept unscaled; every downstream formula consumes it as is.
inline SufficientStats sufficient_statistics(const Eigen::MatrixXd& window) {
    const Eigen::Index n = window.rows();
    if (n < 2) throw InsufficientDataError("sufficient statistics need n >= 2 observations");
    SufficientStats st;
    st.mean = window.colwise().mean();
    const Eigen::MatrixXd centered = window.rowwise() - st.mean.transpose();
    st.scatter = centered.transpose() * centered;
    st.scatter = 0.5 * (st.scatter + st.scatter.transpose().eval());
    return st;
}

namespace detail {

/// Cholesky factorization that also rejects numerically rank-deficient
/// matrices (plain LLT can pass them with tiny positive pivots).
inline Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13))
        throw DegenerateDataError(std::string(what) + " is not positive definite");
    return llt;
}

inline void require_positive_definite(const Eigen::MatrixXd& m, const char* what) {
    checked_llt(m, what);
}

}  // namespace detail

/// Posterior predictive parameters for an n x k window under the given prior.
///
/// Jeffreys (needs n > k):   d = n - k,        r = (n+1) / (n (n-k))
/// Conjugate (n + d0 - 2k > 0): d = n + d0 - 2k, r = (n+r0+1) / ((n+r0)(n+d0-2k)),
/// with location and scale shrunk toward (m0, S0).
inline PosteriorParams posterior_params(const Eigen::MatrixXd& window, const PriorSpec& prior) {
    const Eigen::Index n = window.rows();
    const Eigen::Index k = window.cols();
    const SufficientStats st = sufficient_statistics(window);

    PosteriorParams post;
    post.n = n;
    post.k = k;
    if (prior.kind == PriorKind::Jeffreys) {
        if (!(n > k)) {
            std::ostringstream os;
            os << "Jeffreys posterior requires n > k (n=" << n << ", k=" << k << ")";
            throw ExistenceError(os.str(), static_cast<double>(n), static_cast<double>(k));
        }
        post.dof = static_cast<double>(n - k);
        post.r_scale = static_cast<double>(n + 1) / (static_cast<double>(n) * post.dof);
        post.xbar = st.mean;
        post.scatter = st.scatter;
    } else {
        if (prior.m0.size() != k || prior.s0.rows() != k)
            throw DomainError("conjugate prior dimension does not match the data");
        const double dof = static_cast<double>(n) + prior.d0 - 2.0 * static_cast<double>(k);
        if (!(dof > 0.0)) {
            std::ostringstream os;
            os << "conjugate posterior requires n + d0 - 2k > 0 (n=" << n << ", d0=" << prior.d0
               << ", k=" << k << ")";
            throw ExistenceError(os.str(), static_cast<double>(n) + prior.d0,
                                 2.0 * static_cast<double>(k));
        }
        const double nr = static_cast<double>(n) + prior.r0;
        post.dof = dof;
        post.r_scale = (nr + 1.0) / (nr * dof);
        post.xbar = (static_cast<double>(n) * st.mean + prior.r0 * prior.m0) / nr;
        const Eigen::VectorXd gap = prior.m0 - post.xbar;
        post.scatter = st.scatter + prior.s0 +
                       (static_cast<double>(n) * prior.r0 / nr) * (gap * gap.transpose());
        post.scatter = 0.5 * (post.scatter + post.scatter.transpose().eval());
    }
    detail::require_positive_definite(post.scatter, "posterior scale matrix");
    return post;
}

/// Conjugate hyperparameters from a training window by empirical Bayes:
/// r0 = d0 = n, m0 = sample mean, and S0 = (d0 - k - 1) * sample covariance so
/// the prior mean of Sigma equals the sample covariance.
inline PriorSpec empirical_bayes_hyperparams(const Eigen::MatrixXd& training) {
    const Eigen::Index n = training.rows();
    const Eigen::Index k = training.cols();
    if (n < k + 2)
        throw InsufficientDataError("empirical Bayes hyperparameters need n >= k + 2");
    const SufficientStats st = sufficient_statistics(training);
    const Eigen::MatrixXd sample_cov = st.scatter / static_cast<double>(n - 1);
    detail::require_positive_definite(sample_cov, "sample covariance");
    const double d0 = static_cast<double>(n);
    return PriorSpec::conjugate(st.mean, (d0 - static_cast<double>(k) - 1.0) * sample_cov,
                                static_cast<double>(n), d0);
}

}  // namespace bqp
