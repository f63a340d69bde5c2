#include "bsca/glm.hpp"

#include "bsca/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace bsca {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 * pi)

void check_shape(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    if (y.size() != X.rows())
        fail(ErrorCode::invalid_argument, "response has " + std::to_string(y.size()) +
                                              " rows, design has " + std::to_string(X.rows()));
    if (X.rows() <= X.cols())
        fail(ErrorCode::insufficient_data, "need more observations (" + std::to_string(X.rows()) +
                                               ") than coefficients (" + std::to_string(X.cols()) + ")");
}

void check_rank(const Eigen::MatrixXd& X) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols())
        fail(ErrorCode::singular_design, "design matrix is rank deficient (rank " +
                                             std::to_string(qr.rank()) + " of " +
                                             std::to_string(X.cols()) + ")");
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logistic_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
    return ll;
}

double gaussian_loglik(double rss, Eigen::Index n) {
    const double nn = static_cast<double>(n);
    return -0.5 * nn * (kLog2Pi + std::log(rss / nn) + 1.0);
}

}  // namespace

GlmFit fit_gaussian(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    check_shape(y, X);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols())
        fail(ErrorCode::singular_design, "design matrix is rank deficient (rank " +
                                             std::to_string(qr.rank()) + " of " +
                                             std::to_string(X.cols()) + ")");

    GlmFit fit;
    fit.family = Family::gaussian;
    fit.n = X.rows();
    fit.k = X.cols();
    fit.coefficients = qr.solve(y);
    const double rss = (y - X * fit.coefficients).squaredNorm();
    fit.dispersion = rss / static_cast<double>(fit.n);
    fit.converged = true;
    fit.iterations = 1;

    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    if (rss <= 1e-24 * std::max(1.0, y.squaredNorm())) {
        fit.degenerate = true;
        fit.dispersion = 0.0;
        fit.loglik = std::numeric_limits<double>::infinity();
        fit.covariance = Eigen::MatrixXd::Zero(X.cols(), X.cols());
        return fit;
    }
    fit.covariance = fit.dispersion * xtx_inv;
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    fit.loglik = gaussian_loglik(rss, fit.n);
    return fit;
}

GlmFit fit_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                    const LogisticOptions& options) {
    check_shape(y, X);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
            fail(ErrorCode::domain, "logistic response must be 0/1");
    check_rank(X);

    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double ll = logistic_loglik(y, eta);
    std::vector<double> trace;

    GlmFit fit;
    fit.family = Family::binomial;
    fit.n = n;
    fit.k = k;

    for (int it = 0; it <= options.max_iterations; ++it) {
        Eigen::VectorXd p = eta.unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd grad = X.transpose() * (y - p);
        const double gmax = grad.lpNorm<Eigen::Infinity>();
        trace.push_back(gmax);
        if (gmax < options.gradient_tolerance) {
            fit.converged = true;
            fit.iterations = it;
            break;
        }
        if (it == options.max_iterations) break;

        Eigen::VectorXd w = p.cwiseProduct(Eigen::VectorXd::Ones(n) - p);
        Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-300)
            fail(ErrorCode::separation, "information matrix became singular (fitted probabilities saturated)");
        Eigen::VectorXd step = ldlt.solve(grad);

        // Step-halving until the log-likelihood does not decrease.
        double t = 1.0;
        Eigen::VectorXd candidate;
        Eigen::VectorXd eta_c;
        double ll_c = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < 40; ++h) {
            candidate = beta + t * step;
            eta_c = X * candidate;
            ll_c = logistic_loglik(y, eta_c);
            if (ll_c >= ll - 1e-12 * std::abs(ll)) break;
            t *= 0.5;
        }
        beta = candidate;
        eta = eta_c;
        ll = ll_c;
        if (beta.lpNorm<Eigen::Infinity>() > options.separation_threshold)
            fail(ErrorCode::separation, "coefficient magnitude exceeded " +
                                            std::to_string(options.separation_threshold) +
                                            " (complete or quasi-complete separation)");
    }

    if (!fit.converged) {
        std::ostringstream msg;
        msg << "logistic fit did not converge in " << options.max_iterations
            << " iterations; gradient max-norm trace:";
        const std::size_t from = trace.size() > 10 ? trace.size() - 10 : 0;
        for (std::size_t i = from; i < trace.size(); ++i) msg << ' ' << trace[i];
        fail(ErrorCode::nonconvergence, msg.str());
    }

    Eigen::VectorXd p = eta.unaryExpr([](double v) { return sigmoid(v); });
    Eigen::VectorXd w = p.cwiseProduct(Eigen::VectorXd::Ones(n) - p);
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    fit.coefficients = beta;
    fit.covariance = H.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    fit.loglik = ll;
    fit.dispersion = 1.0;
    return fit;
}

GlmFit fit_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, Family family) {
    return family == Family::gaussian ? fit_gaussian(y, X) : fit_logistic(y, X);
}

double loglik_at(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& coefficients, Family family) {
    if (y.size() != X.rows() || coefficients.size() != X.cols())
        fail(ErrorCode::invalid_argument, "dimension mismatch in loglik_at");
    const Eigen::VectorXd eta = X * coefficients;
    if (family == Family::binomial) return logistic_loglik(y, eta);
    return gaussian_loglik((y - eta).squaredNorm(), X.rows());
}

Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& coefficients) {
    const Eigen::VectorXd p = (X * coefficients).unaryExpr([](double v) { return sigmoid(v); });
    return X.transpose() * (y - p);
}

}  // namespace bsca
