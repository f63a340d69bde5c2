#pragma once

// Maximum-likelihood fits for the two supported GLM families.

#include "bsca/dataset.hpp"

#include <Eigen/Dense>

#include <vector>

namespace bsca {

struct GlmFit {
    Family family = Family::gaussian;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;  // inverse observed information at the MLE
    double loglik = 0.0;
    double dispersion = 1.0;     // Gaussian: RSS / n; binomial: 1
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    bool converged = false;
    bool degenerate = false;     // Gaussian fit with zero residual variance
    int iterations = 0;

    Eigen::VectorXd standard_errors() const { return covariance.diagonal().cwiseSqrt(); }
};

struct LogisticOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 100;
    // Separation is declared once any |coefficient| exceeds this.
    double separation_threshold = 30.0;
};

GlmFit fit_gaussian(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);
GlmFit fit_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                    const LogisticOptions& options = {});
GlmFit fit_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, Family family);

// Model log-likelihood at arbitrary coefficients. The Gaussian variant
// profiles the variance at its conditional MLE, RSS(beta) / n.
double loglik_at(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& coefficients, Family family);

// Score vector X^T (y - p) of the logistic log-likelihood.
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& coefficients);

}  // namespace bsca
