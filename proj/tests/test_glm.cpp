#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/error.hpp"
#include "bsca/glm.hpp"
#include "bsca/parallel.hpp"

#include <cmath>
#include <random>

using namespace bsca;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& Z) {
    Eigen::MatrixXd X(Z.rows(), Z.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(Z.cols()) = Z;
    return X;
}

Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index n, Eigen::Index k) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd Z(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) Z(i, j) = N(rng);
    return with_intercept(Z);
}

}  // namespace

TEST_CASE("noiseless Gaussian fit is exact and flagged degenerate") {
    Rng rng(1);
    const auto X = gaussian_matrix(rng, 30, 3);
    Eigen::VectorXd beta(4);
    beta << 1.5, -2.0, 0.25, 3.0;
    const Eigen::VectorXd y = X * beta;
    const auto fit = fit_gaussian(y, X);
    CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.degenerate);
}

TEST_CASE("Gaussian MLE satisfies the normal equations") {
    Rng rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    const auto X = gaussian_matrix(rng, 200, 4);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y[i] = 0.5 * X(i, 1) - X(i, 3) + N(rng);
    const auto fit = fit_gaussian(y, X);
    const Eigen::VectorXd r = y - X * fit.coefficients;
    CHECK((X.transpose() * r).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.dispersion == doctest::Approx(r.squaredNorm() / 200.0));
    CHECK(fit.loglik == doctest::Approx(loglik_at(y, X, fit.coefficients, Family::gaussian)).epsilon(1e-12));

    Eigen::VectorXd moved = fit.coefficients;
    moved[2] += 0.01;
    CHECK(loglik_at(y, X, moved, Family::gaussian) < fit.loglik);
}

TEST_CASE("intercept-only fits") {
    Eigen::VectorXd y(10);
    y << 1, 1, 1, 0, 0, 0, 0, 0, 0, 0;
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(10, 1);
    CHECK(fit_gaussian(y, one).coefficients[0] == doctest::Approx(0.3));
    const auto logit = fit_logistic(y, one);
    CHECK(std::abs(logit.coefficients[0] - std::log(3.0 / 7.0)) < 1e-12);
    CHECK(logit.converged);
}

TEST_CASE("duplicated column is a singular design") {
    Rng rng(3);
    auto X = gaussian_matrix(rng, 20, 2);
    X.col(2) = X.col(1);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(20, 0, 1);
    try {
        fit_gaussian(y, X);
        FAIL("expected singular design");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_design);
    }
}

TEST_CASE("perfect separation is reported") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, -1, 1);
    Eigen::VectorXd y = (x.array() > 0).cast<double>();
    try {
        fit_logistic(y, with_intercept(x));
        FAIL("expected separation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::separation);
    }
}

TEST_CASE("logistic log-likelihood closed form") {
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    Eigen::MatrixXd X = with_intercept(Eigen::VectorXd::LinSpaced(4, -1, 1));
    CHECK(loglik_at(y, X, Eigen::VectorXd::Zero(2), Family::binomial) == doctest::Approx(4 * std::log(0.5)));
}

TEST_CASE("logistic gradient matches finite differences") {
    Rng rng(4);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 0.5);
    for (int t = 0; t < 10; ++t) {
        const auto X = gaussian_matrix(rng, 80, 3);
        Eigen::VectorXd y(80);
        for (Eigen::Index i = 0; i < 80; ++i) y[i] = U(rng) < 0.4 ? 1.0 : 0.0;
        Eigen::VectorXd b(4);
        for (auto& v : b) v = N(rng);
        const Eigen::VectorXd g = logistic_gradient(y, X, b);
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double h = 1e-6;
            Eigen::VectorXd up = b, dn = b;
            up[j] += h;
            dn[j] -= h;
            const double fd = (loglik_at(y, X, up, Family::binomial) - loglik_at(y, X, dn, Family::binomial)) / (2 * h);
            CHECK(std::abs(fd - g[j]) <= 1e-4 * std::max(1.0, std::abs(g[j])));
        }
    }
}

TEST_CASE("logistic MLE has zero score and slopes near zero under independence") {
    Rng rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto X = gaussian_matrix(rng, 5000, 2);
    Eigen::VectorXd y(5000);
    for (Eigen::Index i = 0; i < 5000; ++i) y[i] = U(rng) < 0.3 ? 1.0 : 0.0;
    const auto fit = fit_logistic(y, X);
    CHECK(logistic_gradient(y, X, fit.coefficients).cwiseAbs().maxCoeff() < 1e-6);
    const auto se = fit.standard_errors();
    for (Eigen::Index j = 1; j < 3; ++j) CHECK(std::abs(fit.coefficients[j]) < 3 * se[j]);
}
