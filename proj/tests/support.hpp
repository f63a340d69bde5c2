#pragma once

// Shared fixtures for the unit and acceptance tests.

#include "bsca/dataset.hpp"
#include "bsca/parallel.hpp"

#include <random>
#include <string>

namespace bsca::testing {

struct Shape {
    int J = 1;  // binary treatments
    int L = 1;  // Gaussian outcomes
    int Q = 1;  // continuous controls
    int K = 0;  // subgroups
};

// Random Gaussian-outcome dataset: x1..xJ in {0,1}, z1..zQ ~ N(0,1) correlated
// with the treatments, g1..gK in {0,1}, y1..yL linear in all of them plus noise.
inline Dataset random_dataset(Rng& rng, const Shape& s, std::size_t n) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    RoleConfig roles;
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> cols;
    const auto rows = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd x(rows, s.J);
    for (int j = 0; j < s.J; ++j) {
        const double p = 0.3 + 0.4 * U(rng);
        for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = U(rng) < p ? 1.0 : 0.0;
        // Guarantee both levels.
        x(0, j) = 0.0;
        x(1, j) = 1.0;
        roles.treatments.push_back({"x" + std::to_string(j + 1), TreatmentCoding::binary, 1.0});
        names.push_back("x" + std::to_string(j + 1));
        cols.push_back(x.col(j));
    }
    Eigen::MatrixXd z(rows, s.Q);
    for (int q = 0; q < s.Q; ++q) {
        for (Eigen::Index i = 0; i < rows; ++i) z(i, q) = N(rng) + (s.J > 0 ? 0.5 * x(i, q % s.J) : 0.0);
        roles.controls.push_back({"z" + std::to_string(q + 1), false});
        names.push_back("z" + std::to_string(q + 1));
        cols.push_back(z.col(q));
    }
    Eigen::MatrixXd g(rows, s.K);
    for (int k = 0; k < s.K; ++k) {
        const double p = 0.3 + 0.4 * U(rng);
        for (Eigen::Index i = 0; i < rows; ++i) g(i, k) = U(rng) < p ? 1.0 : 0.0;
        g(0, k) = 0.0;
        g(1, k) = 1.0;
        roles.subgroups.push_back("g" + std::to_string(k + 1));
        names.push_back("g" + std::to_string(k + 1));
        cols.push_back(g.col(k));
    }
    for (int l = 0; l < s.L; ++l) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            double v = N(rng);
            for (int j = 0; j < s.J; ++j) v += 0.3 * (j + l % 3) * x(i, j);
            for (int q = 0; q < s.Q; ++q) v += 0.4 * z(i, q);
            for (int k = 0; k < s.K; ++k) v += 0.2 * g(i, k) + 0.3 * g(i, k) * (s.J > 0 ? x(i, 0) : 0.0);
            y[i] = v;
        }
        roles.outcomes.push_back({"y" + std::to_string(l + 1), Family::gaussian});
        names.push_back("y" + std::to_string(l + 1));
        cols.push_back(y);
    }
    return Dataset(roles, names, cols);
}

}  // namespace bsca::testing
