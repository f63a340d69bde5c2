#pragma once

// Bayesian model averaging over scored models.
//
// The posterior of a coefficient (or of a fixed linear combination of
// coefficients) is a mixture: a point mass at zero carrying the weight of
// the models that exclude it, plus one Gaussian per including model centred
// at that model's MLE with its observed-information variance.

#include "bsca/modelspace.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bsca {

struct MixtureComponent {
    double weight = 0.0;
    double mean = 0.0;
    double sd = 0.0;
};

struct BmaPosterior {
    std::string label;
    double inclusion = 0.0;   // P(effect != 0 | y)
    double point_mass = 1.0;  // weight of the atom at zero, 1 - inclusion
    std::vector<MixtureComponent> components;
    double mean = 0.0;
    double sd = 0.0;
    double level = 0.95;
    double lower = 0.0;       // equal-tailed interval from the draws
    double upper = 0.0;
    bool interval_degenerate = false;  // inclusion < 0.025, reported as [0, 0]
    std::vector<double> draws;         // sorted ascending

    double quantile(double q) const;
};

struct DrawOptions {
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
    double level = 0.95;
};

// sum_i coefficient_i * theta[column_i] over design columns.
using LinearCombination = std::vector<std::pair<int, double>>;

BmaPosterior aggregate(const std::vector<ScoredModel>& models, int column,
                       const DrawOptions& options = {});

BmaPosterior aggregate_linear(const std::vector<ScoredModel>& models,
                              const LinearCombination& combination,
                              const DrawOptions& options = {});

// Builds a posterior from an explicit mixture (used by derived measures).
BmaPosterior posterior_from_mixture(std::vector<MixtureComponent> components,
                                    const DrawOptions& options);

struct TestDecision {
    bool reject = false;
    double inclusion = 0.0;
    double threshold = 0.95;
};

// Rejects "effect = 0" iff the inclusion probability strictly exceeds threshold.
TestDecision test_nonzero(const BmaPosterior& posterior, double threshold = 0.95);

// Posterior of beta_j + delta_j^T g for treatment index j of the design.
BmaPosterior subgroup_effect(const std::vector<ScoredModel>& models, const CodedDesign& design,
                             std::size_t treatment, const Eigen::VectorXd& g,
                             const DrawOptions& options = {});

struct OddsRatioSummary {
    double point = 1.0;      // exp(posterior mean of the log-odds ratio)
    double lower = 1.0;
    double upper = 1.0;
    double draw_mean = 1.0;  // posterior mean of exp(effect)
};

OddsRatioSummary report_odds_ratios(const BmaPosterior& posterior, Family family);

}  // namespace bsca
