#pragma once

// The single-outcome BSCA pipeline and its multiple-outcome extensions:
// per-outcome summary tables, global average treatment effects through the
// mean-outcome regression, and partial correlations.

#include "bsca/bma.hpp"
#include "bsca/error.hpp"
#include "bsca/modelspace.hpp"

#include <string>
#include <vector>

namespace bsca {

struct AnalysisOptions {
    Engine engine = Engine::enumerate;
    double gamma = 1.0;
    std::uint64_t cap = 4096;
    std::size_t gibbs_iterations = 20000;
    std::size_t gibbs_burnin = 1000;
    double threshold = 0.95;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
    bool subgroup_effects = true;
};

struct SubgroupEffect {
    std::string treatment;
    std::string subgroup;
    bool members = true;
    BmaPosterior posterior;
};

struct OutcomeAnalysis {
    std::string outcome;
    Family family = Family::gaussian;
    ExploreResult explored;
    std::vector<BmaPosterior> coefficients;  // one per design column
    std::vector<TestDecision> tests;         // aligned with coefficients
    std::vector<double> block_inclusion;     // one per free block
    std::vector<SubgroupEffect> subgroup_effects;
};

ExploreResult explore(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                      const AnalysisOptions& options);

OutcomeAnalysis analyze_outcome(const ModelSpace& space, const Eigen::VectorXd& y,
                                const std::string& outcome, Family family,
                                const AnalysisOptions& options);

struct OutcomeCell {
    std::string outcome;
    bool ok = false;
    ErrorCode code = ErrorCode::internal;  // meaningful when !ok
    std::string error;
    OutcomeAnalysis analysis;
};

// Runs the single-outcome pipeline for every outcome of the dataset. A failure
// in one outcome is recorded in its cell and does not stop the others.
std::vector<OutcomeCell> per_outcome_summary(const Dataset& data, const ModelSpace& space,
                                             const AnalysisOptions& options);

inline constexpr const char* kGateCaveat =
    "GATE weights every outcome equally; correlated outcomes dominate it. "
    "Per treatment-outcome summaries are the primary result.";

struct GateResult {
    std::vector<std::string> treatments;
    std::vector<std::string> outcomes;
    OutcomeAnalysis mean_outcome;             // BMA fit on m_i = mean_l y_il
    std::vector<BmaPosterior> gate_treatment; // GATE_j, one per treatment
    BmaPosterior gate;                        // (1/J) sum_j GATE_j
    TestDecision gate_test;
    // Average over outcomes of the per-outcome BMA means (filled when the
    // per-outcome cells are supplied), reported next to GATE_j.
    std::vector<double> averaged_outcome_means;
    std::string caveat = kGateCaveat;
};

GateResult gate(const Dataset& data, const ModelSpace& space, const AnalysisOptions& options,
                const std::vector<OutcomeCell>* per_outcome = nullptr);

// Ordinary least squares per response column versus on the row mean.
struct MeanOutcomeIdentity {
    Eigen::MatrixXd per_outcome;           // p x L coefficients
    Eigen::VectorXd averaged;              // row means of per_outcome
    Eigen::VectorXd mean_outcome;          // coefficients of the mean response
    double max_abs_difference = 0.0;
};

MeanOutcomeIdentity mean_outcome_identity(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X);

struct PartialCorrelation {
    std::string treatment;
    BmaPosterior posterior;
    double residual_variance_x = 0.0;  // var(x_j | y, x_-j, z) estimate
    std::size_t bound_violations = 0;  // draws with |rho| > 1 (not clamped)
    std::string sign_convention = "sign of the regression coefficient (residual correlation)";
};

PartialCorrelation partial_correlation(const ModelSpace& space, const OutcomeAnalysis& analysis,
                                       const Eigen::VectorXd& y, std::size_t treatment,
                                       const DrawOptions& options);

}  // namespace bsca
