#pragma once

// Seeded Monte Carlo harness. Data-generating process, for i = 1..n:
//   x_i ~ N(0, I_J)
//   z_i ~ N(mean_j x_ij, 1)
//   y_i = B^T x_i + z_i + e_i,   e_i ~ N(0, Sigma)   (B is J x L)
// Every replicate draws from its own seed derived from (master seed, index).

#include "bsca/dataset.hpp"
#include "bsca/sca.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bsca {

struct SimScenario {
    std::string id;
    std::string label;
    std::size_t n = 1000;
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(1, 1);  // J x L
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(1, 1);
    std::size_t replicates = 100;
    std::uint64_t master_seed = 0;
    double gamma = 1.0;
    double threshold = 0.95;
    NullMethod sca_method = NullMethod::bootstrap;
    std::size_t sca_draws = 500;

    std::size_t J() const { return static_cast<std::size_t>(beta.rows()); }
    std::size_t L() const { return static_cast<std::size_t>(beta.cols()); }
    void validate() const;
};

// Preset ids: "1", "2", "3", "4", "5a" (GATE = 0), "5b" (GATE != 0).
SimScenario preset_scenario(std::string_view id, std::uint64_t master_seed);
// "all" -> every preset; "5" -> {"5a", "5b"}; anything else -> itself.
std::vector<std::string> expand_scenario_ids(std::string_view id);
// Custom scenario from a JSON document.
SimScenario parse_scenario_json(std::string_view text, std::uint64_t master_seed);

// Synthetic dataset: treatments x1..xJ (identity coding), control z,
// Gaussian outcomes y1..yL.
Dataset generate(const SimScenario& scenario, std::size_t replicate);

// Matrix square root used for correlated errors (symmetric, via eigendecomposition).
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& sigma);

struct EstimatorSummary {
    std::string scenario;
    std::string estimator;  // "BMA" or "SCA"
    std::string target;     // "ATE", "GATE", or a treatment name
    double truth = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double rejection_rate = 0.0;
    std::size_t replicates = 0;  // successful replicates
    std::size_t failed = 0;

    bool operator==(const EstimatorSummary&) const = default;
};

struct SimReport {
    std::vector<EstimatorSummary> rows;
    std::vector<std::string> scenario_labels;  // "id: label" per scenario run
    std::uint64_t master_seed = 0;
    double runtime_seconds = 0.0;
};

SimReport run_scenario(const SimScenario& scenario);
void append_report(SimReport& into, const SimReport& from);

// Lossless CSV (one row per estimator x target) and its inverse.
std::string report_csv(const SimReport& report);
std::vector<EstimatorSummary> parse_report_csv(std::string_view text);

// Fixed-width text tables: the bias/RMSE summary and per-coefficient tables.
// The runtime line is omitted when runtime_seconds is zero.
std::string report_text(const SimReport& report);

const EstimatorSummary* find_row(const SimReport& report, std::string_view scenario,
                                 std::string_view estimator, std::string_view target);

}  // namespace bsca
