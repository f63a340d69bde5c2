#pragma once

// Orchestration behind the command-line subcommands. Each command computes
// its complete result in memory first; files are written by a single
// writer at the end so a failed run never leaves half an output set.

#include "bsca/config.hpp"
#include "bsca/error.hpp"
#include "bsca/sim.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsca {

// File name -> contents.
using FileSet = std::map<std::string, std::string>;

struct RunOutput {
    FileSet files;              // models.csv, coefficients.json and figures
    nlohmann::json summary;     // parsed coefficients.json
    std::vector<std::pair<ErrorCode, std::string>> outcome_errors;  // one per failed outcome
};

RunOutput cmd_run(const RunConfig& config);

struct ScaOutput {
    FileSet files;              // curve.csv, sca_test.json, sca.svg
    nlohmann::json report;      // parsed sca_test.json
};

ScaOutput cmd_sca(const RunConfig& config);

struct SimRequest {
    std::string scenario = "all";  // preset id, "5", "all", or path to a JSON scenario
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    std::optional<double> threshold;
    std::optional<NullMethod> method;
    std::optional<std::size_t> draws;  // SCA resampling draws
};

struct SimOutput {
    FileSet files;  // sim_report.csv, sim_tables.txt
    SimReport report;
};

SimOutput cmd_sim(const SimRequest& request);

// Re-renders every figure that the saved results in `dir` support.
FileSet cmd_plot(const std::filesystem::path& dir);

// Figures from the text of models.csv / coefficients.json, or curve.csv / sca_test.json.
FileSet render_run_figures(const std::string& models_csv, const std::string& coefficients_json,
                           std::size_t top_models);
FileSet render_sca_figure(const std::string& curve_csv, const std::string& sca_test_json);

void write_files(const std::filesystem::path& dir, const FileSet& files);

// Machine-readable error record.
nlohmann::json error_record(ErrorCode code, const std::string& message, const std::string& command);

}  // namespace bsca
