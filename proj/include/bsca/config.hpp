#pragma once

// Run configuration: a single JSON document describing the data, variable
// roles, model space, engine and output location. Command-line flags
// override individual keys after parsing.

#include "bsca/dataset.hpp"
#include "bsca/modelspace.hpp"
#include "bsca/multiout.hpp"
#include "bsca/sca.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string_view>

namespace bsca {

struct RunConfig {
    std::filesystem::path data;
    std::filesystem::path output = "bsca_out";
    std::optional<std::uint64_t> seed;

    RoleConfig roles;
    DesignOptions design;
    SpacePolicy policy;
    AnalysisOptions analysis;
    std::size_t top_models = 100;
    bool partial_correlations = true;

    NullMethod sca_method = NullMethod::bootstrap;
    std::size_t sca_draws = 500;
    SpecGridOptions sca_grid;

    // Throws ErrorCode::config when no seed was given.
    std::uint64_t require_seed() const;
};

// Relative paths in the document resolve against base_dir.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Keys: data, out, seed, engine, iters, burnin, gamma, threshold, draws,
// method, sca_draws, top_models.
void apply_override(RunConfig& config, std::string_view key, std::string_view value);

// Fully resolved configuration, echoed into result files.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace bsca
