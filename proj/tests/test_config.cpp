#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/config.hpp"
#include "bsca/error.hpp"

#include <string>

using namespace bsca;

namespace {

ErrorCode parse_code(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::internal;
}

}  // namespace

TEST_CASE("fixture config loads with paths relative to the file") {
    const std::string dir = BSCA_FIXTURE_DIR;
    const auto cfg = load_run_config(dir + "/survey_config.json");
    CHECK(cfg.data == std::filesystem::path(dir) / "survey.csv");
    CHECK(cfg.seed == std::uint64_t{2024});
    REQUIRE(cfg.roles.treatments.size() == 2);
    CHECK(cfg.roles.treatments[0].coding == TreatmentCoding::continuous);
    CHECK(cfg.roles.treatments[0].max_report == 7.0);
    CHECK(cfg.roles.controls[2].categorical);
    CHECK(cfg.roles.subgroups == std::vector<std::string>{"female"});
    CHECK(cfg.analysis.draws == 4000);
    CHECK(cfg.sca_method == NullMethod::bootstrap);
    CHECK(cfg.sca_draws == 200);
}

TEST_CASE("short forms and defaults") {
    const auto cfg = parse_run_config(R"({"outcomes": ["y"], "treatments": ["x"], "controls": ["z"],
                                          "engine": "gibbs"})");
    CHECK(cfg.roles.outcomes[0].family == Family::gaussian);
    CHECK(cfg.roles.treatments[0].coding == TreatmentCoding::binary);
    CHECK(cfg.analysis.engine == Engine::gibbs);
    CHECK(cfg.analysis.gamma == 1.0);
    CHECK(cfg.analysis.threshold == 0.95);
    CHECK_FALSE(cfg.seed.has_value());
    CHECK_THROWS_AS(cfg.require_seed(), Error);
}

TEST_CASE("malformed documents") {
    CHECK(parse_code("{") == ErrorCode::parse);
    CHECK(parse_code(R"({"colour": 1})") == ErrorCode::config);
    CHECK(parse_code(R"({"model_space": {"heredity": "weak"}})") == ErrorCode::config);
    CHECK(parse_code(R"({"treatments": [{"name": "h", "coding": "continuous"}]})") == ErrorCode::config);
    CHECK(parse_code(R"({"threshold": 1.0})") == ErrorCode::config);
    CHECK(parse_code(R"({"ebic_gamma": -1})") == ErrorCode::config);
    CHECK(parse_code(R"({"seed": "abc"})") == ErrorCode::config);
    CHECK(parse_code(R"({"sca": {"method": "jackknife"}})") == ErrorCode::config);
}

TEST_CASE("overrides") {
    auto cfg = parse_run_config(R"({"seed": 1})");
    apply_override(cfg, "seed", "99");
    apply_override(cfg, "engine", "gibbs");
    apply_override(cfg, "iters", "500");
    apply_override(cfg, "burnin", "50");
    apply_override(cfg, "gamma", "0.5");
    apply_override(cfg, "threshold", "0.9");
    apply_override(cfg, "method", "permutation");
    apply_override(cfg, "sca_draws", "300");
    apply_override(cfg, "out", "elsewhere");
    CHECK(cfg.seed == std::uint64_t{99});
    CHECK(cfg.analysis.engine == Engine::gibbs);
    CHECK(cfg.analysis.gibbs_iterations == 500);
    CHECK(cfg.analysis.gibbs_burnin == 50);
    CHECK(cfg.analysis.gamma == 0.5);
    CHECK(cfg.analysis.threshold == 0.9);
    CHECK(cfg.sca_method == NullMethod::permutation);
    CHECK(cfg.sca_draws == 300);
    CHECK(cfg.output == "elsewhere");
    CHECK_THROWS_AS(apply_override(cfg, "iters", "12x"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "threshold", "1.5"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "colour", "red"), Error);
}

TEST_CASE("config echo is stable and leaves out the output directory") {
    const auto a = parse_run_config(R"({"seed": 3, "output": "one", "outcomes": ["y"]})");
    const auto b = parse_run_config(R"({"seed": 3, "output": "two", "outcomes": ["y"]})");
    CHECK(config_to_json(a).dump() == config_to_json(b).dump());
    CHECK_FALSE(config_to_json(a).contains("output"));
}
