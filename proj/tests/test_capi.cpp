// Exercises the library strictly through the public C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/bsca.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string fixture = BSCA_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bsca_capi_" + name);
    fs::remove_all(dir);
    return dir;
}

bsca_config* load(const std::string& file) {
    bsca_config* cfg = nullptr;
    REQUIRE(bsca_config_load((fixture + "/" + file).c_str(), &cfg) == BSCA_OK);
    REQUIRE(cfg != nullptr);
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(bsca_status_name(BSCA_OK)) == "ok");
    CHECK(std::string(bsca_status_name(BSCA_ERR_SEPARATION)) == "separation");
    CHECK(std::string(bsca_version()).size() > 0);
}

TEST_CASE("null arguments are rejected, not dereferenced") {
    bsca_config* cfg = nullptr;
    CHECK(bsca_config_load(nullptr, &cfg) == BSCA_ERR_INVALID_ARGUMENT);
    CHECK(bsca_config_parse("{}", nullptr, nullptr) == BSCA_ERR_INVALID_ARGUMENT);
    CHECK(bsca_run(nullptr, nullptr) == BSCA_ERR_INVALID_ARGUMENT);
    CHECK(std::string(bsca_last_error()).find("null") != std::string::npos);
    CHECK(bsca_result_file_count(nullptr) == 0);
    CHECK(bsca_result_file_name(nullptr, 0) == nullptr);
    bsca_result_free(nullptr);
    bsca_config_free(nullptr);
    bsca_sim_free(nullptr);
}

TEST_CASE("parse and config errors carry codes and a JSON record") {
    bsca_config* cfg = nullptr;
    CHECK(bsca_config_parse("{not json", "", &cfg) == BSCA_ERR_PARSE);
    CHECK(cfg == nullptr);
    CHECK(bsca_config_parse(R"({"colour": 1})", "", &cfg) == BSCA_ERR_CONFIG);
    char* record = bsca_error_json(BSCA_ERR_CONFIG, "run");
    REQUIRE(record != nullptr);
    const std::string text = record;
    bsca_string_free(record);
    CHECK(text.find("\"code\": \"config\"") != std::string::npos);
    CHECK(text.find("colour") != std::string::npos);

    REQUIRE(bsca_config_parse(R"({"outcomes": ["y"]})", "", &cfg) == BSCA_OK);
    CHECK(bsca_config_set(cfg, "threshold", "2") == BSCA_ERR_CONFIG);
    CHECK(bsca_config_set(cfg, "out", "somewhere") == BSCA_OK);
    CHECK(std::string(bsca_config_output_dir(cfg)) == "somewhere");
    bsca_config_free(cfg);
}

TEST_CASE("a missing seed is a configuration error") {
    bsca_config* cfg = nullptr;
    REQUIRE(bsca_config_parse(R"({"data": "survey.csv", "outcomes": ["wellbeing"], "treatments": ["bullied"]})",
                              fixture.c_str(), &cfg) == BSCA_OK);
    bsca_result* res = nullptr;
    CHECK(bsca_run(cfg, &res) == BSCA_ERR_CONFIG);
    CHECK(res == nullptr);
    bsca_config_free(cfg);
}

TEST_CASE("run, plot and summaries on the survey fixture") {
    bsca_config* cfg = load("survey_config.json");
    REQUIRE(bsca_config_set(cfg, "draws", "1000") == BSCA_OK);
    bsca_result* res = nullptr;
    REQUIRE(bsca_run(cfg, &res) == BSCA_OK);
    bsca_config_free(cfg);

    CHECK(bsca_result_error_count(res) == 0);
    CHECK(bsca_run_outcome_count(res) == 2);
    CHECK(bsca_run_treatment_count(res) == 2);
    bsca_summary s{};
    REQUIRE(bsca_run_treatment(res, 0, 1, &s) == BSCA_OK);
    CHECK(s.lower <= s.mean);
    CHECK(s.mean <= s.upper);
    CHECK(s.p_inclusion == 1.0);  // treatments are forced in
    CHECK(s.reject == 1);
    CHECK(bsca_run_treatment(res, 5, 0, &s) == BSCA_ERR_INVALID_ARGUMENT);
    CHECK(bsca_run_gate(res, &s) == BSCA_OK);

    bool have_models = false, have_coef = false;
    for (std::size_t i = 0; i < bsca_result_file_count(res); ++i) {
        const std::string name = bsca_result_file_name(res, i);
        have_models |= name == "models.csv";
        have_coef |= name == "coefficients.json";
    }
    CHECK(have_models);
    CHECK(have_coef);

    const auto dir = scratch("run");
    REQUIRE(bsca_result_write(res, dir.string().c_str()) == BSCA_OK);
    bsca_result_free(res);
    CHECK(fs::exists(dir / "models.csv"));
    CHECK(fs::exists(dir / "multi_outcome.svg"));

    const auto before = slurp(dir / "multi_outcome.svg");
    fs::remove(dir / "multi_outcome.svg");
    bsca_result* plotted = nullptr;
    REQUIRE(bsca_plot(dir.string().c_str(), &plotted) == BSCA_OK);
    REQUIRE(bsca_result_write(plotted, dir.string().c_str()) == BSCA_OK);
    bsca_result_free(plotted);
    CHECK(slurp(dir / "multi_outcome.svg") == before);

    bsca_result* nothing = nullptr;
    CHECK(bsca_plot((dir / "missing").string().c_str(), &nothing) != BSCA_OK);
    fs::remove_all(dir);
}

TEST_CASE("sca through the C API reports its method") {
    bsca_config* cfg = load("survey_config.json");
    REQUIRE(bsca_config_set(cfg, "sca_draws", "100") == BSCA_OK);
    REQUIRE(bsca_config_set(cfg, "method", "permutation") == BSCA_OK);
    bsca_result* res = nullptr;
    REQUIRE(bsca_sca(cfg, &res) == BSCA_OK);
    bsca_config_free(cfg);
    bsca_sca_summary sum{};
    REQUIRE(bsca_sca_test(res, &sum) == BSCA_OK);
    CHECK(sum.draws == 100);
    CHECK(sum.p_value > 0.0);
    CHECK(sum.p_value <= 1.0);
    for (std::size_t i = 0; i < bsca_result_file_count(res); ++i) {
        if (std::string(bsca_result_file_name(res, i)) != "sca_test.json") continue;
        const std::string body = bsca_result_file_contents(res, i, nullptr);
        CHECK(body.find("\"method\": \"permutation\"") != std::string::npos);
    }
    bsca_result_free(res);
}

TEST_CASE("simulation from a scenario file") {
    bsca_sim_options opt;
    bsca_sim_options_init(&opt);
    const std::string scenario = fixture + "/small_scenario.json";
    opt.scenario = scenario.c_str();
    bsca_sim_result* res = nullptr;
    CHECK(bsca_sim_run(&opt, &res) == BSCA_ERR_CONFIG);  // no seed
    opt.has_seed = 1;
    opt.seed = 42;
    REQUIRE(bsca_sim_run(&opt, &res) == BSCA_OK);
    REQUIRE(bsca_sim_row_count(res) == 3);  // GATE, x1, x2
    bsca_sim_row row{};
    REQUIRE(bsca_sim_row_at(res, 0, &row) == BSCA_OK);
    CHECK(std::string(row.target) == "GATE");
    CHECK(row.truth == doctest::Approx(0.25));
    CHECK(row.replicates + row.failed == 20);
    CHECK(bsca_sim_row_at(res, 9, &row) == BSCA_ERR_INVALID_ARGUMENT);
    CHECK(std::string(bsca_sim_tables(res)).find("GATE") != std::string::npos);

    const auto dir = scratch("sim");
    REQUIRE(bsca_sim_write(res, dir.string().c_str()) == BSCA_OK);
    CHECK(fs::exists(dir / "sim_report.csv"));
    bsca_sim_free(res);
    fs::remove_all(dir);
}
