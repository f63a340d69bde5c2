#include "bsca/bsca.h"

#include "bsca/commands.hpp"
#include "bsca/config.hpp"
#include "bsca/error.hpp"

#include <cstdlib>
#include <cstring>
#include <new>

using bsca::ErrorCode;

struct bsca_config {
    bsca::RunConfig config;
    std::string output_dir;
};

struct bsca_result {
    std::vector<std::pair<std::string, std::string>> files;
    nlohmann::json summary;
    std::vector<std::string> errors;
};

struct bsca_sim_result {
    bsca::SimOutput output;
    std::string tables;
};

namespace {

thread_local std::string last_error;

bsca_status to_status(ErrorCode c) { return static_cast<bsca_status>(static_cast<int>(c)); }

// Runs `body`, translating exceptions into status codes.
template <typename F>
bsca_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return BSCA_OK;
    } catch (const bsca::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return BSCA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return BSCA_ERR_INTERNAL;
    }
}

bsca_status null_argument(const char* what) {
    last_error = std::string("null argument: ") + what;
    return BSCA_ERR_INVALID_ARGUMENT;
}

bsca_result* make_result(bsca::FileSet files, nlohmann::json summary) {
    auto* r = new bsca_result;
    for (auto& [name, contents] : files) r->files.emplace_back(name, std::move(contents));
    r->summary = std::move(summary);
    return r;
}

bsca::FileSet file_set(const bsca_result* r) {
    bsca::FileSet out;
    for (const auto& [name, contents] : r->files) out[name] = contents;
    return out;
}

bsca_summary summary_of(const nlohmann::json& j) {
    bsca_summary s{};
    s.mean = j.value("mean", 0.0);
    s.lower = j.value("lower", 0.0);
    s.upper = j.value("upper", 0.0);
    s.p_inclusion = j.value("p_inclusion", 0.0);
    s.reject = j.value("reject", false) ? 1 : 0;
    return s;
}

}  // namespace

extern "C" {

const char* bsca_version(void) { return "0.1.0"; }

const char* bsca_status_name(bsca_status status) {
    if (status == BSCA_OK) return "ok";
    return bsca::error_code_name(static_cast<ErrorCode>(status));
}

const char* bsca_last_error(void) { return last_error.c_str(); }

char* bsca_error_json(bsca_status status, const char* command) {
    const auto doc = bsca::error_record(static_cast<ErrorCode>(status), last_error, command ? command : "");
    const std::string text = doc.dump(2) + "\n";
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void bsca_string_free(char* s) { std::free(s); }

bsca_status bsca_config_load(const char* path, bsca_config** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto* c = new bsca_config{bsca::load_run_config(path), {}};
        c->output_dir = c->config.output.string();
        *out = c;
    });
}

bsca_status bsca_config_parse(const char* json_text, const char* base_dir, bsca_config** out) {
    if (!json_text) return null_argument("json_text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto* c = new bsca_config{bsca::parse_run_config(json_text, base_dir ? base_dir : ""), {}};
        c->output_dir = c->config.output.string();
        *out = c;
    });
}

bsca_status bsca_config_set(bsca_config* config, const char* key, const char* value) {
    if (!config) return null_argument("config");
    if (!key) return null_argument("key");
    if (!value) return null_argument("value");
    return guarded([&] {
        bsca::apply_override(config->config, key, value);
        config->output_dir = config->config.output.string();
    });
}

const char* bsca_config_output_dir(const bsca_config* config) {
    return config ? config->output_dir.c_str() : "";
}

void bsca_config_free(bsca_config* config) { delete config; }

bsca_status bsca_run(const bsca_config* config, bsca_result** out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto run = bsca::cmd_run(config->config);
        auto* r = make_result(std::move(run.files), std::move(run.summary));
        for (const auto& [code, msg] : run.outcome_errors)
            r->errors.push_back(std::string(bsca::error_code_name(code)) + ": " + msg);
        *out = r;
    });
}

bsca_status bsca_sca(const bsca_config* config, bsca_result** out) {
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto sca = bsca::cmd_sca(config->config);
        *out = make_result(std::move(sca.files), std::move(sca.report));
    });
}

bsca_status bsca_plot(const char* results_dir, bsca_result** out) {
    if (!results_dir) return null_argument("results_dir");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = make_result(bsca::cmd_plot(results_dir), nlohmann::json::object()); });
}

size_t bsca_result_file_count(const bsca_result* result) { return result ? result->files.size() : 0; }

const char* bsca_result_file_name(const bsca_result* result, size_t index) {
    if (!result || index >= result->files.size()) return nullptr;
    return result->files[index].first.c_str();
}

const char* bsca_result_file_contents(const bsca_result* result, size_t index, size_t* length) {
    if (!result || index >= result->files.size()) return nullptr;
    if (length) *length = result->files[index].second.size();
    return result->files[index].second.c_str();
}

bsca_status bsca_result_write(const bsca_result* result, const char* dir) {
    if (!result) return null_argument("result");
    if (!dir) return null_argument("dir");
    return guarded([&] { bsca::write_files(dir, file_set(result)); });
}

size_t bsca_result_error_count(const bsca_result* result) { return result ? result->errors.size() : 0; }

bsca_status bsca_result_error(const bsca_result* result, size_t index, const char** message) {
    if (!result) return null_argument("result");
    if (!message) return null_argument("message");
    if (index >= result->errors.size()) {
        last_error = "error index out of range";
        return BSCA_ERR_INVALID_ARGUMENT;
    }
    *message = result->errors[index].c_str();
    return BSCA_OK;
}

void bsca_result_free(bsca_result* result) { delete result; }

size_t bsca_run_outcome_count(const bsca_result* result) {
    if (!result || !result->summary.contains("outcomes")) return 0;
    return result->summary["outcomes"].size();
}

size_t bsca_run_treatment_count(const bsca_result* result) {
    if (!result || !result->summary.contains("design")) return 0;
    for (const auto& o : result->summary["outcomes"])
        if (o.value("ok", false)) return o["treatments"].size();
    return 0;
}

bsca_status bsca_run_treatment(const bsca_result* result, size_t outcome, size_t treatment, bsca_summary* out) {
    if (!result) return null_argument("result");
    if (!out) return null_argument("out");
    return guarded([&] {
        if (outcome >= bsca_run_outcome_count(result)) bsca::fail(ErrorCode::invalid_argument, "outcome out of range");
        const auto& o = result->summary["outcomes"][outcome];
        if (!o.value("ok", false))
            bsca::fail(ErrorCode::invalid_argument, "outcome failed: " + o.value("error", std::string()));
        if (treatment >= o["treatments"].size()) bsca::fail(ErrorCode::invalid_argument, "treatment out of range");
        *out = summary_of(o["treatments"][treatment]);
    });
}

bsca_status bsca_run_gate(const bsca_result* result, bsca_summary* out) {
    if (!result) return null_argument("result");
    if (!out) return null_argument("out");
    return guarded([&] {
        if (!result->summary.contains("gate") || !result->summary["gate"].is_object())
            bsca::fail(ErrorCode::invalid_argument, "GATE was not computed for this run");
        *out = summary_of(result->summary["gate"]["gate"]);
    });
}

bsca_status bsca_sca_test(const bsca_result* result, bsca_sca_summary* out) {
    if (!result) return null_argument("result");
    if (!out) return null_argument("out");
    return guarded([&] {
        const auto& j = result->summary;
        if (!j.contains("median")) bsca::fail(ErrorCode::invalid_argument, "not an sca result");
        out->median = j.value("median", 0.0);
        out->p_value = j.value("p_value", 1.0);
        out->share_significant = j.value("share_significant", 0.0);
        out->mean_z = j.value("mean_z", 0.0);
        out->estimates = j.value("estimates", std::size_t{0});
        out->draws = j.value("draws", std::size_t{0});
    });
}

void bsca_sim_options_init(bsca_sim_options* options) {
    if (!options) return;
    options->scenario = nullptr;
    options->has_seed = 0;
    options->seed = 0;
    options->gamma = -1.0;
    options->threshold = -1.0;
    options->method = nullptr;
    options->draws = 0;
}

bsca_status bsca_sim_run(const bsca_sim_options* options, bsca_sim_result** out) {
    if (!options) return null_argument("options");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        bsca::SimRequest req;
        if (options->scenario) req.scenario = options->scenario;
        if (options->has_seed) req.seed = options->seed;
        if (options->gamma >= 0.0) req.gamma = options->gamma;
        if (options->threshold >= 0.0) req.threshold = options->threshold;
        if (options->method) req.method = bsca::parse_null_method(options->method);
        if (options->draws > 0) req.draws = options->draws;
        auto* r = new bsca_sim_result{bsca::cmd_sim(req), {}};
        r->tables = bsca::report_text(r->output.report);
        *out = r;
    });
}

size_t bsca_sim_row_count(const bsca_sim_result* result) { return result ? result->output.report.rows.size() : 0; }

bsca_status bsca_sim_row_at(const bsca_sim_result* result, size_t index, bsca_sim_row* out) {
    if (!result) return null_argument("result");
    if (!out) return null_argument("out");
    if (index >= result->output.report.rows.size()) {
        last_error = "row index out of range";
        return BSCA_ERR_INVALID_ARGUMENT;
    }
    const auto& r = result->output.report.rows[index];
    out->scenario = r.scenario.c_str();
    out->estimator = r.estimator.c_str();
    out->target = r.target.c_str();
    out->truth = r.truth;
    out->bias = r.bias;
    out->rmse = r.rmse;
    out->rejection_rate = r.rejection_rate;
    out->replicates = r.replicates;
    out->failed = r.failed;
    return BSCA_OK;
}

double bsca_sim_runtime_seconds(const bsca_sim_result* result) {
    return result ? result->output.report.runtime_seconds : 0.0;
}

const char* bsca_sim_tables(const bsca_sim_result* result) { return result ? result->tables.c_str() : ""; }

bsca_status bsca_sim_write(const bsca_sim_result* result, const char* dir) {
    if (!result) return null_argument("result");
    if (!dir) return null_argument("dir");
    return guarded([&] { bsca::write_files(dir, result->output.files); });
}

void bsca_sim_free(bsca_sim_result* result) { delete result; }

}  // extern "C"
