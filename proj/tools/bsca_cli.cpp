// bsca command-line front end. Talks to the library only through bsca.h.
//
// Exit codes: 0 all outputs written, 2 usage or configuration error,
// 1 any other failure. Failures print a JSON error record on stderr and,
// when an output directory is known, also write it to <out>/error.json.

#include "bsca/bsca.h"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Flags {
    std::string config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string engine;
    std::optional<std::size_t> iters;
    std::optional<std::size_t> burnin;
    std::optional<double> gamma;
    std::optional<double> threshold;
    std::string scenario = "all";
    std::string method;
    std::optional<std::size_t> draws;
};

int exit_code(bsca_status s) {
    return s == BSCA_ERR_CONFIG || s == BSCA_ERR_INVALID_ARGUMENT ? 2 : 1;
}

int report_failure(bsca_status status, const std::string& command, const std::string& out_dir) {
    char* record = bsca_error_json(status, command.c_str());
    std::cerr << (record ? record : bsca_last_error());
    if (record && !out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        std::ofstream f(std::filesystem::path(out_dir) / "error.json", std::ios::binary | std::ios::trunc);
        f << record;
    }
    bsca_string_free(record);
    return exit_code(status);
}

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
        } else {
            out += c;
        }
    }
    return out + "\"";
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Loads --config and applies every flag that was given.
bsca_status build_config(const Flags& f, bool bma_draws, bsca_config** cfg) {
    bsca_status s = bsca_config_load(f.config.c_str(), cfg);
    if (s != BSCA_OK) return s;
    auto set = [&](const char* key, const std::string& value) {
        if (s == BSCA_OK) s = bsca_config_set(*cfg, key, value.c_str());
    };
    if (!f.data.empty()) set("data", f.data);
    if (!f.out.empty()) set("out", f.out);
    if (f.seed) set("seed", std::to_string(*f.seed));
    if (!f.engine.empty()) set("engine", f.engine);
    if (f.iters) set("iters", std::to_string(*f.iters));
    if (f.burnin) set("burnin", std::to_string(*f.burnin));
    if (f.gamma) set("gamma", exact(*f.gamma));
    if (f.threshold) set("threshold", exact(*f.threshold));
    if (!f.method.empty()) set("method", f.method);
    if (f.draws) set(bma_draws ? "draws" : "sca_draws", std::to_string(*f.draws));
    return s;
}

int run_or_sca(const Flags& f, bool is_run) {
    const std::string command = is_run ? "run" : "sca";
    if (f.config.empty()) {
        std::cerr << "{\n  \"error\": {\n    \"code\": \"config\",\n    \"command\": \"" << command
                  << "\",\n    \"message\": \"--config is required\",\n    \"status\": 1\n  }\n}\n";
        return 2;
    }
    bsca_config* cfg = nullptr;
    bsca_status s = build_config(f, is_run, &cfg);
    const std::string out_dir = cfg ? bsca_config_output_dir(cfg) : f.out;
    if (s != BSCA_OK) {
        bsca_config_free(cfg);
        return report_failure(s, command, out_dir);
    }
    bsca_result* result = nullptr;
    s = is_run ? bsca_run(cfg, &result) : bsca_sca(cfg, &result);
    bsca_config_free(cfg);
    if (s != BSCA_OK) return report_failure(s, command, out_dir);

    s = bsca_result_write(result, out_dir.c_str());
    if (s != BSCA_OK) {
        bsca_result_free(result);
        return report_failure(s, command, out_dir);
    }
    for (std::size_t i = 0; i < bsca_result_file_count(result); ++i)
        std::cout << "wrote " << (std::filesystem::path(out_dir) / bsca_result_file_name(result, i)).string() << '\n';

    int code = 0;
    const std::size_t errors = bsca_result_error_count(result);
    if (errors > 0) {
        // Some outcomes failed: outputs for the rest are written, the run still fails.
        std::ofstream e(std::filesystem::path(out_dir) / "error.json", std::ios::binary | std::ios::trunc);
        e << "{\n  \"error\": {\n    \"code\": \"outcome_failed\",\n    \"command\": \"run\",\n    \"messages\": [";
        for (std::size_t i = 0; i < errors; ++i) {
            const char* msg = nullptr;
            bsca_result_error(result, i, &msg);
            std::cerr << "outcome failed: " << msg << '\n';
            e << (i ? ", " : "") << json_string(msg);
        }
        e << "]\n  }\n}\n";
        code = 1;
    } else {
        std::error_code ec;  // a stale record from an earlier failure no longer applies
        std::filesystem::remove(std::filesystem::path(out_dir) / "error.json", ec);
    }
    if (!is_run) {
        bsca_sca_summary sum{};
        if (bsca_sca_test(result, &sum) == BSCA_OK)
            std::printf("median %.4f, p = %.4f, share significant %.3f, mean z %.3f (%zu estimates)\n", sum.median,
                        sum.p_value, sum.share_significant, sum.mean_z, sum.estimates);
    }
    bsca_result_free(result);
    return code;
}

int sim(const Flags& f) {
    const std::string out_dir = f.out.empty() ? "bsca_sim" : f.out;
    bsca_sim_options opts;
    bsca_sim_options_init(&opts);
    opts.scenario = f.scenario.c_str();
    if (f.seed) {
        opts.has_seed = 1;
        opts.seed = *f.seed;
    }
    if (f.gamma) opts.gamma = *f.gamma;
    if (f.threshold) opts.threshold = *f.threshold;
    if (!f.method.empty()) opts.method = f.method.c_str();
    if (f.draws) opts.draws = *f.draws;

    bsca_sim_result* result = nullptr;
    bsca_status s = bsca_sim_run(&opts, &result);
    if (s != BSCA_OK) return report_failure(s, "sim", out_dir);
    s = bsca_sim_write(result, out_dir.c_str());
    if (s != BSCA_OK) {
        bsca_sim_free(result);
        return report_failure(s, "sim", out_dir);
    }
    std::cout << bsca_sim_tables(result);
    bsca_sim_free(result);
    return 0;
}

int plot(const Flags& f) {
    const std::string dir = f.out.empty() ? "bsca_out" : f.out;
    bsca_result* result = nullptr;
    bsca_status s = bsca_plot(dir.c_str(), &result);
    if (s == BSCA_OK) s = bsca_result_write(result, dir.c_str());
    if (s != BSCA_OK) {
        bsca_result_free(result);
        return report_failure(s, "plot", {});
    }
    for (std::size_t i = 0; i < bsca_result_file_count(result); ++i)
        std::cout << "wrote " << (std::filesystem::path(dir) / bsca_result_file_name(result, i)).string() << '\n';
    bsca_result_free(result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian specification curve analysis"};
    app.set_version_flag("--version", bsca_version());
    app.require_subcommand(1);

    Flags f;
    auto analysis_flags = [&f](CLI::App* cmd) {
        cmd->add_option("--config", f.config, "run configuration (JSON)")->check(CLI::ExistingFile);
        cmd->add_option("--data", f.data, "CSV data, overrides the config");
        cmd->add_option("--out", f.out, "output directory");
        cmd->add_option("--seed", f.seed, "random seed");
        cmd->add_option("--engine", f.engine, "enumerate | gibbs");
        cmd->add_option("--iters", f.iters, "Gibbs sweeps after burn-in");
        cmd->add_option("--burnin", f.burnin, "Gibbs burn-in sweeps");
        cmd->add_option("--gamma", f.gamma, "EBIC gamma");
        cmd->add_option("--threshold", f.threshold, "inclusion-probability threshold of the test");
        cmd->add_option("--method", f.method, "SCA null: permutation | bootstrap");
    };

    auto* run = app.add_subcommand("run", "model averaging over the specification space");
    analysis_flags(run);
    run->add_option("--draws", f.draws, "posterior draws per coefficient");

    auto* sca = app.add_subcommand("sca", "classical specification curve and median test");
    analysis_flags(sca);
    sca->add_option("--draws", f.draws, "resampling draws for the median test");

    auto* simc = app.add_subcommand("sim", "Monte Carlo scenarios");
    simc->add_option("--scenario", f.scenario, "1..5, 5a, 5b, all, or a JSON scenario file");
    simc->add_option("--seed", f.seed, "master seed (required)");
    simc->add_option("--out", f.out, "output directory");
    simc->add_option("--gamma", f.gamma, "EBIC gamma");
    simc->add_option("--threshold", f.threshold, "inclusion-probability threshold");
    simc->add_option("--method", f.method, "SCA null: permutation | bootstrap");
    simc->add_option("--draws", f.draws, "SCA resampling draws");

    auto* plotc = app.add_subcommand("plot", "re-render figures from saved results");
    plotc->add_option("--out", f.out, "directory holding the saved results");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*run) return run_or_sca(f, true);
    if (*sca) return run_or_sca(f, false);
    if (*simc) return sim(f);
    return plot(f);
}
