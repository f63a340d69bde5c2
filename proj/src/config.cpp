#include "bsca/config.hpp"

#include "bsca/error.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace bsca {

using nlohmann::json;

std::uint64_t RunConfig::require_seed() const {
    if (!seed) fail(ErrorCode::config, "a seed is required (set \"seed\" in the config or pass --seed)");
    return *seed;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) fail(ErrorCode::config, where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(ErrorCode::config, "unknown key '" + key + "' in " + where);
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail(ErrorCode::config, where + " must be a list");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) fail(ErrorCode::config, where + " entries must be strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        fail(ErrorCode::config, "invalid value '" + std::string(value) + "' for " + std::string(key));
    return out;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"data", "output", "seed", "outcomes", "treatments", "controls", "subgroups", "model_space",
                "engine", "ebic_gamma", "threshold", "draws", "top_models", "sca", "partial_correlations"},
               "config");

    RunConfig cfg;
    try {
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
        };
        if (doc.contains("data")) cfg.data = resolve(doc["data"].get<std::string>());
        if (doc.contains("output")) cfg.output = resolve(doc["output"].get<std::string>());
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();

        for (const auto& o : doc.value("outcomes", json::array())) {
            if (o.is_string()) {
                cfg.roles.outcomes.push_back({o.get<std::string>(), Family::gaussian});
            } else {
                check_keys(o, {"name", "family"}, "outcome");
                cfg.roles.outcomes.push_back(
                    {o.at("name").get<std::string>(), parse_family(o.value("family", std::string("gaussian")))});
            }
        }
        for (const auto& t : doc.value("treatments", json::array())) {
            if (t.is_string()) {
                cfg.roles.treatments.push_back({t.get<std::string>(), TreatmentCoding::binary, 1.0});
            } else {
                check_keys(t, {"name", "coding", "max_report"}, "treatment");
                TreatmentSpec spec;
                spec.name = t.at("name").get<std::string>();
                spec.coding = parse_treatment_coding(t.value("coding", std::string("binary")));
                spec.max_report = t.value("max_report", 1.0);
                if (spec.coding == TreatmentCoding::continuous && !t.contains("max_report"))
                    fail(ErrorCode::config, "continuous treatment '" + spec.name + "' needs max_report");
                cfg.roles.treatments.push_back(spec);
            }
        }
        for (const auto& c : doc.value("controls", json::array())) {
            if (c.is_string()) {
                cfg.roles.controls.push_back({c.get<std::string>(), false});
            } else {
                check_keys(c, {"name", "categorical"}, "control");
                cfg.roles.controls.push_back({c.at("name").get<std::string>(), c.value("categorical", false)});
            }
        }
        if (doc.contains("subgroups")) cfg.roles.subgroups = string_list(doc["subgroups"], "subgroups");

        if (doc.contains("model_space")) {
            const auto& ms = doc["model_space"];
            check_keys(ms, {"interactions", "heredity", "treatments_forced", "forced", "free"}, "model_space");
            cfg.design.interactions = ms.value("interactions", true);
            const auto heredity = ms.value("heredity", std::string("strong"));
            if (heredity != "strong" && heredity != "none")
                fail(ErrorCode::config, "heredity must be \"strong\" or \"none\"");
            cfg.policy.strong_heredity = heredity == "strong";
            cfg.policy.treatments_forced = ms.value("treatments_forced", true);
            if (ms.contains("forced")) cfg.policy.forced = string_list(ms["forced"], "model_space.forced");
            if (ms.contains("free")) cfg.policy.free = string_list(ms["free"], "model_space.free");
        }
        if (doc.contains("engine")) {
            const auto& e = doc["engine"];
            if (e.is_string()) {
                cfg.analysis.engine = parse_engine(e.get<std::string>());
            } else {
                check_keys(e, {"type", "iterations", "burnin", "cap"}, "engine");
                cfg.analysis.engine = parse_engine(e.value("type", std::string("enumerate")));
                cfg.analysis.gibbs_iterations = e.value("iterations", cfg.analysis.gibbs_iterations);
                cfg.analysis.gibbs_burnin = e.value("burnin", cfg.analysis.gibbs_burnin);
                cfg.analysis.cap = e.value("cap", cfg.analysis.cap);
            }
        }
        cfg.analysis.gamma = doc.value("ebic_gamma", cfg.analysis.gamma);
        cfg.analysis.threshold = doc.value("threshold", cfg.analysis.threshold);
        cfg.analysis.draws = doc.value("draws", cfg.analysis.draws);
        cfg.top_models = doc.value("top_models", cfg.top_models);
        cfg.partial_correlations = doc.value("partial_correlations", cfg.partial_correlations);
        if (doc.contains("sca")) {
            const auto& s = doc["sca"];
            check_keys(s, {"method", "draws", "treatments", "subgroup_subsets", "max_specs"}, "sca");
            cfg.sca_method = parse_null_method(s.value("method", std::string("bootstrap")));
            cfg.sca_draws = s.value("draws", cfg.sca_draws);
            const auto mode = s.value("treatments", std::string("joint"));
            if (mode != "joint" && mode != "separate")
                fail(ErrorCode::config, "sca.treatments must be \"joint\" or \"separate\"");
            cfg.sca_grid.joint_treatments = mode == "joint";
            cfg.sca_grid.subgroup_subsets = s.value("subgroup_subsets", false);
            cfg.sca_grid.max_specs = s.value("max_specs", cfg.sca_grid.max_specs);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::config, std::string("config: ") + e.what());
    }

    if (cfg.analysis.threshold < 0.0 || cfg.analysis.threshold >= 1.0)
        fail(ErrorCode::config, "threshold must lie in [0, 1)");
    if (cfg.analysis.gamma < 0.0) fail(ErrorCode::config, "ebic_gamma must be >= 0");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

void apply_override(RunConfig& config, std::string_view key, std::string_view value) {
    if (key == "data") {
        config.data = std::string(value);
    } else if (key == "out") {
        config.output = std::string(value);
    } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "engine") {
        config.analysis.engine = parse_engine(value);
    } else if (key == "iters") {
        config.analysis.gibbs_iterations = parse_number<std::size_t>(key, value);
    } else if (key == "burnin") {
        config.analysis.gibbs_burnin = parse_number<std::size_t>(key, value);
    } else if (key == "gamma") {
        config.analysis.gamma = parse_number<double>(key, value);
        if (config.analysis.gamma < 0.0) fail(ErrorCode::config, "gamma must be >= 0");
    } else if (key == "threshold") {
        config.analysis.threshold = parse_number<double>(key, value);
        if (config.analysis.threshold < 0.0 || config.analysis.threshold >= 1.0)
            fail(ErrorCode::config, "threshold must lie in [0, 1)");
    } else if (key == "draws") {
        config.analysis.draws = parse_number<std::size_t>(key, value);
    } else if (key == "method") {
        config.sca_method = parse_null_method(value);
    } else if (key == "sca_draws") {
        config.sca_draws = parse_number<std::size_t>(key, value);
    } else if (key == "top_models") {
        config.top_models = parse_number<std::size_t>(key, value);
    } else {
        fail(ErrorCode::config, "unknown override key '" + std::string(key) + "'");
    }
}

json config_to_json(const RunConfig& c) {
    json j;
    j["data"] = c.data.generic_string();
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    for (const auto& o : c.roles.outcomes) j["outcomes"].push_back({{"name", o.name}, {"family", family_name(o.family)}});
    for (const auto& t : c.roles.treatments) {
        json e{{"name", t.name}, {"coding", treatment_coding_name(t.coding)}};
        if (t.coding == TreatmentCoding::continuous) e["max_report"] = t.max_report;
        j["treatments"].push_back(e);
    }
    j["controls"] = json::array();
    for (const auto& ctl : c.roles.controls) j["controls"].push_back({{"name", ctl.name}, {"categorical", ctl.categorical}});
    j["subgroups"] = c.roles.subgroups;
    j["model_space"] = {{"interactions", c.design.interactions},
                        {"heredity", c.policy.strong_heredity ? "strong" : "none"},
                        {"treatments_forced", c.policy.treatments_forced},
                        {"forced", c.policy.forced},
                        {"free", c.policy.free}};
    j["engine"] = {{"type", engine_name(c.analysis.engine)},
                   {"iterations", c.analysis.gibbs_iterations},
                   {"burnin", c.analysis.gibbs_burnin},
                   {"cap", c.analysis.cap}};
    j["ebic_gamma"] = c.analysis.gamma;
    j["threshold"] = c.analysis.threshold;
    j["draws"] = c.analysis.draws;
    j["top_models"] = c.top_models;
    j["partial_correlations"] = c.partial_correlations;
    j["sca"] = {{"method", null_method_name(c.sca_method)},
                {"draws", c.sca_draws},
                {"treatments", c.sca_grid.joint_treatments ? "joint" : "separate"},
                {"subgroup_subsets", c.sca_grid.subgroup_subsets},
                {"max_specs", c.sca_grid.max_specs}};
    return j;
}

}  // namespace bsca
