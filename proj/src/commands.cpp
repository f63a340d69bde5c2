#include "bsca/commands.hpp"

#include "bsca/multiout.hpp"
#include "bsca/parallel.hpp"
#include "bsca/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace bsca {

using nlohmann::json;

namespace {

constexpr std::size_t kDensityBins = 80;

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Continuous part of the mixture evaluated at bin centres.
json density_json(const BmaPosterior& p) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& c : p.components) {
        if (c.weight <= 0 || !(c.sd > 0)) continue;
        lo = any ? std::min(lo, c.mean - 4 * c.sd) : c.mean - 4 * c.sd;
        hi = any ? std::max(hi, c.mean + 4 * c.sd) : c.mean + 4 * c.sd;
        any = true;
    }
    json d{{"edges", json::array()}, {"values", json::array()}, {"point_mass", p.point_mass}};
    if (!any) return d;
    const double step = (hi - lo) / static_cast<double>(kDensityBins);
    for (std::size_t b = 0; b <= kDensityBins; ++b) d["edges"].push_back(lo + step * static_cast<double>(b));
    for (std::size_t b = 0; b < kDensityBins; ++b) {
        const double x = lo + step * (static_cast<double>(b) + 0.5);
        double v = 0.0;
        for (const auto& c : p.components) {
            if (c.weight <= 0 || !(c.sd > 0)) continue;
            const double z = (x - c.mean) / c.sd;
            v += c.weight * std::exp(-0.5 * z * z) / (c.sd * std::sqrt(2.0 * M_PI));
        }
        d["values"].push_back(v);
    }
    return d;
}

json posterior_json(const BmaPosterior& p, double threshold) {
    return {{"label", p.label},
            {"mean", p.mean},
            {"sd", p.sd},
            {"level", p.level},
            {"lower", p.lower},
            {"upper", p.upper},
            {"p_inclusion", p.inclusion},
            {"point_mass", p.point_mass},
            {"reject", p.inclusion > threshold},
            {"interval_degenerate", p.interval_degenerate}};
}

std::string engine_label(const ExploreResult& e) {
    std::ostringstream s;
    if (e.engine == Engine::enumerate) {
        s << "enumeration of " << e.models.size() << " models";
    } else {
        s << "Gibbs sampling, " << e.iterations << " sweeps after " << e.burnin << " burn-in, " << e.models.size()
          << " distinct models visited (approximate)";
    }
    return s.str();
}

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

// Blocks shown in models.csv and the inclusion grid: everything but the intercept.
std::vector<int> reported_blocks(const CodedDesign& d) {
    std::vector<int> out;
    for (std::size_t b = 0; b < d.blocks.size(); ++b)
        if (d.blocks[b].kind != BlockKind::intercept) out.push_back(static_cast<int>(b));
    return out;
}

std::string models_csv(const std::vector<OutcomeCell>& cells, const ModelSpace& space) {
    const auto& d = space.design();
    const auto blocks = reported_blocks(d);
    std::ostringstream out;
    out << "outcome,engine,rank,model_id,ebic,weight,visits";
    for (int b : blocks) out << ',' << csv_escape("in:" + d.blocks[static_cast<std::size_t>(b)].name);
    for (std::size_t j = 0; j < d.treatment_columns.size(); ++j)
        out << ',' << csv_escape("est:" + d.treatment_names[j]) << ',' << csv_escape("se:" + d.treatment_names[j]);
    out << '\n';
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        const auto& e = cell.analysis.explored;
        for (std::size_t r = 0; r < e.models.size(); ++r) {
            const auto& m = e.models[r];
            out << csv_escape(cell.outcome) << ',' << engine_name(e.engine) << ',' << r + 1 << ',' << m.id << ','
                << fmt(m.ebic) << ',' << fmt(m.weight) << ',' << m.visits;
            for (int b : blocks) out << ',' << (space.includes_block(m.id, b) ? 1 : 0);
            const Eigen::VectorXd se = m.valid ? m.fit.standard_errors() : Eigen::VectorXd();
            for (int col : d.treatment_columns) {
                const int pos = m.position(col);
                if (pos < 0 || !m.valid) {
                    out << ",,";
                } else {
                    out << ',' << fmt(m.fit.coefficients[pos]) << ',' << fmt(se[pos]);
                }
            }
            out << '\n';
        }
    }
    return out.str();
}

json outcome_json(const OutcomeCell& cell, const RunConfig& cfg, const ModelSpace& space) {
    const auto& d = space.design();
    json o{{"outcome", cell.outcome}, {"ok", cell.ok}};
    if (!cell.ok) {
        o["error"] = cell.error;
        return o;
    }
    const auto& a = cell.analysis;
    const double thr = cfg.analysis.threshold;
    o["family"] = family_name(a.family);
    o["engine"] = engine_name(a.explored.engine);
    o["engine_label"] = engine_label(a.explored);
    o["models_explored"] = a.explored.models.size();
    o["warnings"] = a.explored.warnings;

    json incl = json::object();
    for (int f = 0; f < space.free_count(); ++f)
        incl[d.blocks[static_cast<std::size_t>(space.free_blocks()[static_cast<std::size_t>(f)])].name] =
            a.block_inclusion[static_cast<std::size_t>(f)];
    o["block_inclusion"] = incl;
    if (!a.explored.visit_inclusion.empty()) {
        json v = json::object();
        for (int f = 0; f < space.free_count(); ++f)
            v[d.blocks[static_cast<std::size_t>(space.free_blocks()[static_cast<std::size_t>(f)])].name] =
                a.explored.visit_inclusion[static_cast<std::size_t>(f)];
        o["visit_frequency"] = v;
    }

    o["treatments"] = json::array();
    for (std::size_t j = 0; j < d.treatment_columns.size(); ++j) {
        const auto col = static_cast<std::size_t>(d.treatment_columns[j]);
        const auto& p = a.coefficients[col];
        json t = posterior_json(p, thr);
        t["treatment"] = d.treatment_names[j];
        t["density"] = density_json(p);
        for (const auto& spec : cfg.roles.treatments)
            if (spec.name == d.treatment_names[j] && spec.coding == TreatmentCoding::continuous)
                t["per_raw_unit"] = {{"mean", p.mean / spec.max_report},
                                     {"lower", p.lower / spec.max_report},
                                     {"upper", p.upper / spec.max_report},
                                     {"max_report", spec.max_report}};
        if (a.family == Family::binomial) {
            const auto orr = report_odds_ratios(p, a.family);
            t["odds_ratio"] = {{"point", orr.point},
                               {"lower", orr.lower},
                               {"upper", orr.upper},
                               {"draw_mean", orr.draw_mean}};
        }
        o["treatments"].push_back(t);
    }

    o["coefficients"] = json::array();
    for (std::size_t c = 0; c < a.coefficients.size(); ++c) {
        json e = posterior_json(a.coefficients[c], thr);
        e["column"] = d.column_names[c];
        e["block"] = d.blocks[static_cast<std::size_t>(d.column_block[c])].name;
        const double scale = d.column_scale[c];
        if (scale != 1.0 && scale > 0.0)
            e["raw_scale"] = {{"mean", a.coefficients[c].mean / scale},
                              {"lower", a.coefficients[c].lower / scale},
                              {"upper", a.coefficients[c].upper / scale}};
        if (a.family == Family::binomial) {
            const auto orr = report_odds_ratios(a.coefficients[c], a.family);
            e["odds_ratio"] = {{"point", orr.point}, {"lower", orr.lower}, {"upper", orr.upper}};
        }
        o["coefficients"].push_back(e);
    }

    o["subgroup_effects"] = json::array();
    for (const auto& s : a.subgroup_effects) {
        json e = posterior_json(s.posterior, thr);
        e["treatment"] = s.treatment;
        e["subgroup"] = s.subgroup;
        e["members"] = s.members;
        if (a.family == Family::binomial) {
            const auto orr = report_odds_ratios(s.posterior, a.family);
            e["odds_ratio"] = {{"point", orr.point}, {"lower", orr.lower}, {"upper", orr.upper}};
        }
        o["subgroup_effects"].push_back(e);
    }
    return o;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double to_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::parse, "not a number: '" + s + "'");
    }
}

std::vector<double> doubles(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.is_number() ? v.get<double>() : 0.0);
    return out;
}

svg::ForestRow forest_row(const std::string& label, const json& p) {
    return {label, p.value("mean", 0.0), p.value("lower", 0.0), p.value("upper", 0.0), p.value("reject", false)};
}

}  // namespace

RunOutput cmd_run(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.require_seed();
    if (cfg.data.empty()) fail(ErrorCode::config, "no data file given");
    const Dataset data = load_csv(cfg.data, cfg.roles);
    const CodedDesign design = build_design(data, cfg.design);
    const ModelSpace space(design, cfg.policy);

    AnalysisOptions opts = cfg.analysis;
    opts.seed = seed;
    const auto cells = per_outcome_summary(data, space, opts);

    json doc;
    doc["config"] = config_to_json(cfg);
    doc["n"] = data.n();
    doc["rows_dropped"] = data.rows_dropped();
    doc["design"]["columns"] = design.column_names;
    doc["design"]["blocks"] = json::array();
    for (std::size_t b = 0; b < design.blocks.size(); ++b)
        doc["design"]["blocks"].push_back(
            {{"name", design.blocks[b].name},
             {"kind", block_kind_name(design.blocks[b].kind)},
             {"inclusion", space.inclusion(static_cast<int>(b)) == Inclusion::forced ? "forced" : "free"}});
    doc["design"]["models_in_space"] = space.count_valid(cfg.analysis.cap);

    bool moderated = false;
    for (const auto& b : design.blocks)
        moderated = moderated || b.kind == BlockKind::interaction || b.kind == BlockKind::subgroup_main;
    if (cfg.partial_correlations && moderated)
        doc["partial_correlations_skipped"] = "partial correlations are defined without subgroup terms";

    RunOutput out;
    doc["outcomes"] = json::array();
    for (std::size_t l = 0; l < cells.size(); ++l) {
        const auto& cell = cells[l];
        json o = outcome_json(cell, cfg, space);
        if (!cell.ok) out.outcome_errors.emplace_back(cell.code, cell.outcome + ": " + cell.error);
        if (cell.ok && cfg.partial_correlations && !moderated && cell.analysis.family == Family::gaussian) {
            o["partial_correlations"] = json::array();
            for (std::size_t j = 0; j < design.treatment_columns.size(); ++j) {
                const DrawOptions d{cfg.analysis.draws, derive_seed(seed, 50'000 + l * 1000 + j), 0.95};
                try {
                    const auto pc = partial_correlation(space, cell.analysis, data.column(cell.outcome), j, d);
                    json e = posterior_json(pc.posterior, cfg.analysis.threshold);
                    e["treatment"] = pc.treatment;
                    e["residual_variance_x"] = pc.residual_variance_x;
                    e["bound_violations"] = pc.bound_violations;
                    e["sign_convention"] = pc.sign_convention;
                    o["partial_correlations"].push_back(e);
                } catch (const Error& err) {
                    o["partial_correlations"].push_back(
                        {{"treatment", design.treatment_names[j]}, {"error", err.what()}});
                }
            }
        }
        doc["outcomes"].push_back(o);
    }

    const auto& outcomes = data.roles().outcomes;
    bool all_gaussian = true;
    for (const auto& o : outcomes) all_gaussian = all_gaussian && o.family == Family::gaussian;
    doc["gate"] = nullptr;
    if (outcomes.size() > 1 && all_gaussian) {
        AnalysisOptions g = opts;
        g.seed = derive_seed(seed, 90'000);
        const auto r = gate(data, space, g, &cells);
        json gj;
        gj["outcomes"] = r.outcomes;
        gj["engine_label"] = engine_label(r.mean_outcome.explored);
        gj["gate"] = posterior_json(r.gate, cfg.analysis.threshold);
        gj["gate"]["density"] = density_json(r.gate);
        gj["per_treatment"] = json::array();
        for (std::size_t j = 0; j < r.gate_treatment.size(); ++j) {
            json e = posterior_json(r.gate_treatment[j], cfg.analysis.threshold);
            e["treatment"] = r.treatments[j];
            if (j < r.averaged_outcome_means.size())
                e["average_of_outcome_means"] = r.averaged_outcome_means[j];
            gj["per_treatment"].push_back(e);
        }
        gj["caveat"] = r.caveat;
        doc["gate"] = gj;
    } else if (outcomes.size() > 1) {
        doc["gate_skipped"] = "GATE needs every outcome to be Gaussian";
    }

    out.files["models.csv"] = models_csv(cells, space);
    out.files["coefficients.json"] = doc.dump(2) + "\n";
    out.summary = std::move(doc);
    auto figures = render_run_figures(out.files["models.csv"], out.files["coefficients.json"], cfg.top_models);
    out.files.merge(figures);
    return out;
}

FileSet render_run_figures(const std::string& models_text, const std::string& coefficients_text,
                           std::size_t top_models) {
    json doc;
    try {
        doc = json::parse(coefficients_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("coefficients.json: ") + e.what());
    }
    if (top_models == 0) top_models = doc.value("/config/top_models"_json_pointer, std::size_t{100});

    const auto rows = parse_csv_rows(models_text);
    if (rows.empty()) fail(ErrorCode::parse, "models.csv is empty");
    const auto& header = rows.front();
    std::vector<std::size_t> block_idx;
    std::vector<std::string> block_names;
    std::vector<std::pair<std::size_t, std::size_t>> est_idx;  // (estimate, se) columns
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].rfind("in:", 0) == 0) {
            block_idx.push_back(c);
            block_names.push_back(header[c].substr(3));
        } else if (header[c].rfind("est:", 0) == 0 && c + 1 < header.size()) {
            est_idx.emplace_back(c, c + 1);
        }
    }

    FileSet files;
    const auto& outcomes = doc.at("outcomes");
    std::size_t ok_outcomes = 0;
    for (const auto& o : outcomes) ok_outcomes += o.value("ok", false) ? 1 : 0;

    for (const auto& o : outcomes) {
        if (!o.value("ok", false)) continue;
        const std::string name = o.at("outcome").get<std::string>();
        svg::SingleOutcomeFigure fig;
        fig.title = "Outcome " + name + " (" + o.value("engine_label", std::string()) + ")";
        fig.block_names = block_names;
        for (const auto& t : o.at("treatments")) {
            svg::DensitySeries s;
            s.label = t.at("treatment").get<std::string>();
            s.edges = doubles(t.at("density").at("edges"));
            s.density = doubles(t.at("density").at("values"));
            s.point_mass = t.value("point_mass", 0.0);
            s.mean = t.value("mean", 0.0);
            s.lower = t.value("lower", 0.0);
            s.upper = t.value("upper", 0.0);
            fig.series.push_back(std::move(s));
        }
        for (std::size_t r = 1; r < rows.size() && fig.models.size() < top_models; ++r) {
            const auto& row = rows[r];
            if (row.size() != header.size() || row[0] != name) continue;
            svg::ModelPoint m;
            m.rank = fig.models.size() + 1;
            m.weight = to_double(row[5]);
            for (auto c : block_idx) m.blocks.push_back(row[c] == "1");
            for (auto [e, s] : est_idx) {
                m.estimate.push_back(row[e].empty() ? std::nullopt : std::optional<double>(to_double(row[e])));
                m.se.push_back(row[s].empty() ? std::nullopt : std::optional<double>(to_double(row[s])));
            }
            fig.models.push_back(std::move(m));
        }
        const std::string file = ok_outcomes == 1 ? "single_outcome.svg" : "single_outcome_" + slug(name) + ".svg";
        files[file] = svg::single_outcome(fig);
    }

    if (outcomes.size() > 1) {
        std::vector<svg::ForestPanel> panels;
        const json& gate = doc.contains("gate") ? doc["gate"] : json();
        for (const auto& o : outcomes) {
            if (!o.value("ok", false)) continue;
            for (const auto& t : o.at("treatments")) {
                const auto tname = t.at("treatment").get<std::string>();
                auto it = std::find_if(panels.begin(), panels.end(),
                                       [&](const svg::ForestPanel& p) { return p.title == tname; });
                if (it == panels.end()) {
                    panels.push_back({tname, {}, std::nullopt, {}});
                    it = panels.end() - 1;
                    if (gate.is_object())
                        for (const auto& g : gate.at("per_treatment"))
                            if (g.at("treatment") == tname) {
                                it->reference = g.value("mean", 0.0);
                                it->reference_label = "GATE " + tname;
                            }
                }
                it->rows.push_back(forest_row(o.at("outcome").get<std::string>(), t));
            }
        }
        std::string caption;
        if (gate.is_object()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "GATE %.3g [%.3g, %.3g], P(GATE != 0) %.3g. ",
                          gate["gate"].value("mean", 0.0), gate["gate"].value("lower", 0.0),
                          gate["gate"].value("upper", 0.0), gate["gate"].value("p_inclusion", 0.0));
            caption = buf + gate.value("caveat", std::string());
        }
        files["multi_outcome.svg"] = svg::forest("Treatment effects by outcome", panels, caption);
    }

    std::vector<svg::ForestPanel> sub_panels;
    for (const auto& o : outcomes) {
        if (!o.value("ok", false) || !o.contains("subgroup_effects") || o["subgroup_effects"].empty()) continue;
        const auto oname = o.at("outcome").get<std::string>();
        for (const auto& t : o.at("treatments")) {
            svg::ForestPanel panel;
            panel.title = t.at("treatment").get<std::string>() + " on " + oname;
            panel.reference = t.value("mean", 0.0);
            panel.reference_label = "ATE";
            for (const auto& s : o["subgroup_effects"]) {
                if (s.at("treatment") != t.at("treatment")) continue;
                const std::string label =
                    (s.value("members", true) ? "" : "not ") + s.at("subgroup").get<std::string>();
                panel.rows.push_back(forest_row(label, s));
            }
            if (!panel.rows.empty()) sub_panels.push_back(std::move(panel));
        }
    }
    if (!sub_panels.empty()) files["subgroup.svg"] = svg::forest("Treatment effects by subgroup", sub_panels);
    return files;
}

ScaOutput cmd_sca(const RunConfig& cfg) {
    if (cfg.data.empty()) fail(ErrorCode::config, "no data file given");
    const std::uint64_t seed = cfg.require_seed();
    const Dataset data = load_csv(cfg.data, cfg.roles);
    DesignOptions dopts = cfg.design;
    dopts.interactions = false;  // the classical curve uses main effects only
    const CodedDesign design = build_design(data, dopts);
    const auto specs = enumerate_specs(data, design, cfg.sca_grid);
    const SpecCurve curve = run_curve(specs, data, design);
    const MedianTestResult test =
        median_test(curve, data, design, MedianTestOptions{cfg.sca_method, cfg.sca_draws, seed});

    std::vector<std::string> indicators;
    for (const auto& t : design.treatment_names) indicators.push_back("treatment:" + t);
    std::vector<int> control_blocks;
    for (std::size_t b = 0; b < design.blocks.size(); ++b)
        if (design.blocks[b].kind == BlockKind::control) {
            control_blocks.push_back(static_cast<int>(b));
            indicators.push_back("control:" + design.blocks[b].name);
        }
    if (cfg.sca_grid.subgroup_subsets)
        for (const auto& g : design.subgroup_names) {
            indicators.push_back("subset:" + g);
            indicators.push_back("subset:not " + g);
        }
    if (data.roles().outcomes.size() > 1)
        for (const auto& o : data.roles().outcomes) indicators.push_back("outcome:" + o.name);

    std::ostringstream csv;
    csv << "rank,spec,label,outcome,treatment,subset,estimate,se,z,p_value,significant";
    for (const auto& i : indicators) csv << ',' << csv_escape(i);
    csv << '\n';
    for (std::size_t r = 0; r < curve.entries.size(); ++r) {
        const auto& e = curve.entries[r];
        const auto& s = curve.specs[e.spec];
        std::string subset = "all";
        if (s.subset >= 0)
            subset = (s.subset_members ? "" : "not ") + design.subgroup_names[static_cast<std::size_t>(s.subset)];
        csv << r + 1 << ',' << e.spec << ',' << csv_escape(spec_label(s, design)) << ',' << csv_escape(s.outcome)
            << ',' << csv_escape(e.treatment) << ',' << csv_escape(subset) << ',' << fmt(e.estimate) << ','
            << fmt(e.se) << ',' << fmt(e.z) << ',' << fmt(e.p_value) << ',' << (e.significant ? 1 : 0);
        for (const auto& t : design.treatment_names) csv << ',' << (e.treatment == t ? 1 : 0);
        for (int b : control_blocks)
            csv << ',' << (std::find(s.control_blocks.begin(), s.control_blocks.end(), b) != s.control_blocks.end());
        if (cfg.sca_grid.subgroup_subsets)
            for (std::size_t k = 0; k < design.subgroup_names.size(); ++k)
                csv << ',' << (s.subset == static_cast<int>(k) && s.subset_members) << ','
                    << (s.subset == static_cast<int>(k) && !s.subset_members);
        if (data.roles().outcomes.size() > 1)
            for (const auto& o : data.roles().outcomes) csv << ',' << (s.outcome == o.name);
        csv << '\n';
    }

    json report;
    report["method"] = null_method_name(test.method);
    report["draws"] = test.draws;
    report["valid_draws"] = test.valid_draws;
    report["seed"] = test.seed;
    report["median"] = curve.median;
    report["p_value"] = test.p_value;
    report["share_significant"] = curve.share_significant;
    report["mean_z"] = curve.mean_z;
    report["specifications"] = curve.specs.size();
    report["estimates"] = curve.entries.size();
    report["n"] = data.n();
    report["gaps"] = json::array();
    for (const auto& g : curve.gaps)
        report["gaps"].push_back({{"spec", g.spec}, {"label", spec_label(curve.specs[g.spec], design)},
                                  {"reason", g.reason}});
    std::vector<double> nulls = test.null_medians;
    std::sort(nulls.begin(), nulls.end());
    auto q = [&](double p) {
        if (nulls.empty()) return json(nullptr);
        const double h = p * static_cast<double>(nulls.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, nulls.size() - 1);
        return json(nulls[lo] + (h - static_cast<double>(lo)) * (nulls[hi] - nulls[lo]));
    };
    report["null_median_quantiles"] = {{"0.025", q(0.025)}, {"0.5", q(0.5)}, {"0.975", q(0.975)}};
    report["config"] = config_to_json(cfg);

    ScaOutput out;
    out.files["curve.csv"] = csv.str();
    out.files["sca_test.json"] = report.dump(2) + "\n";
    out.report = std::move(report);
    out.files.merge(render_sca_figure(out.files["curve.csv"], out.files["sca_test.json"]));
    return out;
}

FileSet render_sca_figure(const std::string& curve_text, const std::string& test_text) {
    json report;
    try {
        report = json::parse(test_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("sca_test.json: ") + e.what());
    }
    const auto rows = parse_csv_rows(curve_text);
    if (rows.empty()) fail(ErrorCode::parse, "curve.csv is empty");
    const auto& header = rows.front();
    constexpr std::size_t first_indicator = 11;
    if (header.size() < first_indicator || header[6] != "estimate")
        fail(ErrorCode::parse, "curve.csv has an unexpected header");

    svg::CurveFigure fig;
    char title[200];
    std::snprintf(title, sizeof title, "Specification curve: median %.3g, p = %.3g (%s, %d draws)",
                  report.value("median", 0.0), report.value("p_value", 1.0),
                  report.value("method", std::string("?")).c_str(), report.value("draws", 0));
    fig.title = title;
    fig.median = report.value("median", 0.0);
    fig.indicator_names.assign(header.begin() + first_indicator, header.end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) fail(ErrorCode::parse, "curve.csv row " + std::to_string(r) + " is ragged");
        svg::CurvePoint p;
        p.estimate = to_double(row[6]);
        p.se = to_double(row[7]);
        p.significant = row[10] == "1";
        for (std::size_t c = first_indicator; c < row.size(); ++c) p.indicators.push_back(row[c] == "1");
        fig.points.push_back(std::move(p));
    }
    return {{"sca.svg", svg::curve(fig)}};
}

SimOutput cmd_sim(const SimRequest& req) {
    if (!req.seed) fail(ErrorCode::config, "a seed is required for simulations (pass --seed)");
    std::vector<SimScenario> scenarios;
    if (std::filesystem::exists(req.scenario) && std::filesystem::is_regular_file(req.scenario)) {
        scenarios.push_back(parse_scenario_json(read_text(req.scenario), *req.seed));
    } else {
        for (const auto& id : expand_scenario_ids(req.scenario)) scenarios.push_back(preset_scenario(id, *req.seed));
    }
    SimOutput out;
    out.report.master_seed = *req.seed;
    const auto start = std::chrono::steady_clock::now();
    for (auto& s : scenarios) {
        if (req.gamma) s.gamma = *req.gamma;
        if (req.threshold) s.threshold = *req.threshold;
        if (req.method) s.sca_method = *req.method;
        if (req.draws) s.sca_draws = *req.draws;
        append_report(out.report, run_scenario(s));
    }
    out.report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.files["sim_report.csv"] = report_csv(out.report);
    SimReport for_file = out.report;
    for_file.runtime_seconds = 0.0;  // keep written files reproducible
    out.files["sim_tables.txt"] = report_text(for_file);
    return out;
}

FileSet cmd_plot(const std::filesystem::path& dir) {
    FileSet files;
    const auto models = dir / "models.csv";
    const auto coefs = dir / "coefficients.json";
    const auto curve_file = dir / "curve.csv";
    const auto test_file = dir / "sca_test.json";
    bool any = false;
    if (std::filesystem::exists(models) && std::filesystem::exists(coefs)) {
        files.merge(render_run_figures(read_text(models), read_text(coefs), 0));
        any = true;
    }
    if (std::filesystem::exists(curve_file) && std::filesystem::exists(test_file)) {
        files.merge(render_sca_figure(read_text(curve_file), read_text(test_file)));
        any = true;
    }
    if (!any)
        fail(ErrorCode::io, "no saved results in '" + dir.string() +
                                "' (expected models.csv + coefficients.json or curve.csv + sca_test.json)");
    return files;
}

void write_files(const std::filesystem::path& dir, const FileSet& files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& [name, contents] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << contents;
        out.close();
        if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
    }
}

json error_record(ErrorCode code, const std::string& message, const std::string& command) {
    return {{"error", {{"code", error_code_name(code)},
                       {"status", static_cast<int>(code)},
                       {"message", message},
                       {"command", command}}}};
}

}  // namespace bsca
