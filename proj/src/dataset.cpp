#include "bsca/dataset.hpp"

#include "bsca/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace bsca {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::config: return "config";
    case ErrorCode::parse: return "parse";
    case ErrorCode::domain: return "domain";
    case ErrorCode::collinear: return "collinear";
    case ErrorCode::singular_design: return "singular_design";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::separation: return "separation";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::no_valid_model: return "no_valid_model";
    case ErrorCode::cap_exceeded: return "cap_exceeded";
    case ErrorCode::family: return "family";
    case ErrorCode::io: return "io";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_curve: return "empty_curve";
    case ErrorCode::degenerate_subgroup: return "degenerate_subgroup";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

const char* family_name(Family f) noexcept {
    return f == Family::gaussian ? "gaussian" : "binomial";
}

Family parse_family(std::string_view s) {
    if (s == "gaussian" || s == "normal") return Family::gaussian;
    if (s == "binomial" || s == "logistic") return Family::binomial;
    fail(ErrorCode::config, "unknown family '" + std::string(s) + "'");
}

const char* treatment_coding_name(TreatmentCoding c) noexcept {
    switch (c) {
    case TreatmentCoding::binary: return "binary";
    case TreatmentCoding::continuous: return "continuous";
    case TreatmentCoding::categorical: return "categorical";
    case TreatmentCoding::identity: return "identity";
    }
    return "unknown";
}

TreatmentCoding parse_treatment_coding(std::string_view s) {
    if (s == "binary") return TreatmentCoding::binary;
    if (s == "continuous") return TreatmentCoding::continuous;
    if (s == "categorical" || s == "ordinal") return TreatmentCoding::categorical;
    if (s == "identity" || s == "none") return TreatmentCoding::identity;
    fail(ErrorCode::config, "unknown treatment coding '" + std::string(s) + "'");
}

const char* block_kind_name(BlockKind k) noexcept {
    switch (k) {
    case BlockKind::intercept: return "intercept";
    case BlockKind::control: return "control";
    case BlockKind::treatment: return "treatment";
    case BlockKind::subgroup_main: return "subgroup";
    case BlockKind::interaction: return "interaction";
    }
    return "unknown";
}

std::vector<std::string> RoleConfig::used_columns() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    };
    for (const auto& o : outcomes) add(o.name);
    for (const auto& t : treatments) add(t.name);
    for (const auto& c : controls) add(c.name);
    for (const auto& g : subgroups) add(g);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(RoleConfig roles, std::vector<std::string> names,
                 std::vector<Eigen::VectorXd> columns, std::size_t rows_dropped)
    : roles_(std::move(roles)),
      names_(std::move(names)),
      columns_(std::move(columns)),
      rows_dropped_(rows_dropped) {
    if (names_.size() != columns_.size())
        fail(ErrorCode::invalid_argument, "column names and values differ in count");
    n_ = columns_.empty() ? 0 : static_cast<std::size_t>(columns_.front().size());
    validate();
}

void Dataset::validate() const {
    if (n_ < 1) fail(ErrorCode::insufficient_data, "dataset has no complete rows");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (static_cast<std::size_t>(columns_[c].size()) != n_)
            fail(ErrorCode::invalid_argument, "column '" + names_[c] + "' has length " +
                                                  std::to_string(columns_[c].size()) +
                                                  ", expected " + std::to_string(n_));
        if (!columns_[c].allFinite())
            fail(ErrorCode::domain, "column '" + names_[c] + "' contains non-finite values");
    }
    for (const auto& name : roles_.used_columns())
        if (!has_column(name))
            fail(ErrorCode::config, "column '" + name + "' is assigned a role but missing");
    for (const auto& o : roles_.outcomes) {
        if (o.family != Family::binomial) continue;
        const auto& y = column(o.name);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0.0 && y[i] != 1.0)
                fail(ErrorCode::domain, "binomial outcome '" + o.name +
                                            "' has value outside {0,1} at row " +
                                            std::to_string(i + 1));
    }
    for (const auto& g : roles_.subgroups) {
        const auto& v = column(g);
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (v[i] != 0.0 && v[i] != 1.0)
                fail(ErrorCode::domain, "subgroup '" + g + "' is not a 0/1 membership column");
    }
}

bool Dataset::has_column(std::string_view name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& Dataset::column(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(ErrorCode::config, "no column named '" + std::string(name) + "'");
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

const OutcomeSpec& Dataset::outcome(std::string_view name) const {
    for (const auto& o : roles_.outcomes)
        if (o.name == name) return o;
    fail(ErrorCode::config, "'" + std::string(name) + "' is not an outcome");
}

Dataset Dataset::with_single_outcome(const std::string& name, Eigen::VectorXd values,
                                     Family family) const {
    RoleConfig roles = roles_;
    roles.outcomes = {OutcomeSpec{name, family}};
    auto names = names_;
    auto columns = columns_;
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        names.push_back(name);
        columns.push_back(std::move(values));
    } else {
        columns[static_cast<std::size_t>(it - names.begin())] = std::move(values);
    }
    return Dataset(std::move(roles), std::move(names), std::move(columns), rows_dropped_);
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
    std::vector<Eigen::VectorXd> columns;
    columns.reserve(columns_.size());
    for (const auto& c : columns_) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = c[rows[i]];
        columns.push_back(std::move(v));
    }
    return Dataset(roles_, names_, std::move(columns), rows_dropped_);
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };

    for (; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (field_started && !field.empty())
                fail(ErrorCode::parse, "unexpected quote inside unquoted CSV field");
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes) fail(ErrorCode::parse, "unterminated quoted CSV field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_cell(std::string_view raw, std::size_t row, const std::string& col) {
    auto s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
        fail(ErrorCode::parse, "non-numeric value '" + std::string(raw) + "' at row " +
                                   std::to_string(row) + ", column '" + col + "'");
    return value;
}

}  // namespace

Dataset load_csv_text(std::string_view text, const RoleConfig& roles) {
    auto rows = parse_csv_rows(text);
    if (rows.empty()) fail(ErrorCode::parse, "CSV input has no header row");
    const auto& header = rows.front();

    auto used = roles.used_columns();
    std::vector<std::size_t> positions;
    for (const auto& name : used) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == name; });
        if (it == header.end())
            fail(ErrorCode::config, "column '" + name + "' not found in CSV header");
        positions.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    std::vector<std::vector<double>> values(used.size());
    std::size_t dropped = 0;
    std::vector<double> row_values(used.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            fail(ErrorCode::parse, "row " + std::to_string(r + 1) + " has " +
                                       std::to_string(row.size()) + " fields, header has " +
                                       std::to_string(header.size()));
        bool complete = true;
        for (std::size_t c = 0; c < used.size(); ++c) {
            auto v = parse_cell(row[positions[c]], r + 1, used[c]);
            if (!v) {
                complete = false;
                continue;  // keep scanning so parse errors still surface
            }
            row_values[c] = *v;
        }
        if (!complete) {
            ++dropped;
            continue;
        }
        for (std::size_t c = 0; c < used.size(); ++c) values[c].push_back(row_values[c]);
    }

    std::vector<Eigen::VectorXd> columns;
    for (auto& v : values)
        columns.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    return Dataset(roles, used, std::move(columns), dropped);
}

Dataset load_csv(const std::filesystem::path& path, const RoleConfig& roles) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open data file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_csv_text(ss.str(), roles);
}

// ---------------------------------------------------------------------------
// Coding

Eigen::VectorXd code_subgroup(const Eigen::VectorXd& membership) {
    const auto n = membership.size();
    if (n == 0) fail(ErrorCode::insufficient_data, "empty subgroup column");
    Eigen::Index members = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (membership[i] != 0.0 && membership[i] != 1.0)
            fail(ErrorCode::domain, "subgroup membership must be 0/1");
        if (membership[i] == 1.0) ++members;
    }
    if (members == 0 || members == n)
        fail(ErrorCode::degenerate_subgroup,
             members == 0 ? "subgroup has no members" : "every observation is a subgroup member");
    const double rho = static_cast<double>(members) / static_cast<double>(n);
    Eigen::VectorXd out(n);
    // Members 1 - rho, non-members -rho: the column has mean exactly zero.
    for (Eigen::Index i = 0; i < n; ++i) out[i] = membership[i] == 1.0 ? 1.0 - rho : -rho;
    return out;
}

Eigen::VectorXd code_treatment(const Eigen::VectorXd& raw, const TreatmentSpec& spec) {
    switch (spec.coding) {
    case TreatmentCoding::binary: {
        std::set<double> levels(raw.data(), raw.data() + raw.size());
        if (levels.size() != 2)
            fail(ErrorCode::domain, "binary treatment '" + spec.name + "' has " +
                                        std::to_string(levels.size()) +
                                        " distinct values, expected 2");
        const double low = *levels.begin();
        return raw.unaryExpr([low](double v) { return v == low ? -0.5 : 0.5; });
    }
    case TreatmentCoding::continuous: {
        if (!(spec.max_report > 0.0))
            fail(ErrorCode::config, "treatment '" + spec.name + "' needs max_report > 0");
        for (Eigen::Index i = 0; i < raw.size(); ++i)
            if (raw[i] < 0.0 || raw[i] > spec.max_report)
                fail(ErrorCode::domain, "treatment '" + spec.name + "' value " +
                                            std::to_string(raw[i]) + " outside [0, " +
                                            std::to_string(spec.max_report) + "]");
        return raw / spec.max_report;
    }
    case TreatmentCoding::identity:
        return raw;
    case TreatmentCoding::categorical:
        break;
    }
    fail(ErrorCode::invalid_argument,
         "categorical treatments expand to several columns; use build_design");
}

namespace {

std::string format_level(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

}  // namespace

int CodedDesign::column_index(std::string_view name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    return it == column_names.end() ? -1 : static_cast<int>(it - column_names.begin());
}

int CodedDesign::block_index(std::string_view name) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (blocks[b].name == name) return static_cast<int>(b);
    return -1;
}

int first_dependent_column(const Eigen::MatrixXd& X) {
    if (X.cols() == 0) return -1;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() == X.cols()) return -1;
    for (Eigen::Index c = 1; c <= X.cols(); ++c) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> sub(X.leftCols(c));
        if (sub.rank() < c) return static_cast<int>(c - 1);
    }
    return static_cast<int>(X.cols() - 1);
}

CodedDesign build_design(const Dataset& data, const DesignOptions& options) {
    const auto& roles = data.roles();
    if (roles.outcomes.empty()) fail(ErrorCode::config, "no outcome assigned");
    if (roles.treatments.empty()) fail(ErrorCode::config, "no treatment assigned");

    const auto n = static_cast<Eigen::Index>(data.n());
    std::vector<Eigen::VectorXd> cols;
    CodedDesign d;

    auto add_column = [&](std::string name, Eigen::VectorXd v, double scale) {
        d.column_names.push_back(std::move(name));
        d.column_block.push_back(static_cast<int>(d.blocks.size()) - 1);
        d.column_scale.push_back(scale);
        cols.push_back(std::move(v));
        d.blocks.back().columns.push_back(static_cast<int>(cols.size()) - 1);
    };

    d.blocks.push_back(Block{"(Intercept)", BlockKind::intercept, {}, {}});
    add_column("(Intercept)", Eigen::VectorXd::Ones(n), 1.0);

    for (const auto& c : roles.controls) {
        const auto& raw = data.column(c.name);
        d.blocks.push_back(Block{c.name, BlockKind::control, {}, {}});
        if (c.categorical) {
            std::set<double> levels(raw.data(), raw.data() + raw.size());
            if (levels.size() < 2)
                fail(ErrorCode::collinear, "categorical control '" + c.name + "' has a single level");
            for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
                const double level = *it;
                add_column(c.name + "=" + format_level(level),
                           raw.unaryExpr([level](double v) { return v == level ? 1.0 : 0.0; }), 1.0);
            }
        } else if (options.standardize_controls) {
            const double mean = raw.mean();
            const double sd = n > 1 ? std::sqrt((raw.array() - mean).square().sum() / double(n - 1)) : 0.0;
            if (!(sd > 0.0))
                fail(ErrorCode::collinear, "control '" + c.name + "' is constant (collinear with intercept)");
            add_column(c.name, (raw.array() - mean) / sd, sd);
        } else {
            add_column(c.name, raw, 1.0);
        }
    }

    std::vector<int> subgroup_blocks;
    for (const auto& g : roles.subgroups) {
        Eigen::VectorXd coded;
        try {
            coded = code_subgroup(data.column(g));
        } catch (const Error& e) {
            fail(e.code(), "subgroup '" + g + "': " + e.what());
        }
        d.blocks.push_back(Block{g, BlockKind::subgroup_main, {}, {}});
        subgroup_blocks.push_back(static_cast<int>(d.blocks.size()) - 1);
        d.subgroup_names.push_back(g);
        add_column(g, std::move(coded), 1.0);
    }
    d.G.resize(n, static_cast<Eigen::Index>(subgroup_blocks.size()));
    for (std::size_t k = 0; k < subgroup_blocks.size(); ++k)
        d.G.col(static_cast<Eigen::Index>(k)) =
            cols[static_cast<std::size_t>(d.blocks[static_cast<std::size_t>(subgroup_blocks[k])].columns[0])];

    std::vector<int> treatment_blocks;
    for (const auto& t : roles.treatments) {
        const auto& raw = data.column(t.name);
        if (t.coding == TreatmentCoding::categorical) {
            std::set<double> levels(raw.data(), raw.data() + raw.size());
            if (levels.size() < 2)
                fail(ErrorCode::domain, "categorical treatment '" + t.name + "' has a single level");
            for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
                const double level = *it;
                std::string name = t.name + "=" + format_level(level);
                d.blocks.push_back(Block{name, BlockKind::treatment, {}, {}});
                treatment_blocks.push_back(static_cast<int>(d.blocks.size()) - 1);
                add_column(name, raw.unaryExpr([level](double v) { return v == level ? 0.5 : -0.5; }), 1.0);
                d.treatment_names.push_back(name);
                d.treatment_columns.push_back(static_cast<int>(cols.size()) - 1);
            }
        } else {
            d.blocks.push_back(Block{t.name, BlockKind::treatment, {}, {}});
            treatment_blocks.push_back(static_cast<int>(d.blocks.size()) - 1);
            add_column(t.name, code_treatment(raw, t), 1.0);
            d.treatment_names.push_back(t.name);
            d.treatment_columns.push_back(static_cast<int>(cols.size()) - 1);
        }
    }

    d.interaction_block_of_treatment.assign(d.treatment_columns.size(), -1);
    if (options.interactions && !subgroup_blocks.empty()) {
        std::string suffix;
        for (std::size_t k = 0; k < d.subgroup_names.size(); ++k)
            suffix += (k ? "+" : "") + d.subgroup_names[k];
        for (std::size_t j = 0; j < d.treatment_columns.size(); ++j) {
            Block b{d.treatment_names[j] + ":" + suffix, BlockKind::interaction, {}, {}};
            b.parents.push_back(treatment_blocks[j]);
            b.parents.insert(b.parents.end(), subgroup_blocks.begin(), subgroup_blocks.end());
            d.blocks.push_back(std::move(b));
            d.interaction_block_of_treatment[j] = static_cast<int>(d.blocks.size()) - 1;
            const auto& x = cols[static_cast<std::size_t>(d.treatment_columns[j])];
            for (std::size_t k = 0; k < d.subgroup_names.size(); ++k)
                add_column(d.treatment_names[j] + ":" + d.subgroup_names[k],
                           x.cwiseProduct(d.G.col(static_cast<Eigen::Index>(k))), 1.0);
        }
    }

    d.X.resize(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) d.X.col(static_cast<Eigen::Index>(c)) = cols[c];

    const int dep = first_dependent_column(d.X);
    if (dep >= 0) {
        const auto& block = d.blocks[static_cast<std::size_t>(d.column_block[static_cast<std::size_t>(dep)])];
        fail(ErrorCode::collinear, "design is rank deficient: block '" + block.name +
                                       "' (column '" + d.column_names[static_cast<std::size_t>(dep)] +
                                       "') is a linear combination of earlier columns");
    }
    return d;
}

}  // namespace bsca
