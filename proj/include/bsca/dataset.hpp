#pragma once

// Tabular input, variable roles, and the coded design matrix.
//
// Coding conventions (these make the treatment coefficient an average
// treatment effect in every sub-model, with or without interactions):
//   binary treatment      -> {-1/2, +1/2}
//   continuous treatment  -> raw / max_report, in [0, 1]
//   subgroup membership   -> 1 - rho_k for members, -rho_k otherwise
//                            (rho_k = share of members), so every coded
//                            subgroup column sums to zero
//   continuous control    -> standardized (mean 0, sd 1)
//   categorical control   -> reference-coded indicators, one block

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bsca {

enum class Family { gaussian, binomial };

const char* family_name(Family f) noexcept;
Family parse_family(std::string_view s);

enum class TreatmentCoding {
    binary,       // two distinct raw values, smaller -> -1/2
    continuous,   // raw / max_report
    categorical,  // one +-1/2 indicator treatment per non-reference level
    identity,     // already coded, used as-is
};

const char* treatment_coding_name(TreatmentCoding c) noexcept;
TreatmentCoding parse_treatment_coding(std::string_view s);

struct OutcomeSpec {
    std::string name;
    Family family = Family::gaussian;
};

struct TreatmentSpec {
    std::string name;
    TreatmentCoding coding = TreatmentCoding::binary;
    double max_report = 1.0;  // continuous coding only
};

struct ControlSpec {
    std::string name;
    bool categorical = false;
};

struct RoleConfig {
    std::vector<OutcomeSpec> outcomes;
    std::vector<TreatmentSpec> treatments;
    std::vector<ControlSpec> controls;
    std::vector<std::string> subgroups;

    // Every column referenced by some role, in role order, without repeats.
    std::vector<std::string> used_columns() const;
};

// Immutable, complete-case table of the columns referenced by a RoleConfig.
class Dataset {
public:
    Dataset(RoleConfig roles, std::vector<std::string> names,
            std::vector<Eigen::VectorXd> columns, std::size_t rows_dropped = 0);

    std::size_t n() const noexcept { return n_; }
    std::size_t rows_dropped() const noexcept { return rows_dropped_; }
    const RoleConfig& roles() const noexcept { return roles_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    bool has_column(std::string_view name) const noexcept;
    const Eigen::VectorXd& column(std::string_view name) const;

    const OutcomeSpec& outcome(std::string_view name) const;

    // Copy of this dataset whose only outcome is `name` with the given values.
    // Used to run the single-outcome pipeline on derived responses.
    Dataset with_single_outcome(const std::string& name, Eigen::VectorXd values,
                                Family family) const;

    // Copy restricted to the given row indices (in the given order).
    Dataset select_rows(const std::vector<Eigen::Index>& rows) const;

private:
    void validate() const;

    RoleConfig roles_;
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> columns_;
    std::size_t n_ = 0;
    std::size_t rows_dropped_ = 0;
};

// Parses RFC-4180 CSV text with a mandatory header row. Only the columns
// used by `roles` are converted to numbers; empty cells are missing and
// rows with a missing used cell are dropped listwise.
Dataset load_csv_text(std::string_view text, const RoleConfig& roles);
Dataset load_csv(const std::filesystem::path& path, const RoleConfig& roles);

// Low-level CSV tokenizer shared by the result readers.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text);
std::string csv_escape(std::string_view field);

Eigen::VectorXd code_subgroup(const Eigen::VectorXd& membership);
Eigen::VectorXd code_treatment(const Eigen::VectorXd& raw, const TreatmentSpec& spec);

enum class BlockKind { intercept, control, treatment, subgroup_main, interaction };

const char* block_kind_name(BlockKind k) noexcept;

struct Block {
    std::string name;
    BlockKind kind = BlockKind::control;
    std::vector<int> columns;
    std::vector<int> parents;  // block indices an interaction depends on
};

struct DesignOptions {
    bool interactions = true;
    bool standardize_controls = true;
};

struct CodedDesign {
    Eigen::MatrixXd X;  // n x p, blocks laid out contiguously
    std::vector<std::string> column_names;
    std::vector<int> column_block;      // owning block of each column
    std::vector<double> column_scale;   // raw-scale coefficient = coef / scale
    std::vector<Block> blocks;

    std::vector<std::string> treatment_names;  // one per treatment column
    std::vector<int> treatment_columns;
    std::vector<std::string> subgroup_names;
    Eigen::MatrixXd G;                         // n x K coded subgroups
    std::vector<int> interaction_block_of_treatment;  // -1 when absent

    Eigen::Index n() const noexcept { return X.rows(); }
    Eigen::Index p() const noexcept { return X.cols(); }

    int column_index(std::string_view name) const;  // -1 when absent
    int block_index(std::string_view name) const;   // -1 when absent
};

CodedDesign build_design(const Dataset& data, const DesignOptions& options = {});

// Index of the first column that is a linear combination of the preceding
// ones, or -1 when X has full column rank.
int first_dependent_column(const Eigen::MatrixXd& X);

}  // namespace bsca
