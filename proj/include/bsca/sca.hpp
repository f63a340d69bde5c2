#pragma once

// Classical specification curve analysis: every specification is fitted
// with equal a-priori weight, the treatment estimates are sorted into a
// curve, and the median estimate is tested against a resampling null.

#include "bsca/dataset.hpp"
#include "bsca/glm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bsca {

struct SpecDefinition {
    std::string outcome;
    std::vector<int> treatments;      // indices into CodedDesign::treatment_columns
    std::vector<int> control_blocks;  // design block indices (controls only)
    int subset = -1;                  // subgroup index, -1 = all rows
    bool subset_members = true;       // members (true) or non-members of `subset`
};

struct CurveEntry {
    std::size_t spec = 0;
    std::string treatment;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

struct CurveGap {
    std::size_t spec = 0;
    std::string reason;
};

struct SpecCurve {
    std::vector<SpecDefinition> specs;
    std::vector<CurveEntry> entries;  // sorted by estimate, non-decreasing
    std::vector<CurveGap> gaps;
    double median = 0.0;
    double share_significant = 0.0;   // significant with the sign of the median
    double mean_z = 0.0;
};

struct SpecGridOptions {
    bool joint_treatments = true;  // one spec holds every treatment; else one per treatment
    bool subgroup_subsets = false; // add member / non-member subsets per subgroup
    std::size_t max_specs = 4096;
};

std::vector<SpecDefinition> enumerate_specs(const Dataset& data, const CodedDesign& design,
                                            const SpecGridOptions& options = {});

std::string spec_label(const SpecDefinition& spec, const CodedDesign& design);

SpecCurve run_curve(const std::vector<SpecDefinition>& specs, const Dataset& data,
                    const CodedDesign& design);

double sample_median(std::vector<double> values);

enum class NullMethod { permutation, bootstrap };

const char* null_method_name(NullMethod m) noexcept;
NullMethod parse_null_method(std::string_view s);

struct MedianTestOptions {
    NullMethod method = NullMethod::bootstrap;
    std::size_t draws = 500;
    std::uint64_t seed = 0;
};

struct MedianTestResult {
    NullMethod method = NullMethod::bootstrap;
    std::size_t draws = 0;
    std::size_t valid_draws = 0;
    std::uint64_t seed = 0;
    double observed_median = 0.0;
    double p_value = 1.0;
    std::vector<double> null_medians;
};

MedianTestResult median_test(const SpecCurve& curve, const Dataset& data,
                             const CodedDesign& design, const MedianTestOptions& options);

}  // namespace bsca
