#include "bsca/sca.hpp"

#include "bsca/error.hpp"
#include "bsca/parallel.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsca {

const char* null_method_name(NullMethod m) noexcept {
    return m == NullMethod::permutation ? "permutation" : "bootstrap";
}

NullMethod parse_null_method(std::string_view s) {
    if (s == "permutation") return NullMethod::permutation;
    if (s == "bootstrap") return NullMethod::bootstrap;
    fail(ErrorCode::config, "unknown SCA test method '" + std::string(s) + "'");
}

double sample_median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<SpecDefinition> enumerate_specs(const Dataset& data, const CodedDesign& design,
                                            const SpecGridOptions& options) {
    std::vector<int> control_blocks;
    for (std::size_t b = 0; b < design.blocks.size(); ++b)
        if (design.blocks[b].kind == BlockKind::control) control_blocks.push_back(static_cast<int>(b));
    if (control_blocks.size() > 20) fail(ErrorCode::cap_exceeded, "too many controls for a full SCA grid");

    std::vector<std::vector<int>> treatment_sets;
    const int J = static_cast<int>(design.treatment_columns.size());
    if (options.joint_treatments) {
        std::vector<int> all(static_cast<std::size_t>(J));
        std::iota(all.begin(), all.end(), 0);
        treatment_sets.push_back(all);
    } else {
        for (int j = 0; j < J; ++j) treatment_sets.push_back({j});
    }

    std::vector<std::pair<int, bool>> subsets{{-1, true}};
    if (options.subgroup_subsets)
        for (int k = 0; k < static_cast<int>(design.subgroup_names.size()); ++k) {
            subsets.emplace_back(k, true);
            subsets.emplace_back(k, false);
        }

    std::vector<SpecDefinition> specs;
    const std::uint64_t combos = std::uint64_t{1} << control_blocks.size();
    for (const auto& outcome : data.roles().outcomes)
        for (const auto& tset : treatment_sets)
            for (std::uint64_t mask = 0; mask < combos; ++mask)
                for (const auto& [k, members] : subsets) {
                    SpecDefinition s;
                    s.outcome = outcome.name;
                    s.treatments = tset;
                    for (std::size_t c = 0; c < control_blocks.size(); ++c)
                        if (mask >> c & 1U) s.control_blocks.push_back(control_blocks[c]);
                    s.subset = k;
                    s.subset_members = members;
                    specs.push_back(std::move(s));
                    if (specs.size() > options.max_specs)
                        fail(ErrorCode::cap_exceeded, "specification grid exceeds " +
                                                          std::to_string(options.max_specs) + " specs");
                }
    return specs;
}

std::string spec_label(const SpecDefinition& spec, const CodedDesign& design) {
    std::string out = spec.outcome + " ~";
    for (int j : spec.treatments) out += " " + design.treatment_names[static_cast<std::size_t>(j)];
    out += " |";
    if (spec.control_blocks.empty()) out += " (no controls)";
    for (int b : spec.control_blocks) out += " " + design.blocks[static_cast<std::size_t>(b)].name;
    if (spec.subset >= 0)
        out += std::string(" [") + (spec.subset_members ? "" : "not ") +
               design.subgroup_names[static_cast<std::size_t>(spec.subset)] + "]";
    return out;
}

namespace {

struct CompiledSpec {
    std::size_t index = 0;
    std::vector<Eigen::Index> rows;
    std::vector<int> cols;
    std::vector<int> treatment_pos;  // positions in cols
    std::vector<std::string> treatment_names;
    Eigen::VectorXd y;               // full-length outcome
    Family family = Family::gaussian;
};

CompiledSpec compile(const SpecDefinition& spec, std::size_t index, const Dataset& data,
                     const CodedDesign& design) {
    CompiledSpec c;
    c.index = index;
    c.y = data.column(spec.outcome);
    c.family = data.outcome(spec.outcome).family;
    if (spec.treatments.empty()) fail(ErrorCode::config, "specification without a treatment");

    std::vector<int> cols{0};
    for (int b : spec.control_blocks) {
        const auto& block = design.blocks.at(static_cast<std::size_t>(b));
        if (block.kind != BlockKind::control)
            fail(ErrorCode::config, "SCA specs may only toggle control blocks");
        cols.insert(cols.end(), block.columns.begin(), block.columns.end());
    }
    for (int j : spec.treatments) cols.push_back(design.treatment_columns.at(static_cast<std::size_t>(j)));
    std::sort(cols.begin(), cols.end());
    c.cols = cols;
    for (int j : spec.treatments) {
        const int col = design.treatment_columns[static_cast<std::size_t>(j)];
        c.treatment_pos.push_back(static_cast<int>(std::find(cols.begin(), cols.end(), col) - cols.begin()));
        c.treatment_names.push_back(design.treatment_names[static_cast<std::size_t>(j)]);
    }

    if (spec.subset < 0) {
        c.rows.resize(static_cast<std::size_t>(design.n()));
        std::iota(c.rows.begin(), c.rows.end(), Eigen::Index{0});
    } else {
        const auto& member = data.column(design.subgroup_names.at(static_cast<std::size_t>(spec.subset)));
        for (Eigen::Index i = 0; i < member.size(); ++i)
            if ((member[i] == 1.0) == spec.subset_members) c.rows.push_back(i);
    }
    return c;
}

GlmFit fit_spec(const CompiledSpec& c, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd sub = X(rows, c.cols);
    Eigen::VectorXd ys = y(rows);
    return fit_glm(ys, sub, c.family);
}

double two_sided_p(double z, Family family, double df) {
    const double az = std::abs(z);
    if (family == Family::gaussian && df > 0) {
        boost::math::students_t_distribution<double> t(df);
        return 2.0 * boost::math::cdf(boost::math::complement(t, az));
    }
    boost::math::normal_distribution<double> nd;
    return 2.0 * boost::math::cdf(boost::math::complement(nd, az));
}

}  // namespace

SpecCurve run_curve(const std::vector<SpecDefinition>& specs, const Dataset& data,
                    const CodedDesign& design) {
    SpecCurve curve;
    curve.specs = specs;
    std::vector<std::vector<CurveEntry>> per_spec(specs.size());
    std::vector<std::string> failure(specs.size());

    parallel_for(specs.size(), [&](std::size_t s) {
        try {
            const auto c = compile(specs[s], s, data, design);
            const auto fit = fit_spec(c, design.X, c.y, c.rows);
            if (fit.degenerate) fail(ErrorCode::singular_design, "zero residual variance");
            const double n = static_cast<double>(fit.n);
            const double k = static_cast<double>(fit.k);
            // Conventional (n - k) variance for Gaussian Wald statistics.
            const double inflate = c.family == Family::gaussian ? std::sqrt(n / (n - k)) : 1.0;
            for (std::size_t t = 0; t < c.treatment_pos.size(); ++t) {
                const int pos = c.treatment_pos[t];
                CurveEntry e;
                e.spec = s;
                e.treatment = c.treatment_names[t];
                e.estimate = fit.coefficients[pos];
                e.se = std::sqrt(fit.covariance(pos, pos)) * inflate;
                e.z = e.estimate / e.se;
                e.p_value = two_sided_p(e.z, c.family, n - k);
                e.significant = e.p_value < 0.05;
                per_spec[s].push_back(e);
            }
        } catch (const Error& e) {
            failure[s] = std::string(error_code_name(e.code())) + ": " + e.what();
        }
    });

    for (std::size_t s = 0; s < specs.size(); ++s) {
        if (!failure[s].empty()) curve.gaps.push_back({s, failure[s]});
        for (auto& e : per_spec[s]) curve.entries.push_back(std::move(e));
    }
    if (curve.entries.empty()) fail(ErrorCode::empty_curve, "every specification failed to fit");

    std::stable_sort(curve.entries.begin(), curve.entries.end(),
                     [](const CurveEntry& a, const CurveEntry& b) { return a.estimate < b.estimate; });
    std::vector<double> est;
    double zsum = 0.0;
    for (const auto& e : curve.entries) {
        est.push_back(e.estimate);
        zsum += e.z;
    }
    curve.median = sample_median(est);
    const double direction = curve.median >= 0.0 ? 1.0 : -1.0;
    std::size_t sig = 0;
    for (const auto& e : curve.entries)
        if (e.significant && e.estimate * direction > 0.0) ++sig;
    curve.share_significant = static_cast<double>(sig) / static_cast<double>(curve.entries.size());
    curve.mean_z = zsum / static_cast<double>(curve.entries.size());
    return curve;
}

MedianTestResult median_test(const SpecCurve& curve, const Dataset& data, const CodedDesign& design,
                             const MedianTestOptions& options) {
    if (options.draws < 100) fail(ErrorCode::invalid_argument, "median test needs at least 100 draws");

    std::vector<CompiledSpec> compiled;
    for (std::size_t s = 0; s < curve.specs.size(); ++s) {
        const bool failed = std::any_of(curve.gaps.begin(), curve.gaps.end(),
                                        [s](const CurveGap& g) { return g.spec == s; });
        if (!failed) compiled.push_back(compile(curve.specs[s], s, data, design));
    }
    if (compiled.empty()) fail(ErrorCode::empty_curve, "no fitted specifications to resample");

    // Null-imposed responses: each spec's fitted treatment contribution removed.
    std::vector<Eigen::VectorXd> null_y;
    if (options.method == NullMethod::bootstrap) {
        for (const auto& c : compiled) {
            if (c.family != Family::gaussian)
                fail(ErrorCode::unsupported,
                     "the null-imposed bootstrap needs Gaussian outcomes; use the permutation method");
            Eigen::VectorXd y0 = c.y;
            for (const auto& e : curve.entries) {
                if (e.spec != c.index) continue;
                const auto t = static_cast<std::size_t>(
                    std::find(c.treatment_names.begin(), c.treatment_names.end(), e.treatment) -
                    c.treatment_names.begin());
                y0 -= e.estimate * design.X.col(c.cols[static_cast<std::size_t>(c.treatment_pos[t])]);
            }
            null_y.push_back(std::move(y0));
        }
    }

    const auto n = design.n();
    MedianTestResult result;
    result.method = options.method;
    result.draws = options.draws;
    result.seed = options.seed;
    result.observed_median = curve.median;
    std::vector<double> medians(options.draws, std::numeric_limits<double>::quiet_NaN());

    parallel_for(options.draws, [&](std::size_t d) {
        Rng rng(derive_seed(options.seed, d));
        std::vector<double> estimates;
        if (options.method == NullMethod::permutation) {
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            for (std::size_t i = perm.size(); i > 1; --i) {
                const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
                std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
            }
            Eigen::MatrixXd Xp = design.X;
            for (int col : design.treatment_columns) Xp.col(col) = design.X.col(col)(perm);
            for (const auto& c : compiled) {
                try {
                    const auto fit = fit_spec(c, Xp, c.y, c.rows);
                    for (int pos : c.treatment_pos) estimates.push_back(fit.coefficients[pos]);
                } catch (const Error&) {
                }
            }
        } else {
            std::vector<Eigen::Index> draw(static_cast<std::size_t>(n));
            for (auto& i : draw)
                i = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)));
            for (std::size_t s = 0; s < compiled.size(); ++s) {
                const auto& c = compiled[s];
                std::vector<Eigen::Index> rows;
                if (c.rows.size() == static_cast<std::size_t>(n)) {
                    rows = draw;
                } else {
                    std::vector<char> in(static_cast<std::size_t>(n), 0);
                    for (auto r : c.rows) in[static_cast<std::size_t>(r)] = 1;
                    for (auto r : draw)
                        if (in[static_cast<std::size_t>(r)]) rows.push_back(r);
                }
                try {
                    const auto fit = fit_spec(c, design.X, null_y[s], rows);
                    for (int pos : c.treatment_pos) estimates.push_back(fit.coefficients[pos]);
                } catch (const Error&) {
                }
            }
        }
        if (!estimates.empty()) medians[d] = sample_median(std::move(estimates));
    });

    std::size_t extreme = 0;
    const double observed = std::abs(curve.median);
    for (double m : medians) {
        if (std::isnan(m)) continue;
        ++result.valid_draws;
        result.null_medians.push_back(m);
        if (std::abs(m) >= observed) ++extreme;
    }
    if (result.valid_draws == 0) fail(ErrorCode::empty_curve, "every resampled curve failed to fit");
    result.p_value = static_cast<double>(extreme + 1) / static_cast<double>(result.valid_draws + 1);
    return result;
}

}  // namespace bsca
