#include "bsca/multiout.hpp"

#include "bsca/error.hpp"
#include "bsca/parallel.hpp"

#include <cmath>

namespace bsca {

ExploreResult explore(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                      const AnalysisOptions& options) {
    if (options.engine == Engine::enumerate) {
        EnumerateOptions e;
        e.gamma = options.gamma;
        e.cap = options.cap;
        return enumerate_models(space, y, family, e);
    }
    GibbsOptions g;
    g.gamma = options.gamma;
    g.iterations = options.gibbs_iterations;
    g.burnin = options.gibbs_burnin;
    g.seed = options.seed;
    return gibbs_search(space, y, family, g);
}

OutcomeAnalysis analyze_outcome(const ModelSpace& space, const Eigen::VectorXd& y,
                                const std::string& outcome, Family family,
                                const AnalysisOptions& options) {
    const auto& design = space.design();
    OutcomeAnalysis a;
    a.outcome = outcome;
    a.family = family;
    a.explored = explore(space, y, family, options);
    a.block_inclusion = block_inclusion(space, a.explored);

    for (Eigen::Index c = 0; c < design.p(); ++c) {
        DrawOptions d{options.draws, derive_seed(options.seed, static_cast<std::uint64_t>(c)), 0.95};
        auto post = aggregate(a.explored.models, static_cast<int>(c), d);
        post.label = design.column_names[static_cast<std::size_t>(c)];
        a.tests.push_back(test_nonzero(post, options.threshold));
        a.coefficients.push_back(std::move(post));
    }

    if (options.subgroup_effects) {
        std::uint64_t stream = 1000;
        for (std::size_t j = 0; j < design.treatment_columns.size(); ++j) {
            if (design.interaction_block_of_treatment[j] < 0) continue;
            const auto K = design.G.cols();
            for (Eigen::Index k = 0; k < K; ++k) {
                // Coded values: 1 - rho_k for members, -rho_k for everyone else.
                const double member_value = design.G.col(k).maxCoeff();
                for (bool members : {true, false}) {
                    Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
                    g[k] = members ? member_value : member_value - 1.0;
                    DrawOptions d{options.draws, derive_seed(options.seed, stream++), 0.95};
                    SubgroupEffect eff;
                    eff.treatment = design.treatment_names[j];
                    eff.subgroup = design.subgroup_names[static_cast<std::size_t>(k)];
                    eff.members = members;
                    eff.posterior = subgroup_effect(a.explored.models, design, j, g, d);
                    eff.posterior.label = eff.treatment + " | " + (members ? "" : "not ") + eff.subgroup;
                    a.subgroup_effects.push_back(std::move(eff));
                }
            }
        }
    }
    return a;
}

std::vector<OutcomeCell> per_outcome_summary(const Dataset& data, const ModelSpace& space,
                                             const AnalysisOptions& options) {
    const auto& outcomes = data.roles().outcomes;
    if (outcomes.empty()) fail(ErrorCode::config, "no outcome assigned");
    std::vector<OutcomeCell> cells;
    for (std::size_t l = 0; l < outcomes.size(); ++l) {
        const auto& o = outcomes[l];
        OutcomeCell cell;
        cell.outcome = o.name;
        AnalysisOptions local = options;
        local.seed = derive_seed(options.seed, 10'000 + l);
        try {
            cell.analysis = analyze_outcome(space, data.column(o.name), o.name, o.family, local);
            cell.ok = true;
        } catch (const Error& e) {
            cell.code = e.code();
            cell.error = std::string(error_code_name(e.code())) + ": " + e.what();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

GateResult gate(const Dataset& data, const ModelSpace& space, const AnalysisOptions& options,
                const std::vector<OutcomeCell>* per_outcome) {
    const auto& design = space.design();
    const auto& outcomes = data.roles().outcomes;
    if (outcomes.empty()) fail(ErrorCode::config, "no outcome assigned");
    for (const auto& o : outcomes)
        if (o.family != Family::gaussian)
            fail(ErrorCode::family, "GATE via the mean outcome needs Gaussian outcomes; '" + o.name +
                                        "' is " + family_name(o.family));

    GateResult r;
    r.treatments = design.treatment_names;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(design.n());
    for (const auto& o : outcomes) {
        r.outcomes.push_back(o.name);
        m += data.column(o.name);
    }
    m /= static_cast<double>(outcomes.size());

    AnalysisOptions opts = options;
    opts.subgroup_effects = false;
    r.mean_outcome = analyze_outcome(space, m, "mean_outcome", Family::gaussian, opts);

    const auto J = design.treatment_columns.size();
    LinearCombination all;
    for (std::size_t j = 0; j < J; ++j) {
        const int col = design.treatment_columns[j];
        r.gate_treatment.push_back(r.mean_outcome.coefficients[static_cast<std::size_t>(col)]);
        r.gate_treatment.back().label = "GATE_" + design.treatment_names[j];
        all.emplace_back(col, 1.0 / static_cast<double>(J));
    }
    DrawOptions d{options.draws, derive_seed(options.seed, 0x6A7E), 0.95};
    r.gate = aggregate_linear(r.mean_outcome.explored.models, all, d);
    r.gate.label = "GATE";
    r.gate_test = test_nonzero(r.gate, options.threshold);

    if (per_outcome) {
        r.averaged_outcome_means.assign(J, 0.0);
        std::size_t used = 0;
        for (const auto& cell : *per_outcome) {
            if (!cell.ok) continue;
            ++used;
            for (std::size_t j = 0; j < J; ++j)
                r.averaged_outcome_means[j] +=
                    cell.analysis.coefficients[static_cast<std::size_t>(design.treatment_columns[j])].mean;
        }
        for (auto& v : r.averaged_outcome_means) v /= static_cast<double>(std::max<std::size_t>(used, 1));
    }
    return r;
}

MeanOutcomeIdentity mean_outcome_identity(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X) {
    if (Y.rows() != X.rows() || Y.cols() < 1)
        fail(ErrorCode::invalid_argument, "responses and design disagree in rows");
    MeanOutcomeIdentity out;
    out.per_outcome.resize(X.cols(), Y.cols());
    for (Eigen::Index l = 0; l < Y.cols(); ++l)
        out.per_outcome.col(l) = fit_gaussian(Y.col(l), X).coefficients;
    out.averaged = out.per_outcome.rowwise().mean();
    out.mean_outcome = fit_gaussian(Y.rowwise().mean(), X).coefficients;
    out.max_abs_difference = (out.averaged - out.mean_outcome).lpNorm<Eigen::Infinity>();
    return out;
}

PartialCorrelation partial_correlation(const ModelSpace& space, const OutcomeAnalysis& analysis,
                                       const Eigen::VectorXd& y, std::size_t treatment,
                                       const DrawOptions& options) {
    const auto& design = space.design();
    if (analysis.family != Family::gaussian)
        fail(ErrorCode::unsupported, "partial correlations need a continuous (Gaussian) outcome");
    for (const auto& b : design.blocks)
        if (b.kind == BlockKind::interaction || b.kind == BlockKind::subgroup_main)
            fail(ErrorCode::unsupported, "partial correlations are defined without moderators");
    if (treatment >= design.treatment_columns.size())
        fail(ErrorCode::invalid_argument, "treatment index out of range");

    const int col = design.treatment_columns[treatment];
    // Residual variance of x_j regressed on y and every other design column.
    Eigen::MatrixXd R(design.n(), design.p());
    Eigen::Index next = 0;
    for (Eigen::Index c = 0; c < design.p(); ++c)
        if (c != col) R.col(next++) = design.X.col(c);
    R.col(next) = y;
    const auto xfit = fit_gaussian(design.X.col(col), R);

    PartialCorrelation out;
    out.treatment = design.treatment_names[treatment];
    out.residual_variance_x = xfit.dispersion;

    std::vector<MixtureComponent> comps;
    for (const auto& m : analysis.explored.models) {
        if (!m.valid || m.weight <= 0.0) continue;
        const int pos = m.position(col);
        if (pos < 0) continue;
        const double scale = std::sqrt(out.residual_variance_x / m.fit.dispersion);
        comps.push_back({m.weight, m.fit.coefficients[pos] * scale,
                         std::sqrt(m.fit.covariance(pos, pos)) * scale});
    }
    out.posterior = posterior_from_mixture(std::move(comps), options);
    out.posterior.label = "partial_cor_" + out.treatment;
    for (double d : out.posterior.draws)
        if (std::abs(d) > 1.0) ++out.bound_violations;
    return out;
}

}  // namespace bsca
