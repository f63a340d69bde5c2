#include "bsca/bma.hpp"

#include "bsca/error.hpp"
#include "bsca/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsca {

double BmaPosterior::quantile(double q) const {
    if (draws.empty()) return 0.0;
    if (q <= 0.0) return draws.front();
    if (q >= 1.0) return draws.back();
    const double h = q * static_cast<double>(draws.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, draws.size() - 1);
    return draws[lo] + (h - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
}

namespace {

// Largest-remainder apportionment of `total` draws by weight.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = weights[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        used += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; used < total && r < remainders.size(); ++r, ++used)
        ++counts[remainders[r].second];
    return counts;
}

void check_weights(const std::vector<ScoredModel>& models) {
    double total = 0.0;
    for (const auto& m : models) total += m.weight;
    if (std::abs(total - 1.0) > 1e-9)
        fail(ErrorCode::invalid_argument, "model weights must sum to 1 (got " + std::to_string(total) + ")");
}

}  // namespace

namespace {

// point_mass < 0: take it as 1 - sum of component weights.
BmaPosterior build_posterior(std::vector<MixtureComponent> components, double point_mass,
                             const DrawOptions& options) {
    BmaPosterior post;
    post.level = options.level;
    post.components = std::move(components);
    double inclusion = 0.0;
    double mean = 0.0;
    double second = 0.0;
    for (const auto& c : post.components) {
        inclusion += c.weight;
        mean += c.weight * c.mean;
        second += c.weight * (c.sd * c.sd + c.mean * c.mean);
    }
    // Summing the excluded weight keeps forced terms at exactly 1.
    post.inclusion = std::clamp(point_mass >= 0.0 ? 1.0 - point_mass : inclusion, 0.0, 1.0);
    post.point_mass = 1.0 - post.inclusion;
    post.mean = mean;
    post.sd = std::sqrt(std::max(0.0, second - mean * mean));

    // Stratified draws: each mixture part gets its apportioned share of the
    // draws, placed at jittered equally spaced quantiles of its distribution.
    std::vector<double> weights{post.point_mass};
    for (const auto& c : post.components) weights.push_back(c.weight);
    const auto counts = apportion(weights, options.draws);
    Rng rng(options.seed);
    boost::math::normal_distribution<double> std_normal;
    post.draws.reserve(options.draws);
    post.draws.insert(post.draws.end(), counts[0], 0.0);
    for (std::size_t c = 0; c < post.components.size(); ++c) {
        const auto m = counts[c + 1];
        const auto& comp = post.components[c];
        for (std::size_t i = 0; i < m; ++i) {
            double u = (static_cast<double>(i) + uniform01(rng)) / static_cast<double>(m);
            u = std::clamp(u, 1e-300, 1.0 - 1e-16);
            const double z = comp.sd > 0.0 ? boost::math::quantile(std_normal, u) : 0.0;
            post.draws.push_back(comp.mean + comp.sd * z);
        }
    }
    std::sort(post.draws.begin(), post.draws.end());

    const double tail = 0.5 * (1.0 - options.level);
    if (post.inclusion < 0.025) {
        post.interval_degenerate = true;
        post.lower = post.upper = 0.0;
    } else {
        post.lower = post.quantile(tail);
        post.upper = post.quantile(1.0 - tail);
    }
    return post;
}

}  // namespace

BmaPosterior posterior_from_mixture(std::vector<MixtureComponent> components,
                                    const DrawOptions& options) {
    return build_posterior(std::move(components), -1.0, options);
}

BmaPosterior aggregate_linear(const std::vector<ScoredModel>& models,
                              const LinearCombination& combination, const DrawOptions& options) {
    check_weights(models);
    std::vector<MixtureComponent> components;
    double excluded = 0.0;
    for (const auto& m : models) {
        if (!m.valid || m.weight <= 0.0) continue;
        std::vector<std::pair<int, double>> present;
        for (const auto& [col, a] : combination) {
            const int pos = m.position(col);
            if (pos >= 0 && a != 0.0) present.emplace_back(pos, a);
        }
        if (present.empty()) {
            excluded += m.weight;
            continue;
        }
        double mean = 0.0;
        double var = 0.0;
        for (const auto& [pi, ai] : present) {
            mean += ai * m.fit.coefficients[pi];
            for (const auto& [pj, aj] : present) var += ai * aj * m.fit.covariance(pi, pj);
        }
        components.push_back({m.weight, mean, std::sqrt(std::max(0.0, var))});
    }
    return build_posterior(std::move(components), excluded, options);
}

BmaPosterior aggregate(const std::vector<ScoredModel>& models, int column, const DrawOptions& options) {
    return aggregate_linear(models, {{column, 1.0}}, options);
}

TestDecision test_nonzero(const BmaPosterior& posterior, double threshold) {
    return {posterior.inclusion > threshold, posterior.inclusion, threshold};
}

BmaPosterior subgroup_effect(const std::vector<ScoredModel>& models, const CodedDesign& design,
                             std::size_t treatment, const Eigen::VectorXd& g, const DrawOptions& options) {
    if (treatment >= design.treatment_columns.size())
        fail(ErrorCode::invalid_argument, "treatment index out of range");
    const int block = design.interaction_block_of_treatment[treatment];
    if (block < 0) fail(ErrorCode::invalid_argument, "treatment has no interaction block");
    const auto& cols = design.blocks[static_cast<std::size_t>(block)].columns;
    if (static_cast<std::size_t>(g.size()) != cols.size())
        fail(ErrorCode::invalid_argument, "subgroup vector has the wrong length");
    LinearCombination comb{{design.treatment_columns[treatment], 1.0}};
    for (std::size_t k = 0; k < cols.size(); ++k) comb.emplace_back(cols[k], g[static_cast<Eigen::Index>(k)]);
    auto post = aggregate_linear(models, comb, options);
    post.label = design.treatment_names[treatment];
    return post;
}

OddsRatioSummary report_odds_ratios(const BmaPosterior& posterior, Family family) {
    if (family != Family::binomial)
        fail(ErrorCode::family, "odds ratios are only defined for binomial outcomes");
    OddsRatioSummary out;
    out.point = std::exp(posterior.mean);
    out.lower = std::exp(posterior.lower);
    out.upper = std::exp(posterior.upper);
    if (!posterior.draws.empty()) {
        double s = 0.0;
        for (double d : posterior.draws) s += std::exp(d);
        out.draw_mean = s / static_cast<double>(posterior.draws.size());
    }
    return out;
}

}  // namespace bsca
