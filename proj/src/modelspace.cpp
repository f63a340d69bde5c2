#include "bsca/modelspace.hpp"

#include "bsca/error.hpp"
#include "bsca/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace bsca {

const char* engine_name(Engine e) noexcept {
    return e == Engine::enumerate ? "enumerate" : "gibbs";
}

Engine parse_engine(std::string_view s) {
    if (s == "enumerate" || s == "enumeration") return Engine::enumerate;
    if (s == "gibbs") return Engine::gibbs;
    fail(ErrorCode::config, "unknown engine '" + std::string(s) + "'");
}

ModelSpace::ModelSpace(const CodedDesign& design, const SpacePolicy& policy)
    : design_(&design), strong_heredity_(policy.strong_heredity) {
    const auto& blocks = design.blocks;
    inclusion_.resize(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto kind = blocks[b].kind;
        if (kind == BlockKind::intercept)
            inclusion_[b] = Inclusion::forced;
        else if (kind == BlockKind::treatment && policy.treatments_forced)
            inclusion_[b] = Inclusion::forced;
        else
            inclusion_[b] = Inclusion::free;
    }
    auto lookup = [&](const std::string& name) {
        const int b = design.block_index(name);
        if (b < 0) fail(ErrorCode::config, "model-space policy names unknown block '" + name + "'");
        return static_cast<std::size_t>(b);
    };
    for (const auto& name : policy.free) {
        const auto b = lookup(name);
        if (blocks[b].kind == BlockKind::intercept)
            fail(ErrorCode::config, "the intercept is always forced in");
        inclusion_[b] = Inclusion::free;
    }
    for (const auto& name : policy.forced) inclusion_[lookup(name)] = Inclusion::forced;

    free_bit_.assign(blocks.size(), -1);
    block_size_.resize(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        block_size_[b] = static_cast<int>(blocks[b].columns.size());
        if (inclusion_[b] == Inclusion::free) {
            free_bit_[b] = static_cast<int>(free_blocks_.size());
            free_blocks_.push_back(static_cast<int>(b));
            p_free_ += block_size_[b];
        }
    }
    if (free_blocks_.size() > 62)
        fail(ErrorCode::config, "at most 62 free blocks are supported");

    if (strong_heredity_) {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (inclusion_[b] != Inclusion::forced) continue;
            for (int parent : blocks[b].parents)
                if (inclusion_[static_cast<std::size_t>(parent)] != Inclusion::forced)
                    fail(ErrorCode::config, "forced block '" + blocks[b].name +
                                                "' requires its parent '" +
                                                blocks[static_cast<std::size_t>(parent)].name +
                                                "' to be forced as well");
        }
    }
}

int ModelSpace::free_bit(int block) const { return free_bit_.at(static_cast<std::size_t>(block)); }

int ModelSpace::k_free(ModelId model) const {
    int k = 0;
    for (std::size_t f = 0; f < free_blocks_.size(); ++f)
        if (model >> f & 1U) k += block_size_[static_cast<std::size_t>(free_blocks_[f])];
    return k;
}

bool ModelSpace::includes_block(ModelId model, int block) const {
    const auto b = static_cast<std::size_t>(block);
    if (inclusion_.at(b) == Inclusion::forced) return true;
    return (model >> free_bit_[b]) & 1U;
}

bool ModelSpace::includes_column(ModelId model, int column) const {
    return includes_block(model, design_->column_block.at(static_cast<std::size_t>(column)));
}

bool ModelSpace::satisfies_heredity(ModelId model) const {
    if (free_blocks_.size() < 64 && (model >> free_blocks_.size()) != 0) return false;
    if (!strong_heredity_) return true;
    for (std::size_t f = 0; f < free_blocks_.size(); ++f) {
        if (!(model >> f & 1U)) continue;
        for (int parent : design_->blocks[static_cast<std::size_t>(free_blocks_[f])].parents)
            if (!includes_block(model, parent)) return false;
    }
    return true;
}

std::vector<int> ModelSpace::columns(ModelId model) const {
    std::vector<int> cols;
    for (std::size_t b = 0; b < inclusion_.size(); ++b)
        if (includes_block(model, static_cast<int>(b)))
            for (int c : design_->blocks[b].columns) cols.push_back(c);
    std::sort(cols.begin(), cols.end());
    return cols;
}

std::uint64_t ModelSpace::count_valid(std::uint64_t limit) const {
    const auto f = free_blocks_.size();
    if (f > 40) return limit + 1;
    std::uint64_t count = 0;
    const std::uint64_t total = std::uint64_t{1} << f;
    for (ModelId m = 0; m < total; ++m) {
        if (satisfies_heredity(m) && ++count > limit) return count;
    }
    return count;
}

std::vector<ModelId> ModelSpace::valid_models() const {
    std::vector<ModelId> out;
    const std::uint64_t total = std::uint64_t{1} << free_blocks_.size();
    for (ModelId m = 0; m < total; ++m)
        if (satisfies_heredity(m)) out.push_back(m);
    return out;
}

int ScoredModel::position(int column) const {
    auto it = std::lower_bound(columns.begin(), columns.end(), column);
    return (it != columns.end() && *it == column) ? static_cast<int>(it - columns.begin()) : -1;
}

double ebic(double loglik, int k_free, int p_free, std::size_t n, double gamma) {
    if (k_free < 0 || k_free > p_free)
        fail(ErrorCode::invalid_argument, "EBIC needs 0 <= k_free <= p_free");
    const double log_binom = std::lgamma(p_free + 1.0) - std::lgamma(k_free + 1.0) -
                             std::lgamma(p_free - k_free + 1.0);
    return -2.0 * loglik + k_free * std::log(static_cast<double>(n)) + 2.0 * gamma * log_binom;
}

std::vector<double> model_weights(const std::vector<double>& ebics) {
    double best = std::numeric_limits<double>::infinity();
    for (double e : ebics)
        if (std::isfinite(e)) best = std::min(best, e);
    if (!std::isfinite(best)) fail(ErrorCode::no_valid_model, "no model has a finite EBIC");
    std::vector<double> w(ebics.size(), 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < ebics.size(); ++s) {
        if (!std::isfinite(ebics[s])) continue;
        w[s] = std::exp(-0.5 * (ebics[s] - best));
        total += w[s];
    }
    for (double& v : w) v /= total;
    return w;
}

ScoredModel score_model(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                        ModelId model, double gamma) {
    ScoredModel s;
    s.id = model;
    s.columns = space.columns(model);
    const auto& X = space.design().X;
    try {
        Eigen::MatrixXd sub = X(Eigen::all, s.columns);
        s.fit = fit_glm(y, sub, family);
        if (s.fit.degenerate) {
            s.valid = false;
            s.warning = "zero residual variance";
        }
    } catch (const Error& e) {
        s.valid = false;
        s.warning = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    s.ebic = s.valid ? ebic(s.fit, space.k_free(model), space.p_free(), gamma)
                     : std::numeric_limits<double>::infinity();
    return s;
}

namespace {

void finalize(ExploreResult& result) {
    std::vector<double> ebics;
    ebics.reserve(result.models.size());
    for (const auto& m : result.models) ebics.push_back(m.ebic);
    const auto w = model_weights(ebics);
    for (std::size_t s = 0; s < w.size(); ++s) result.models[s].weight = w[s];
    std::sort(result.models.begin(), result.models.end(), [](const ScoredModel& a, const ScoredModel& b) {
        if (a.ebic != b.ebic) return a.ebic < b.ebic;
        return a.id < b.id;
    });
    for (const auto& m : result.models)
        if (!m.valid) result.warnings.push_back("model " + std::to_string(m.id) + " given weight 0: " + m.warning);
}

}  // namespace

ExploreResult enumerate_models(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                               const EnumerateOptions& options) {
    const auto count = space.count_valid(options.cap);
    if (count > options.cap)
        fail(ErrorCode::cap_exceeded, "model space has more than " + std::to_string(options.cap) +
                                          " heredity-valid models; use the gibbs engine");
    const auto ids = space.valid_models();
    ExploreResult result;
    result.engine = Engine::enumerate;
    result.models.resize(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        result.models[i] = score_model(space, y, family, ids[i], options.gamma);
    });
    finalize(result);
    return result;
}

ExploreResult gibbs_search(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                           const GibbsOptions& options) {
    if (options.iterations <= options.burnin)
        fail(ErrorCode::invalid_argument, "gibbs iterations must exceed burn-in");

    std::map<ModelId, ScoredModel> cache;
    auto score = [&](ModelId m) -> const ScoredModel& {
        auto it = cache.find(m);
        if (it == cache.end())
            it = cache.emplace(m, score_model(space, y, family, m, options.gamma)).first;
        return it->second;
    };

    Rng rng(options.seed);
    const int F = space.free_count();
    ModelId state = 0;  // every free block off; always heredity-valid
    score(state);
    std::map<ModelId, std::uint64_t> visited{{state, 0}};
    std::vector<std::uint64_t> on_count(static_cast<std::size_t>(F), 0);

    for (std::size_t it = 0; it < options.iterations; ++it) {
        for (int f = 0; f < F; ++f) {
            const ModelId bit = ModelId{1} << f;
            const ModelId with = state | bit;
            const ModelId without = state & ~bit;
            const bool with_ok = space.satisfies_heredity(with);
            const bool without_ok = space.satisfies_heredity(without);
            double p_with;
            if (!with_ok) {
                p_with = 0.0;
            } else if (!without_ok) {
                p_with = 1.0;
            } else {
                const double e1 = score(with).ebic;
                const double e0 = score(without).ebic;
                if (!std::isfinite(e1) && !std::isfinite(e0))
                    p_with = 0.5;
                else if (!std::isfinite(e1))
                    p_with = 0.0;
                else if (!std::isfinite(e0))
                    p_with = 1.0;
                else
                    p_with = 1.0 / (1.0 + std::exp(0.5 * (e1 - e0)));
            }
            state = uniform01(rng) < p_with ? with : without;
            visited.try_emplace(state, 0);
        }
        if (it >= options.burnin) {
            ++visited[state];
            for (int f = 0; f < F; ++f)
                if (state >> f & 1U) ++on_count[static_cast<std::size_t>(f)];
        }
    }

    ExploreResult result;
    result.engine = Engine::gibbs;
    result.iterations = options.iterations;
    result.burnin = options.burnin;
    const double kept = static_cast<double>(options.iterations - options.burnin);
    for (auto c : on_count) result.visit_inclusion.push_back(static_cast<double>(c) / kept);
    for (const auto& [id, visits] : visited) {
        ScoredModel m = score(id);
        m.visits = visits;
        result.models.push_back(std::move(m));
    }
    finalize(result);
    return result;
}

std::vector<double> block_inclusion(const ModelSpace& space, const ExploreResult& result) {
    std::vector<double> p(static_cast<std::size_t>(space.free_count()), 0.0);
    for (const auto& m : result.models)
        for (int f = 0; f < space.free_count(); ++f)
            if (m.id >> f & 1U) p[static_cast<std::size_t>(f)] += m.weight;
    return p;
}

}  // namespace bsca
