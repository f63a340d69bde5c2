#pragma once

// The specification lattice: which design blocks a model may switch on and
// off, EBIC scoring, and the two exploration engines (full enumeration and
// systematic-scan Gibbs sampling over block-inclusion indicators).

#include "bsca/dataset.hpp"
#include "bsca/glm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bsca {

// Bitmask over the free blocks of a ModelSpace (bit f = free block f).
using ModelId = std::uint64_t;

enum class Inclusion { forced, free };

struct SpacePolicy {
    bool treatments_forced = true;
    bool strong_heredity = true;
    std::vector<std::string> forced;  // block names, override the defaults
    std::vector<std::string> free;
};

class ModelSpace {
public:
    ModelSpace(const CodedDesign& design, const SpacePolicy& policy = {});

    std::size_t block_count() const noexcept { return inclusion_.size(); }
    Inclusion inclusion(int block) const { return inclusion_.at(static_cast<std::size_t>(block)); }

    // Design block indices of the free blocks, in bit order.
    const std::vector<int>& free_blocks() const noexcept { return free_blocks_; }
    int free_count() const noexcept { return static_cast<int>(free_blocks_.size()); }
    int free_bit(int block) const;  // -1 for forced blocks

    // Total number of coefficients in free blocks.
    int p_free() const noexcept { return p_free_; }
    int k_free(ModelId model) const;

    bool satisfies_heredity(ModelId model) const;
    bool includes_block(ModelId model, int block) const;
    bool includes_column(ModelId model, int column) const;

    // Sorted design column indices used by the model.
    std::vector<int> columns(ModelId model) const;

    // Number of heredity-valid models, saturating at `limit + 1`.
    std::uint64_t count_valid(std::uint64_t limit) const;
    std::vector<ModelId> valid_models() const;

    const CodedDesign& design() const noexcept { return *design_; }

private:
    const CodedDesign* design_;
    std::vector<Inclusion> inclusion_;
    std::vector<int> free_blocks_;
    std::vector<int> free_bit_;
    std::vector<int> block_size_;
    bool strong_heredity_ = true;
    int p_free_ = 0;
};

struct ScoredModel {
    ModelId id = 0;
    std::vector<int> columns;
    GlmFit fit;
    double ebic = 0.0;
    double weight = 0.0;
    bool valid = true;
    std::string warning;
    std::uint64_t visits = 0;  // Gibbs post-burn-in visits

    // Position of a design column in fit.coefficients, or -1.
    int position(int column) const;
};

enum class Engine { enumerate, gibbs };

const char* engine_name(Engine e) noexcept;
Engine parse_engine(std::string_view s);

struct ExploreResult {
    Engine engine = Engine::enumerate;
    std::vector<ScoredModel> models;  // sorted by (ebic, id)
    std::vector<std::string> warnings;
    std::size_t iterations = 0;
    std::size_t burnin = 0;
    // Gibbs only: post-burn-in share of sweeps each free block was on.
    std::vector<double> visit_inclusion;
};

double ebic(double loglik, int k_free, int p_free, std::size_t n, double gamma);
inline double ebic(const GlmFit& fit, int k_free, int p_free, double gamma) {
    return ebic(fit.loglik, k_free, p_free, static_cast<std::size_t>(fit.n), gamma);
}

// Normalized exp(-EBIC/2) weights; infinite EBIC gets weight 0.
std::vector<double> model_weights(const std::vector<double>& ebics);

struct ScoreOptions {
    double gamma = 1.0;
};

struct EnumerateOptions : ScoreOptions {
    std::uint64_t cap = 4096;
};

struct GibbsOptions : ScoreOptions {
    std::size_t iterations = 20000;  // full sweeps over the free blocks
    std::size_t burnin = 1000;
    std::uint64_t seed = 0;
};

ScoredModel score_model(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                        ModelId model, double gamma);

ExploreResult enumerate_models(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                               const EnumerateOptions& options = {});

ExploreResult gibbs_search(const ModelSpace& space, const Eigen::VectorXd& y, Family family,
                           const GibbsOptions& options);

// Posterior inclusion probability of every free block, from model weights.
std::vector<double> block_inclusion(const ModelSpace& space, const ExploreResult& result);

}  // namespace bsca
