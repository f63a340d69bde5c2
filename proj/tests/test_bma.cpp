#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/bma.hpp"
#include "bsca/error.hpp"
#include "bsca/parallel.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace bsca;

namespace {

// Hand-built model over design columns {0, 1}: `with` includes column 1.
ScoredModel model(ModelId id, bool with, double weight, double b1, double se1) {
    ScoredModel m;
    m.id = id;
    m.weight = weight;
    m.columns = with ? std::vector<int>{0, 1} : std::vector<int>{0};
    const Eigen::Index k = with ? 2 : 1;
    m.fit.coefficients = Eigen::VectorXd::Zero(k);
    m.fit.covariance = Eigen::MatrixXd::Identity(k, k) * 0.01;
    if (with) {
        m.fit.coefficients[1] = b1;
        m.fit.covariance(1, 1) = se1 * se1;
    }
    return m;
}

}  // namespace

TEST_CASE("two-model mixture mean and inclusion") {
    const std::vector<ScoredModel> ms{model(1, true, 0.7, 2.0, 0.1), model(0, false, 0.3, 0.0, 0.0)};
    const auto post = aggregate(ms, 1, {2000, 1, 0.95});
    CHECK(post.mean == doctest::Approx(1.4));
    CHECK(post.inclusion == doctest::Approx(0.7));
    CHECK(post.point_mass == doctest::Approx(0.3));
    CHECK(post.draws.size() == 2000);
    CHECK(std::is_sorted(post.draws.begin(), post.draws.end()));
    CHECK(std::count(post.draws.begin(), post.draws.end(), 0.0) == 600);
}

TEST_CASE("a single model reproduces its MLE and is forced in") {
    const std::vector<ScoredModel> ms{model(0, true, 1.0, -0.8, 0.2)};
    const auto post = aggregate(ms, 1, {4000, 2, 0.95});
    CHECK(post.mean == doctest::Approx(-0.8));
    CHECK(post.inclusion == 1.0);
    CHECK(test_nonzero(post).reject);
    // Interval of a single Gaussian component.
    CHECK(post.lower == doctest::Approx(-0.8 - 1.959964 * 0.2).epsilon(2e-3));
    CHECK(post.upper == doctest::Approx(-0.8 + 1.959964 * 0.2).epsilon(2e-3));
}

TEST_CASE("weights must sum to one") {
    const std::vector<ScoredModel> ms{model(0, true, 0.5, 1.0, 0.1)};
    CHECK_THROWS_AS(aggregate(ms, 1), Error);
}

TEST_CASE("decision rule uses a strict inequality") {
    BmaPosterior p;
    p.inclusion = 0.96;
    CHECK(test_nonzero(p, 0.95).reject);
    p.inclusion = 0.95;
    CHECK_FALSE(test_nonzero(p, 0.95).reject);
}

TEST_CASE("mixture quantiles agree with brute-force sampling") {
    std::vector<MixtureComponent> comps{{0.45, 0.3, 0.1}, {0.25, 0.55, 0.2}, {0.2, -0.1, 0.05}};
    const auto post = posterior_from_mixture(comps, {20000, 7, 0.95});
    CHECK(post.point_mass == doctest::Approx(0.1));

    Rng rng(8);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> ref;
    ref.reserve(1'000'000);
    for (int i = 0; i < 1'000'000; ++i) {
        double u = uniform01(rng);
        double v = 0.0;
        for (const auto& c : comps) {
            if (u < c.weight) {
                v = c.mean + c.sd * N(rng);
                break;
            }
            u -= c.weight;
        }
        ref.push_back(v);
    }
    std::sort(ref.begin(), ref.end());
    auto q = [&](double p) { return ref[static_cast<std::size_t>(p * (ref.size() - 1))]; };
    CHECK(std::abs(post.lower - q(0.025)) < 0.005);
    CHECK(std::abs(post.upper - q(0.975)) < 0.005);
    double m = 0.0;
    for (const auto& c : comps) m += c.weight * c.mean;
    CHECK(post.mean == doctest::Approx(m));
}

TEST_CASE("tiny inclusion gives a degenerate interval") {
    const auto post = posterior_from_mixture({{0.01, 3.0, 0.1}}, {1000, 1, 0.95});
    CHECK(post.interval_degenerate);
    CHECK(post.lower == 0.0);
    CHECK(post.upper == 0.0);
}

TEST_CASE("draws are reproducible") {
    const std::vector<MixtureComponent> comps{{0.6, 1.0, 0.3}};
    const auto a = posterior_from_mixture(comps, {3000, 42, 0.95});
    const auto b = posterior_from_mixture(comps, {3000, 42, 0.95});
    CHECK(a.draws == b.draws);
}

TEST_CASE("odds ratios") {
    BmaPosterior zero;
    zero.draws.assign(100, 0.0);
    const auto one = report_odds_ratios(zero, Family::binomial);
    CHECK(one.point == 1.0);
    CHECK(one.draw_mean == 1.0);

    BmaPosterior p;
    p.mean = 0.631;
    p.lower = 0.5;
    p.upper = 0.7;
    p.draws = {0.5, 0.631, 0.7};
    const auto r = report_odds_ratios(p, Family::binomial);
    CHECK(r.point == doctest::Approx(1.88).epsilon(0.001));
    CHECK(r.lower == doctest::Approx(std::exp(0.5)));
    CHECK(r.upper == doctest::Approx(std::exp(0.7)));
    CHECK_THROWS_AS(report_odds_ratios(p, Family::gaussian), Error);
}

TEST_CASE("subgroup effects") {
    Rng rng(21);
    const auto data = testing::random_dataset(rng, {1, 1, 1, 1}, 400);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto& y = data.column("y1");
    const int xc = design.treatment_columns[0];
    const int block = design.interaction_block_of_treatment[0];
    REQUIRE(block >= 0);
    const int ic = design.blocks[static_cast<std::size_t>(block)].columns[0];
    Eigen::VectorXd g(1);
    g << 0.6;

    SUBCASE("models without the interaction collapse to the main effect") {
        std::vector<ScoredModel> ms;
        for (ModelId id = 0; id < (ModelId{1} << space.free_count()); ++id) {
            if (!space.satisfies_heredity(id) || space.includes_column(id, ic)) continue;
            ms.push_back(score_model(space, y, Family::gaussian, id, 1.0));
        }
        std::vector<double> e;
        for (const auto& m : ms) e.push_back(m.ebic);
        const auto w = model_weights(e);
        for (std::size_t i = 0; i < ms.size(); ++i) ms[i].weight = w[i];
        const auto se = subgroup_effect(ms, design, 0, g, {2000, 3, 0.95});
        const auto main = aggregate(ms, xc, {2000, 3, 0.95});
        CHECK(se.mean == doctest::Approx(main.mean));
        CHECK(se.draws == main.draws);
    }

    SUBCASE("one model: variance is the quadratic form and the population average is beta") {
        ModelId full = 0;
        for (int f = 0; f < space.free_count(); ++f) full |= ModelId{1} << f;
        auto m = score_model(space, y, Family::gaussian, full, 1.0);
        m.weight = 1.0;
        const int px = m.position(xc);
        const int pi = m.position(ic);
        const double b = m.fit.coefficients[px];
        const double d = m.fit.coefficients[pi];
        const auto& S = m.fit.covariance;
        const double var = S(px, px) + 2 * 0.6 * S(px, pi) + 0.36 * S(pi, pi);
        const auto se = subgroup_effect({m}, design, 0, g, {20000, 5, 0.95});
        CHECK(se.mean == doctest::Approx(b + 0.6 * d));
        CHECK(se.sd == doctest::Approx(std::sqrt(var)));

        // Monte Carlo oracle on the quadratic form.
        Rng r2(6);
        std::normal_distribution<double> N(0.0, 1.0);
        const Eigen::LLT<Eigen::Matrix2d> llt(
            (Eigen::Matrix2d() << S(px, px), S(px, pi), S(px, pi), S(pi, pi)).finished());
        double s2 = 0.0;
        const int draws = 1'000'000;
        for (int i = 0; i < draws; ++i) {
            const Eigen::Vector2d e = llt.matrixL() * Eigen::Vector2d(N(r2), N(r2));
            const double v = e[0] + 0.6 * e[1];
            s2 += v * v;
        }
        CHECK(s2 / draws == doctest::Approx(var).epsilon(0.01));

        // Member and non-member effects, weighted by population share, give beta.
        const auto& G = design.G;
        double share = 0.0;
        for (Eigen::Index i = 0; i < G.rows(); ++i) share += G(i, 0) > 0 ? 1.0 : 0.0;
        const double rho = share / static_cast<double>(G.rows());
        const double member = b + d * (1.0 - rho);
        const double non_member = b - d * rho;
        CHECK(rho * member + (1.0 - rho) * non_member == doctest::Approx(b).epsilon(1e-12));
    }
}
