#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/error.hpp"
#include "bsca/modelspace.hpp"

#include "support.hpp"

#include <cmath>
#include <limits>

using namespace bsca;

TEST_CASE("EBIC arithmetic") {
    // 100 + 2 log 100 + 2 log 45, with 2 log 45 = 7.6133
    CHECK(ebic(-50.0, 2, 10, 100, 1.0) == doctest::Approx(116.8236654).epsilon(1e-9));
    CHECK(ebic(-50.0, 0, 10, 100, 1.0) == 100.0);
    CHECK(ebic(-50.0, 3, 10, 100, 0.0) == doctest::Approx(100.0 + 3 * std::log(100.0)));
}

TEST_CASE("model weights") {
    const auto eq = model_weights({3.0, 3.0});
    CHECK(eq[0] == doctest::Approx(0.5));
    const auto two = model_weights({10.0, 12.0});
    CHECK(two[1] / two[0] == doctest::Approx(std::exp(-1.0)));
    const auto inf = model_weights({10.0, std::numeric_limits<double>::infinity()});
    CHECK(inf[0] == 1.0);
    CHECK(inf[1] == 0.0);
    // Large EBICs must not underflow to all zeros.
    const auto big = model_weights({5000.0, 5002.0});
    CHECK(big[0] + big[1] == doctest::Approx(1.0));
}

TEST_CASE("ten free controls enumerate 1024 models") {
    Rng rng(10);
    const auto data = testing::random_dataset(rng, {2, 1, 10, 0}, 300);
    const auto design = build_design(data);
    const ModelSpace space(design);
    CHECK(space.free_count() == 10);
    const auto res = enumerate_models(space, data.column("y1"), Family::gaussian);
    CHECK(res.models.size() == 1024);
    double total = 0.0;
    for (const auto& m : res.models) total += m.weight;
    CHECK(total == doctest::Approx(1.0));
    for (std::size_t i = 1; i < res.models.size(); ++i) CHECK(res.models[i - 1].ebic <= res.models[i].ebic);
}

TEST_CASE("no free blocks gives one model with weight one") {
    Rng rng(11);
    const auto data = testing::random_dataset(rng, {1, 1, 2, 0}, 100);
    const auto design = build_design(data);
    SpacePolicy policy;
    policy.forced = {"z1", "z2"};
    const ModelSpace space(design, policy);
    CHECK(space.free_count() == 0);
    const auto res = enumerate_models(space, data.column("y1"), Family::gaussian);
    REQUIRE(res.models.size() == 1);
    CHECK(res.models[0].weight == 1.0);
}

TEST_CASE("strong heredity excludes interactions without their parents") {
    Rng rng(12);
    const auto data = testing::random_dataset(rng, {1, 1, 1, 1}, 200);
    const auto design = build_design(data);
    SpacePolicy policy;
    policy.treatments_forced = false;
    const ModelSpace space(design, policy);
    const int inter = design.block_index("x1:g1");
    REQUIRE(inter >= 0);
    const int ib = space.free_bit(inter);
    const int xb = space.free_bit(design.block_index("x1"));
    const int gb = space.free_bit(design.block_index("g1"));
    REQUIRE(ib >= 0);
    CHECK_FALSE(space.satisfies_heredity(ModelId{1} << ib));
    CHECK(space.satisfies_heredity((ModelId{1} << ib) | (ModelId{1} << xb) | (ModelId{1} << gb)));
    // Four free blocks (x1, z1, g1, x1:g1): 16 subsets, 6 of which break heredity.
    CHECK(space.count_valid(4096) == 10);
    CHECK(enumerate_models(space, data.column("y1"), Family::gaussian).models.size() == 10);
}

TEST_CASE("enumeration cap") {
    Rng rng(13);
    const auto data = testing::random_dataset(rng, {1, 1, 6, 0}, 100);
    const auto design = build_design(data);
    const ModelSpace space(design);
    EnumerateOptions opt;
    opt.cap = 32;
    try {
        enumerate_models(space, data.column("y1"), Family::gaussian, opt);
        FAIL("expected cap error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::cap_exceeded);
    }
}

TEST_CASE("strongly supported block dominates") {
    Rng rng(14);
    const auto data = testing::random_dataset(rng, {1, 1, 1, 0}, 1000);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto res = enumerate_models(space, data.column("y1"), Family::gaussian);
    const auto inc = block_inclusion(space, res);
    REQUIRE(inc.size() == 1);
    CHECK(inc[0] > 0.99);
}

TEST_CASE("single free block: both models, two-model weights") {
    Rng rng(15);
    const auto data = testing::random_dataset(rng, {1, 1, 1, 0}, 60);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto& y = data.column("y1");
    const auto res = enumerate_models(space, y, Family::gaussian);
    REQUIRE(res.models.size() == 2);
    const auto a = score_model(space, y, Family::gaussian, 0, 1.0);
    const auto b = score_model(space, y, Family::gaussian, 1, 1.0);
    const double wb = 1.0 / (1.0 + std::exp(-(a.ebic - b.ebic) / 2.0));
    for (const auto& m : res.models) CHECK(m.weight == doctest::Approx(m.id == 1 ? wb : 1.0 - wb));

    GibbsOptions g;
    g.iterations = 3000;
    g.burnin = 100;
    g.seed = 3;
    const auto gs = gibbs_search(space, y, Family::gaussian, g);
    CHECK(gs.models.size() == 2);
}

TEST_CASE("Gibbs matches enumeration on a small space") {
    Rng rng(16);
    const auto data = testing::random_dataset(rng, {1, 1, 5, 0}, 80);
    const auto design = build_design(data);
    const ModelSpace space(design);
    // Weak control effects so the posterior is spread out.
    Eigen::VectorXd y = data.column("y1");
    std::normal_distribution<double> N(0.0, 3.0);
    for (auto& v : y) v += N(rng);
    const auto exact = block_inclusion(space, enumerate_models(space, y, Family::gaussian));
    GibbsOptions g;
    g.iterations = 20000;
    g.burnin = 1000;
    g.seed = 99;
    const auto gs = gibbs_search(space, y, Family::gaussian, g);
    REQUIRE(gs.visit_inclusion.size() == exact.size());
    for (std::size_t f = 0; f < exact.size(); ++f) CHECK(std::abs(gs.visit_inclusion[f] - exact[f]) < 0.02);

    const auto again = gibbs_search(space, y, Family::gaussian, g);
    CHECK(again.visit_inclusion == gs.visit_inclusion);
    REQUIRE(again.models.size() == gs.models.size());
    for (std::size_t i = 0; i < gs.models.size(); ++i) {
        CHECK(again.models[i].id == gs.models[i].id);
        CHECK(again.models[i].visits == gs.models[i].visits);
    }
}
