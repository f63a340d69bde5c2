#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/error.hpp"
#include "bsca/sca.hpp"
#include "bsca/sim.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace bsca;

namespace {

SimScenario scenario_one(std::uint64_t seed, std::size_t n) {
    auto s = preset_scenario("1", seed);
    s.n = n;
    return s;
}

}  // namespace

TEST_CASE("sample median") {
    CHECK(sample_median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(sample_median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK_THROWS_AS(parse_null_method("jackknife"), Error);
    CHECK(std::string(null_method_name(parse_null_method("permutation"))) == "permutation");
}

TEST_CASE("one control gives two specifications") {
    const auto data = generate(scenario_one(1, 200), 0);
    const auto design = build_design(data, {false, true});
    const auto specs = enumerate_specs(data, design);
    REQUIRE(specs.size() == 2);
    const auto curve = run_curve(specs, data, design);
    CHECK(curve.entries.size() == 2);
    CHECK(curve.entries[0].estimate <= curve.entries[1].estimate);
    CHECK(spec_label(specs[0], design) != spec_label(specs[1], design));

    SpecGridOptions opt;
    opt.max_specs = 1;
    CHECK_THROWS_AS(enumerate_specs(data, design, opt), Error);
}

TEST_CASE("omitted-variable bias: curve of 1 and 0, median near one half") {
    const auto data = generate(scenario_one(2, 20000), 0);
    const auto design = build_design(data, {false, true});
    const auto specs = enumerate_specs(data, design);
    const auto curve = run_curve(specs, data, design);
    REQUIRE(curve.entries.size() == 2);
    CHECK(std::abs(curve.entries[0].estimate) < 0.03);
    CHECK(std::abs(curve.entries[1].estimate - 1.0) < 0.03);
    CHECK(std::abs(curve.median - 0.5) < 0.03);
}

TEST_CASE("median test rejects under omitted-variable bias and is reproducible") {
    const auto data = generate(scenario_one(3, 1000), 0);
    const auto design = build_design(data, {false, true});
    const auto curve = run_curve(enumerate_specs(data, design), data, design);
    for (auto method : {NullMethod::bootstrap, NullMethod::permutation}) {
        MedianTestOptions opt;
        opt.method = method;
        opt.draws = 200;
        opt.seed = 17;
        const auto a = median_test(curve, data, design, opt);
        const auto b = median_test(curve, data, design, opt);
        CHECK(a.p_value < 0.05);
        CHECK(a.p_value == b.p_value);
        CHECK(a.null_medians == b.null_medians);
        CHECK(a.method == method);
    }
    MedianTestOptions few;
    few.draws = 10;
    CHECK_THROWS_AS(median_test(curve, data, design, few), Error);
}

TEST_CASE("duplicate specs give identical estimates") {
    const auto data = generate(scenario_one(4, 300), 0);
    const auto design = build_design(data, {false, true});
    auto specs = enumerate_specs(data, design);
    specs.push_back(specs[0]);
    const auto curve = run_curve(specs, data, design);
    double e0 = 0, e2 = 0;
    for (const auto& e : curve.entries) {
        if (e.spec == 0) e0 = e.estimate;
        if (e.spec == 2) e2 = e.estimate;
    }
    CHECK(e0 == e2);
}

TEST_CASE("permutation p-values are roughly uniform under exchangeability") {
    // Treatment independent of everything, one spec without controls.
    std::vector<double> ps;
    for (std::size_t r = 0; r < 60; ++r) {
        Rng rng(derive_seed(1234, r));
        std::normal_distribution<double> N(0.0, 1.0);
        Eigen::VectorXd y(80), x(80), z(80);
        for (Eigen::Index i = 0; i < 80; ++i) {
            x[i] = N(rng);
            z[i] = N(rng);
            y[i] = N(rng);
        }
        RoleConfig roles;
        roles.outcomes = {{"y", Family::gaussian}};
        roles.treatments = {{"x", TreatmentCoding::identity, 1.0}};
        roles.controls = {{"z", false}};
        const Dataset data(roles, {"y", "x", "z"}, {y, x, z});
        const auto design = build_design(data, {false, true});
        SpecDefinition spec;
        spec.outcome = "y";
        spec.treatments = {0};
        const auto curve = run_curve({spec}, data, design);
        MedianTestOptions opt;
        opt.method = NullMethod::permutation;
        opt.draws = 199;
        opt.seed = derive_seed(99, r);
        ps.push_back(median_test(curve, data, design, opt).p_value);
    }
    // Kolmogorov-Smirnov distance to U(0,1); 10% critical value for n=60 is about 0.155.
    std::sort(ps.begin(), ps.end());
    double d = 0.0;
    const double m = static_cast<double>(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        d = std::max({d, std::abs(ps[i] - static_cast<double>(i) / m), std::abs(static_cast<double>(i + 1) / m - ps[i])});
    CHECK(d < 0.155);
}
