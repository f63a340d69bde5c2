#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/error.hpp"
#include "bsca/multiout.hpp"
#include "bsca/sim.hpp"

#include "support.hpp"

#include <cmath>

using namespace bsca;

namespace {

AnalysisOptions quick() {
    AnalysisOptions o;
    o.draws = 2000;
    o.seed = 5;
    return o;
}

// Residual-residual correlation of x and y after projecting out W.
double residual_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& W) {
    const auto qr = W.colPivHouseholderQr();
    const Eigen::VectorXd rx = x - W * qr.solve(x);
    const Eigen::VectorXd ry = y - W * qr.solve(y);
    return rx.dot(ry) / std::sqrt(rx.squaredNorm() * ry.squaredNorm());
}

}  // namespace

TEST_CASE("one outcome: per-outcome table equals the single-outcome pipeline") {
    Rng rng(1);
    const auto data = testing::random_dataset(rng, {2, 1, 2, 0}, 200);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto cells = per_outcome_summary(data, space, quick());
    REQUIRE(cells.size() == 1);
    REQUIRE(cells[0].ok);
    auto local = quick();
    local.seed = derive_seed(local.seed, 10'000);
    const auto direct = analyze_outcome(space, data.column("y1"), "y1", Family::gaussian, local);
    for (int col : design.treatment_columns) {
        const auto c = static_cast<std::size_t>(col);
        CHECK(cells[0].analysis.coefficients[c].mean == direct.coefficients[c].mean);
        CHECK(cells[0].analysis.coefficients[c].draws == direct.coefficients[c].draws);
    }

    // With one outcome GATE_j is the single-outcome beta_j.
    const auto g = gate(data, space, quick(), &cells);
    for (std::size_t j = 0; j < design.treatment_columns.size(); ++j)
        CHECK(g.gate_treatment[j].mean == doctest::Approx(cells[0].analysis.coefficients[static_cast<std::size_t>(design.treatment_columns[j])].mean));
}

TEST_CASE("five treatments by eight outcomes fill forty cells") {
    Rng rng(2);
    const auto data = testing::random_dataset(rng, {5, 8, 1, 0}, 150);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto cells = per_outcome_summary(data, space, quick());
    REQUIRE(cells.size() == 8);
    std::size_t filled = 0;
    for (const auto& c : cells)
        if (c.ok) filled += design.treatment_columns.size();
    CHECK(filled == 40);
}

TEST_CASE("a failing outcome does not stop the others") {
    Rng rng(3);
    auto base = testing::random_dataset(rng, {1, 2, 1, 0}, 120);
    RoleConfig roles = base.roles();
    roles.outcomes.push_back({"flat", Family::binomial});
    auto names = base.names();
    std::vector<Eigen::VectorXd> cols;
    for (const auto& n : names) cols.push_back(base.column(n));
    // A binomial outcome perfectly separated by the treatment.
    Eigen::VectorXd sep = base.column("x1");
    names.push_back("flat");
    cols.push_back(sep);
    const Dataset data(roles, names, cols);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto cells = per_outcome_summary(data, space, quick());
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].ok);
    CHECK(cells[1].ok);
    CHECK_FALSE(cells[2].ok);
    CHECK(cells[2].code != ErrorCode::internal);
    CHECK_FALSE(cells[2].error.empty());
}

TEST_CASE("mean-outcome identity under one model") {
    Rng rng(4);
    for (int t = 0; t < 5; ++t) {
        const auto data = testing::random_dataset(rng, {3, 4, 2, 1}, 100 + 20 * t);
        const auto design = build_design(data);
        Eigen::MatrixXd Y(design.n(), 4);
        for (int l = 0; l < 4; ++l) Y.col(l) = data.column("y" + std::to_string(l + 1));
        const auto id = mean_outcome_identity(Y, design.X);
        CHECK(id.max_abs_difference <= 1e-10);
    }
}

TEST_CASE("GATE matrix scenario") {
    auto s = preset_scenario("5b", 77);
    CHECK(s.beta.sum() / static_cast<double>(s.beta.size()) == doctest::Approx(0.4875));
    s.n = 1000;
    const auto data = generate(s, 0);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto g = gate(data, space, quick());
    CHECK(std::abs(g.gate.mean - 0.4875) < 0.05);
    CHECK(g.gate_test.reject);
    double avg = 0.0;
    for (const auto& p : g.gate_treatment) avg += p.mean;
    CHECK(g.gate.mean == doctest::Approx(avg / 5.0).epsilon(1e-12));
}

TEST_CASE("GATE rejects non-Gaussian outcomes") {
    Rng rng(5);
    auto base = testing::random_dataset(rng, {1, 1, 1, 0}, 80);
    RoleConfig roles = base.roles();
    roles.outcomes[0].family = Family::binomial;
    Eigen::VectorXd y = (base.column("y1").array() > 0).cast<double>();
    const Dataset data(roles, {"x1", "z1", "y1"}, {base.column("x1"), base.column("z1"), y});
    const auto design = build_design(data);
    const ModelSpace space(design);
    try {
        gate(data, space, quick());
        FAIL("expected family error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::family);
    }
}

TEST_CASE("partial correlation matches the residual-correlation oracle") {
    Rng rng(6);
    std::normal_distribution<double> N(0.0, 1.0);
    const Eigen::Index n = 1000;
    Eigen::VectorXd x(n), z(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = N(rng);
        z[i] = 0.5 * x[i] + N(rng);
        y[i] = 0.3 * x[i] + 0.4 * z[i] + N(rng);
    }
    RoleConfig roles;
    roles.outcomes = {{"y", Family::gaussian}};
    roles.treatments = {{"x", TreatmentCoding::identity, 1.0}};
    roles.controls = {{"z", false}};
    const Dataset data(roles, {"y", "x", "z"}, {y, x, z});
    const auto design = build_design(data);
    SpacePolicy forced;
    forced.forced = {"z"};
    const ModelSpace space(design, forced);
    const auto a = analyze_outcome(space, y, "y", Family::gaussian, quick());
    const auto pc = partial_correlation(space, a, y, 0, {4000, 9, 0.95});

    const int xc = design.treatment_columns[0];
    Eigen::MatrixXd W(n, design.p() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < design.p(); ++c)
        if (c != xc) W.col(k++) = design.X.col(c);
    const double oracle = residual_correlation(design.X.col(xc), y, W);
    CHECK(std::abs(pc.posterior.mean - oracle) < 0.01);
    CHECK(pc.bound_violations == 0);
}

TEST_CASE("partial correlation is near zero under conditional independence") {
    Rng rng(7);
    std::normal_distribution<double> N(0.0, 1.0);
    const Eigen::Index n = 5000;
    Eigen::VectorXd x(n), z(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = N(rng);
        z[i] = 0.5 * x[i] + N(rng);
        y[i] = 0.4 * z[i] + N(rng);
    }
    RoleConfig roles;
    roles.outcomes = {{"y", Family::gaussian}};
    roles.treatments = {{"x", TreatmentCoding::identity, 1.0}};
    roles.controls = {{"z", false}};
    const Dataset data(roles, {"y", "x", "z"}, {y, x, z});
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto a = analyze_outcome(space, y, "y", Family::gaussian, quick());
    const auto pc = partial_correlation(space, a, y, 0, {4000, 9, 0.95});
    CHECK(std::abs(pc.posterior.mean) < 0.03);
}

TEST_CASE("partial correlations are refused with moderators") {
    Rng rng(8);
    const auto data = testing::random_dataset(rng, {1, 1, 1, 1}, 150);
    const auto design = build_design(data);
    const ModelSpace space(design);
    const auto a = analyze_outcome(space, data.column("y1"), "y1", Family::gaussian, quick());
    CHECK_THROWS_AS(partial_correlation(space, a, data.column("y1"), 0, {}), Error);
}
