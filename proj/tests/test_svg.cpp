#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bsca/svg.hpp"

#include <cmath>
#include <limits>

using namespace bsca::svg;

namespace {

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

SingleOutcomeFigure sample_figure() {
    SingleOutcomeFigure f;
    f.title = "wellbeing <all>";
    DensitySeries d;
    d.label = "bullied";
    d.edges = {-1.0, -0.5, 0.0, 0.5};
    d.density = {0.2, 0.8, 0.4};
    d.point_mass = 0.3;
    d.mean = -0.3;
    d.lower = -0.9;
    d.upper = 0.0;
    f.series = {d};
    f.block_names = {"age", "income"};
    for (std::size_t r = 1; r <= 3; ++r) {
        ModelPoint m;
        m.rank = r;
        m.weight = 0.5 / static_cast<double>(r);
        m.estimate = {r == 2 ? std::optional<double>{} : std::optional<double>{-0.2 * r}};
        m.se = {r == 2 ? std::optional<double>{} : std::optional<double>{0.05}};
        m.blocks = {r != 1, r == 3};
        f.models.push_back(m);
    }
    return f;
}

}  // namespace

TEST_CASE("escape") {
    CHECK(escape("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
}

TEST_CASE("single-outcome figure has its four panels and is stable") {
    const auto svg = single_outcome(sample_figure());
    CHECK(contains(svg, "<svg xmlns="));
    CHECK(contains(svg, "</svg>"));
    for (const char* id : {"bma-density", "model-estimates", "model-weights", "inclusion-grid"})
        CHECK(contains(svg, std::string("id=\"") + id + "\""));
    CHECK(contains(svg, "wellbeing &lt;all&gt;"));
    CHECK_FALSE(contains(svg, "nan"));
    CHECK(svg == single_outcome(sample_figure()));
}

TEST_CASE("forest plot draws one panel per outcome") {
    ForestPanel a{"y1", {{"x1", 0.2, 0.1, 0.3, true}, {"x2", 0.0, 0.0, 0.0, false}}, 0.0, "zero"};
    ForestPanel b{"y2", {{"x1", -0.1, -0.4, 0.2, false}}, std::nullopt, ""};
    const auto svg = forest("effects", {a, b}, "caption text");
    CHECK(contains(svg, "id=\"panel-0\""));
    CHECK(contains(svg, "id=\"panel-1\""));
    CHECK(contains(svg, "caption text"));
}

TEST_CASE("curve figure tolerates non-finite input") {
    CurveFigure f;
    f.title = "curve";
    f.indicator_names = {"control:z"};
    f.points = {{-0.1, 0.05, false, {false}}, {0.9, 0.05, true, {true}}};
    f.median = std::numeric_limits<double>::quiet_NaN();
    const auto svg = curve(f);
    CHECK(contains(svg, "id=\"curve\""));
    CHECK(contains(svg, "id=\"specification-grid\""));
    CHECK_FALSE(contains(svg, "nan"));
}

TEST_CASE("empty inputs still give a valid document") {
    CHECK(contains(single_outcome({}), "</svg>"));
    CHECK(contains(forest("none", {}), "</svg>"));
    CHECK(contains(curve({}), "</svg>"));
}
