#pragma once

// Minimal SVG rendering for the three figure types. Inputs are plain
// numbers so figures can be re-drawn from the saved CSV/JSON outputs.
// Output contains no timestamps and uses fixed number formatting.

#include <optional>
#include <string>
#include <vector>

namespace bsca::svg {

struct DensitySeries {
    std::string label;
    std::vector<double> edges;    // bin edges, size = density.size() + 1
    std::vector<double> density;  // continuous part, integrates to 1 - point_mass
    double point_mass = 0.0;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct ModelPoint {
    std::size_t rank = 0;
    double weight = 0.0;
    std::vector<std::optional<double>> estimate;  // one per series, empty when excluded
    std::vector<std::optional<double>> se;
    std::vector<bool> blocks;                     // one per block name
};

struct SingleOutcomeFigure {
    std::string title;
    std::vector<DensitySeries> series;
    std::vector<std::string> block_names;
    std::vector<ModelPoint> models;  // already cut to the top models, rank order
};

std::string single_outcome(const SingleOutcomeFigure& figure);

struct ForestRow {
    std::string label;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool highlight = false;  // e.g. "effect = 0" rejected
};

struct ForestPanel {
    std::string title;
    std::vector<ForestRow> rows;
    std::optional<double> reference;
    std::string reference_label;
};

// Panels side by side, one row per estimate, shared horizontal scale.
std::string forest(const std::string& title, const std::vector<ForestPanel>& panels,
                   const std::string& caption = {});

struct CurvePoint {
    double estimate = 0.0;
    double se = 0.0;
    bool significant = false;
    std::vector<bool> indicators;
};

struct CurveFigure {
    std::string title;
    std::vector<std::string> indicator_names;
    std::vector<CurvePoint> points;  // sorted by estimate
    double median = 0.0;
};

std::string curve(const CurveFigure& figure);

std::string escape(const std::string& text);

}  // namespace bsca::svg
