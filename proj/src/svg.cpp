#include "bsca/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bsca::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string label_num(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

struct Scale {
    double d0, d1, r0, r1;
    double operator()(double v) const {
        if (d1 == d0) return 0.5 * (r0 + r1);
        return r0 + (v - d0) / (d1 - d0) * (r1 - r0);
    }
};

// Padded [lo, hi] that always has positive width.
std::pair<double, double> padded(double lo, double hi, double pad = 0.05) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {-1.0, 1.0};
    if (hi - lo < 1e-12) {
        const double w = std::max(1e-3, std::abs(lo) * 0.1);
        return {lo - w, hi + w};
    }
    const double w = (hi - lo) * pad;
    return {lo - w, hi + w};
}

std::vector<double> ticks(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    if (!(span > 0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-9 * step ? 0.0 : t);
    return out;
}

class Canvas {
public:
    Canvas(double width, double height) : w_(width), h_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#000",
              double width = 1.0, const std::string& extra = {}) {
        body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\""
              << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"" << extra
              << "/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& extra = {}) {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.0, w))
              << "\" height=\"" << num(std::max(0.0, h)) << "\" fill=\"" << fill << "\"" << extra << "/>\n";
    }
    void circle(double cx, double cy, double r, const std::string& fill, const std::string& extra = {}) {
        body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\""
              << fill << "\"" << extra << "/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "start",
              double size = 11.0, const std::string& extra = {}) {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
              << "\" text-anchor=\"" << anchor << "\"" << extra << ">" << escape(s) << "</text>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5, const std::string& fill = "none") {
        if (pts.empty()) return;
        body_ << "<polyline fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
              << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            body_ << (i ? " " : "") << num(pts[i].first) << "," << num(pts[i].second);
        body_ << "\"/>\n";
    }
    void group_open(const std::string& id) { body_ << "<g id=\"" << escape(id) << "\">\n"; }
    void group_close() { body_ << "</g>\n"; }

    // Horizontal axis with ticks at y.
    void x_axis(const Scale& sx, double y, const std::string& title = {}) {
        line(sx.r0, y, sx.r1, y);
        for (double t : ticks(sx.d0, sx.d1)) {
            line(sx(t), y, sx(t), y + 4);
            text(sx(t), y + 15, label_num(t), "middle", 10);
        }
        if (!title.empty()) text(0.5 * (sx.r0 + sx.r1), y + 30, title, "middle", 11);
    }
    void y_axis(const Scale& sy, double x, const std::string& title = {}) {
        line(x, sy.r0, x, sy.r1);
        for (double t : ticks(std::min(sy.d0, sy.d1), std::max(sy.d0, sy.d1), 4)) {
            line(x - 4, sy(t), x, sy(t));
            text(x - 6, sy(t) + 3, label_num(t), "end", 10);
        }
        if (!title.empty()) {
            const double cy = 0.5 * (sy.r0 + sy.r1);
            text(x - 42, cy, title, "middle", 11,
                 " transform=\"rotate(-90 " + num(x - 42) + " " + num(cy) + ")\"");
        }
    }

    std::string str() const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
            << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    double w_, h_;
    std::ostringstream body_;
};

const char* colour(std::size_t i) { return kPalette[i % kPaletteSize]; }

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string single_outcome(const SingleOutcomeFigure& fig) {
    const double left = 70, right_margin = 30, width = 980;
    const double density_w = 300, gap = 60;
    const double top = 50, top_h = 220;
    const double score_top = top + top_h + 50, score_h = 90;
    const double row_h = 14;
    const double grid_top = score_top + score_h + 30;
    const double grid_h = row_h * static_cast<double>(fig.block_names.size());
    const double height = grid_top + grid_h + 60 + 16.0 * static_cast<double>(fig.series.size());

    Canvas c(width, height);
    c.text(width / 2, 24, fig.title, "middle", 15);

    // Common estimate range across the density and per-model panels.
    double lo = 0.0, hi = 0.0;
    for (const auto& s : fig.series) {
        lo = std::min({lo, s.lower, s.mean});
        hi = std::max({hi, s.upper, s.mean});
        if (!s.edges.empty()) {
            lo = std::min(lo, s.edges.front());
            hi = std::max(hi, s.edges.back());
        }
    }
    for (const auto& m : fig.models)
        for (std::size_t k = 0; k < m.estimate.size(); ++k)
            if (m.estimate[k]) {
                const double se = k < m.se.size() && m.se[k] ? *m.se[k] : 0.0;
                lo = std::min(lo, *m.estimate[k] - 1.96 * se);
                hi = std::max(hi, *m.estimate[k] + 1.96 * se);
            }
    const auto [elo, ehi] = padded(lo, hi);

    // Panel 1: BMA posterior density with point mass at zero.
    {
        c.group_open("bma-density");
        const Scale sx{elo, ehi, left, left + density_w};
        double dmax = 0.0;
        for (const auto& s : fig.series)
            for (double d : s.density) dmax = std::max(dmax, d);
        const Scale sy{0.0, dmax > 0 ? dmax * 1.1 : 1.0, top + top_h - 40, top};
        for (std::size_t i = 0; i < fig.series.size(); ++i) {
            const auto& s = fig.series[i];
            std::vector<std::pair<double, double>> pts;
            for (std::size_t b = 0; b < s.density.size(); ++b) {
                pts.emplace_back(sx(s.edges[b]), sy(s.density[b]));
                pts.emplace_back(sx(s.edges[b + 1]), sy(s.density[b]));
            }
            c.polyline(pts, colour(i));
            if (s.point_mass > 0) {
                // The atom is drawn as a bar whose height is its probability on a 0..1 inset scale.
                const double bar = (top_h - 40) * s.point_mass;
                c.rect(sx(0.0) - 2 + 4.0 * static_cast<double>(i), top + top_h - 40 - bar, 3, bar, colour(i),
                       " opacity=\"0.6\"");
            }
            const double yi = top + top_h - 22 + 7.0 * static_cast<double>(i);
            c.line(sx(s.lower), yi, sx(s.upper), yi, colour(i), 2);
            c.circle(sx(s.mean), yi, 3.5, colour(i));
        }
        c.x_axis(sx, top + top_h - 40 + 30, "");
        c.line(sx(0.0), top, sx(0.0), top + top_h - 40, "#888", 0.8, " stroke-dasharray=\"3,3\"");
        c.y_axis(sy, left, "posterior density");
        c.text(left + density_w / 2, top - 8, "BMA posterior", "middle", 12);
        c.group_close();
    }

    const double models_left = left + density_w + gap;
    const double models_right = width - right_margin;
    const std::size_t nm = std::max<std::size_t>(1, fig.models.size());
    const Scale mx{0.5, static_cast<double>(nm) + 0.5, models_left, models_right};

    // Panel 2: per-model estimates, marker area proportional to weight.
    {
        c.group_open("model-estimates");
        const Scale sy{elo, ehi, top + top_h, top};
        double wmax = 0.0;
        for (const auto& m : fig.models) wmax = std::max(wmax, m.weight);
        c.line(models_left, sy(0.0), models_right, sy(0.0), "#888", 0.8, " stroke-dasharray=\"3,3\"");
        for (std::size_t i = 0; i < fig.series.size(); ++i)
            c.line(models_left, sy(fig.series[i].mean), models_right, sy(fig.series[i].mean), colour(i), 0.8);
        for (std::size_t r = 0; r < fig.models.size(); ++r) {
            const auto& m = fig.models[r];
            const double rad = wmax > 0 ? 1.0 + 5.0 * std::sqrt(m.weight / wmax) : 2.0;
            for (std::size_t k = 0; k < m.estimate.size(); ++k) {
                if (!m.estimate[k]) continue;
                const double x = mx(static_cast<double>(r + 1)) + 1.5 * static_cast<double>(k);
                const double se = k < m.se.size() && m.se[k] ? *m.se[k] : 0.0;
                c.line(x, sy(*m.estimate[k] - 1.96 * se), x, sy(*m.estimate[k] + 1.96 * se), colour(k), 0.6);
                c.circle(x, sy(*m.estimate[k]), rad, colour(k), " fill-opacity=\"0.7\"");
            }
        }
        c.y_axis(sy, models_left, "estimate");
        c.text(0.5 * (models_left + models_right), top - 8, "Estimates by model (top " +
               std::to_string(fig.models.size()) + ")", "middle", 12);
        c.group_close();
    }

    // Panel 3: posterior model probability.
    {
        c.group_open("model-weights");
        double wmax = 0.0;
        for (const auto& m : fig.models) wmax = std::max(wmax, m.weight);
        const Scale sy{0.0, wmax > 0 ? wmax : 1.0, score_top + score_h, score_top};
        const double bw = std::max(1.0, (models_right - models_left) / static_cast<double>(nm) * 0.7);
        for (std::size_t r = 0; r < fig.models.size(); ++r) {
            const double x = mx(static_cast<double>(r + 1));
            c.rect(x - bw / 2, sy(fig.models[r].weight), bw, sy(0.0) - sy(fig.models[r].weight), "#555");
        }
        c.y_axis(sy, models_left, "weight");
        c.line(models_left, score_top + score_h, models_right, score_top + score_h);
        c.group_close();
    }

    // Panel 4: block inclusion grid.
    {
        c.group_open("inclusion-grid");
        const double cw = std::max(1.0, (models_right - models_left) / static_cast<double>(nm));
        for (std::size_t b = 0; b < fig.block_names.size(); ++b) {
            const double y = grid_top + row_h * static_cast<double>(b);
            c.text(models_left - 6, y + row_h - 3, fig.block_names[b], "end", 10);
            if (b % 2 == 0) c.rect(models_left, y, models_right - models_left, row_h, "#f2f2f2");
            for (std::size_t r = 0; r < fig.models.size(); ++r) {
                if (b < fig.models[r].blocks.size() && fig.models[r].blocks[b])
                    c.rect(mx(static_cast<double>(r + 1)) - cw * 0.4, y + 2, cw * 0.8, row_h - 4, "#222");
            }
        }
        c.text(0.5 * (models_left + models_right), grid_top + grid_h + 18, "models ranked by weight", "middle", 11);
        c.group_close();
    }

    // Legend with the numeric summaries.
    const double ly = grid_top + grid_h + 40;
    for (std::size_t i = 0; i < fig.series.size(); ++i) {
        const auto& s = fig.series[i];
        const double y = ly + 16.0 * static_cast<double>(i);
        c.rect(left, y - 9, 10, 10, colour(i));
        c.text(left + 16, y, s.label + ": mean " + label_num(s.mean) + ", interval [" + label_num(s.lower) +
                                 ", " + label_num(s.upper) + "], P(effect = 0) " + label_num(s.point_mass),
               "start", 11);
    }
    return c.str();
}

std::string forest(const std::string& title, const std::vector<ForestPanel>& panels, const std::string& caption) {
    const double label_w = 130, panel_w = 260, panel_gap = 30, top = 60, row_h = 22, bottom = 60;
    std::size_t max_rows = 1;
    double lo = 0.0, hi = 0.0;
    for (const auto& p : panels) {
        max_rows = std::max(max_rows, p.rows.size());
        for (const auto& r : p.rows) {
            lo = std::min({lo, r.lower, r.mean});
            hi = std::max({hi, r.upper, r.mean});
        }
        if (p.reference) {
            lo = std::min(lo, *p.reference);
            hi = std::max(hi, *p.reference);
        }
    }
    const auto [flo, fhi] = padded(lo, hi, 0.08);
    const double plot_h = row_h * static_cast<double>(max_rows);
    const double width = 20 + static_cast<double>(panels.size()) * (label_w + panel_w + panel_gap);
    const double height = top + plot_h + bottom + (caption.empty() ? 0 : 20);

    Canvas c(width, height);
    c.text(width / 2, 24, title, "middle", 15);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const double x0 = 20 + static_cast<double>(p) * (label_w + panel_w + panel_gap) + label_w;
        const Scale sx{flo, fhi, x0, x0 + panel_w};
        c.group_open("panel-" + std::to_string(p));
        c.text(x0 + panel_w / 2, top - 12, panel.title, "middle", 12);
        c.line(sx(0.0), top, sx(0.0), top + plot_h, "#888", 0.8, " stroke-dasharray=\"3,3\"");
        if (panel.reference) {
            c.line(sx(*panel.reference), top, sx(*panel.reference), top + plot_h, "#d62728", 1.2,
                   " stroke-dasharray=\"6,3\"");
            if (!panel.reference_label.empty())
                c.text(sx(*panel.reference), top + plot_h + 44, panel.reference_label, "middle", 10,
                       " fill=\"#d62728\"");
        }
        for (std::size_t r = 0; r < panel.rows.size(); ++r) {
            const auto& row = panel.rows[r];
            const double y = top + row_h * (static_cast<double>(r) + 0.5);
            c.text(x0 - 8, y + 4, row.label, "end", 10);
            const std::string col = row.highlight ? "#1f77b4" : "#999";
            c.line(sx(row.lower), y, sx(row.upper), y, col, 2);
            c.circle(sx(row.mean), y, 4, col);
        }
        c.x_axis(sx, top + plot_h + 4, "");
        c.group_close();
    }
    if (!caption.empty()) c.text(20, height - 10, caption, "start", 10, " fill=\"#555\"");
    return c.str();
}

std::string curve(const CurveFigure& fig) {
    const double left = 150, right = 30, width = 900, top = 50, plot_h = 260, row_h = 14;
    const double grid_top = top + plot_h + 40;
    const double height = grid_top + row_h * static_cast<double>(fig.indicator_names.size()) + 50;
    Canvas c(width, height);
    c.text(width / 2, 24, fig.title, "middle", 15);

    double lo = 0.0, hi = 0.0;
    for (const auto& p : fig.points) {
        lo = std::min(lo, p.estimate - 1.96 * p.se);
        hi = std::max(hi, p.estimate + 1.96 * p.se);
    }
    const auto [clo, chi] = padded(lo, hi);
    const std::size_t n = std::max<std::size_t>(1, fig.points.size());
    const Scale sx{0.5, static_cast<double>(n) + 0.5, left, width - right};
    const Scale sy{clo, chi, top + plot_h, top};

    c.group_open("curve");
    c.line(left, sy(0.0), width - right, sy(0.0), "#888", 0.8, " stroke-dasharray=\"3,3\"");
    c.line(left, sy(fig.median), width - right, sy(fig.median), "#d62728", 1.0);
    c.text(width - right, sy(fig.median) - 4, "median " + label_num(fig.median), "end", 10, " fill=\"#d62728\"");
    for (std::size_t i = 0; i < fig.points.size(); ++i) {
        const auto& p = fig.points[i];
        const double x = sx(static_cast<double>(i + 1));
        const std::string col = p.significant ? "#1f77b4" : "#999";
        c.line(x, sy(p.estimate - 1.96 * p.se), x, sy(p.estimate + 1.96 * p.se), col, 0.8);
        c.circle(x, sy(p.estimate), 2.5, col);
    }
    c.y_axis(sy, left, "estimate");
    c.group_close();

    c.group_open("specification-grid");
    const double cw = std::max(1.0, (width - right - left) / static_cast<double>(n));
    for (std::size_t k = 0; k < fig.indicator_names.size(); ++k) {
        const double y = grid_top + row_h * static_cast<double>(k);
        if (k % 2 == 0) c.rect(left, y, width - right - left, row_h, "#f2f2f2");
        c.text(left - 6, y + row_h - 3, fig.indicator_names[k], "end", 10);
        for (std::size_t i = 0; i < fig.points.size(); ++i)
            if (k < fig.points[i].indicators.size() && fig.points[i].indicators[k])
                c.rect(sx(static_cast<double>(i + 1)) - cw * 0.4, y + 2, cw * 0.8, row_h - 4, "#222");
    }
    c.text(0.5 * (left + width - right), height - 14, "specifications sorted by estimate", "middle", 11);
    c.group_close();
    return c.str();
}

}  // namespace bsca::svg
