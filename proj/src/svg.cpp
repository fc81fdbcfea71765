#include "imagetypes/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace imagetypes::svg {

namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape_xml(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string tick(double v) {
    if (v == 0.0) return "0";
    const double mag = std::abs(v);
    if (mag >= 1e4 || mag < 1e-2) return fmt::format("{:.2e}", v);
    return fmt::format("{:.3g}", v);
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isnan(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi == lo) lo -= 0.5, hi += 0.5;
    }
};

// Chart body as an SVG group positioned at (ox, oy).
std::string chart_group(std::span<const Series> series, const ChartStyle& style, double ox, double oy) {
    const double left = 56, right = 12, top = 28, bottom = 40;
    const double pw = style.width - left - right;
    const double ph = style.height - top - bottom;
    Range rx, ry;
    for (const auto& s : series) {
        for (double v : s.x) rx.add(v);
        for (double v : s.y) ry.add(v);
    }
    rx.settle();
    ry.settle();
    auto px = [&](double x) { return left + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double y) { return top + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::string g = fmt::format("<g transform=\"translate({:.1f},{:.1f})\">\n", ox, oy);
    g += fmt::format("<text x=\"{:.1f}\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                     style.width / 2, escape_xml(style.title));
    g += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#444\"/>\n",
                     left, top, pw, ph);
    for (int t = 0; t <= 4; ++t) {
        const double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
        g += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n", px(fx),
                         top + ph + 14, tick(fx));
        g += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n", left - 4,
                         py(fy) + 3, tick(fy));
    }
    g += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                     left + pw / 2, style.height - 6, escape_xml(style.x_label));
    g += fmt::format(
        "<text x=\"12\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 12 {:.1f})\">{}</text>\n",
        top + ph / 2, top + ph / 2, escape_xml(style.y_label));

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPalette.size()];
        std::string d;
        bool pen_down = false;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            const double y = series[s].y[i];
            if (std::isnan(y)) {
                pen_down = false;
                continue;
            }
            d += fmt::format("{}{:.2f},{:.2f} ", pen_down ? "L" : "M", px(series[s].x[i]), py(y));
            pen_down = true;
        }
        g += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", d, color);
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            const double y = series[s].y[i];
            if (std::isnan(y)) continue;
            const bool hl = style.highlight_x && series[s].x[i] == *style.highlight_x;
            g += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\"/>\n", px(series[s].x[i]), py(y),
                             hl ? 5 : 2, hl ? "#9ecae1" : color);
        }
        if (series.size() > 1)
            g += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" fill=\"{}\">{}</text>\n", left + 6,
                             top + 12 + 12.0 * static_cast<double>(s), color, escape_xml(series[s].name));
    }
    g += "</g>\n";
    return g;
}

std::string document(double width, double height, const std::string& body) {
    return fmt::format(
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
               "font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
               width, height, width, height) +
           body + "</svg>\n";
}

}  // namespace

std::string line_chart(std::span<const Series> series, const ChartStyle& style) {
    return document(style.width, style.height, chart_group(series, style, 0, 0));
}

std::string scan_panels(const KScanReport& report, std::optional<std::size_t> highlight_k) {
    std::array<Series, 3> metrics{Series{"inertia", {}, {}}, Series{"davies_bouldin", {}, {}},
                                  Series{"silhouette", {}, {}}};
    for (const auto& e : report.entries) {
        for (auto& s : metrics) s.x.push_back(static_cast<double>(e.k));
        metrics[0].y.push_back(e.inertia);
        metrics[1].y.push_back(e.davies_bouldin);
        metrics[2].y.push_back(e.silhouette);
    }
    const std::array<const char*, 3> titles{"Inertia", "Davies-Bouldin index", "Silhouette score"};
    std::string body;
    for (std::size_t i = 0; i < 3; ++i) {
        ChartStyle style;
        style.title = fmt::format("{} ({})", titles[i], report.source_tag);
        style.x_label = "number of clusters";
        style.y_label = titles[i];
        if (highlight_k) style.highlight_x = static_cast<double>(*highlight_k);
        body += chart_group(std::span(&metrics[i], 1), style, 360.0 * static_cast<double>(i), 0);
    }
    return document(1080, 260, body);
}

std::string overlap_heatmap(const OverlapMatrix& matrix, const std::string& title) {
    const double cell = 36, left = 90, top = 40;
    const double width = left + cell * static_cast<double>(matrix.cols) + 20;
    const double height = top + cell * static_cast<double>(matrix.rows) + 70;
    std::string body = fmt::format("<text x=\"{:.1f}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                                   width / 2, escape_xml(title));
    for (std::size_t i = 0; i < matrix.rows; ++i) {
        const double y = top + cell * static_cast<double>(i);
        body += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n", left - 4,
                            y + cell / 2 + 3, escape_xml(matrix.row_labels[i]));
        for (std::size_t j = 0; j < matrix.cols; ++j) {
            const double x = left + cell * static_cast<double>(j);
            const double v = std::clamp(matrix.at(i, j), 0.0, 1.0);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            body += fmt::format(
                "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"rgb({},{},255)\" stroke=\"#ccc\"/>\n",
                x, y, cell, cell, shade, shade);
            body += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"9\" fill=\"{}\">{:.2f}</text>\n",
                                x + cell / 2, y + cell / 2 + 3, v > 0.5 ? "white" : "black", matrix.at(i, j));
        }
    }
    const double label_y = top + cell * static_cast<double>(matrix.rows) + 12;
    for (std::size_t j = 0; j < matrix.cols; ++j) {
        const double x = left + cell * static_cast<double>(j) + cell / 2;
        body += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\" transform=\"rotate(-45 {:.1f} {:.1f})\">{}</text>\n",
            x, label_y, x, label_y, escape_xml(matrix.col_labels[j]));
    }
    return document(width, height, body);
}

std::string consistency_plot(std::span<const std::pair<std::string, std::vector<CurvePoint>>> curves) {
    std::vector<Series> series;
    for (const auto& [name, curve] : curves) {
        Series s{name, {}, {}};
        for (const auto& p : curve) {
            s.x.push_back(static_cast<double>(p.k));
            s.y.push_back(p.rho ? *p.rho : std::numeric_limits<double>::quiet_NaN());
        }
        series.push_back(std::move(s));
    }
    ChartStyle style;
    style.title = "Top-k rank consistency";
    style.x_label = "k";
    style.y_label = "Spearman rho";
    style.width = 480;
    style.height = 300;
    return line_chart(series, style);
}

}  // namespace imagetypes::svg
