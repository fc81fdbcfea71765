#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/compare.hpp"
#include "imagetypes/neardup.hpp"

namespace imagetypes::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // NaN breaks the line
};

struct ChartStyle {
    std::string title;
    std::string x_label;
    std::string y_label;
    double width = 360;
    double height = 260;
    /// Marks the point at this x on every series.
    std::optional<double> highlight_x;
};

/// Standalone <svg> document with one line per series.
std::string line_chart(std::span<const Series> series, const ChartStyle& style);

/// Inertia, Davies-Bouldin and silhouette against k in three panels.
std::string scan_panels(const KScanReport& report, std::optional<std::size_t> highlight_k);

std::string overlap_heatmap(const OverlapMatrix& matrix, const std::string& title);

/// One line per named curve; undefined rho values leave gaps.
std::string consistency_plot(std::span<const std::pair<std::string, std::vector<CurvePoint>>> curves);

}  // namespace imagetypes::svg
