#pragma once

#include <string>

#include "c3bf/trajectory_csv.hpp"

namespace c3bf {

enum class PlotMode { Path, HValue, Inputs };

PlotMode parse_plot_mode(const std::string& s);  // "path" | "hvalue" | "inputs"

/// Renders a trajectory table as a standalone SVG document.
///  path   - vehicle trace (filter-active stretches in orange), obstacle discs of radius r
///           at their first and last logged centers, moving-obstacle center traces
///  hvalue - h(t) per obstacle, red where u_safe != 0 and blue elsewhere, with the h = 0 line
///  inputs - one panel per input component, u_ref dashed against u_star solid
std::string render_svg(const TrajectoryTable& table, PlotMode mode);

}  // namespace c3bf
