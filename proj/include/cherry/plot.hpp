#pragma once

#include <string>

#include "cherry/forecast.hpp"
#include "cherry/phenology.hpp"

namespace cherry {

enum class PlotKind { trajectory, tree_aggregate, regression_grid };

const char* to_string(PlotKind kind) noexcept;
std::optional<PlotKind> parse_plot_kind(std::string_view text);

struct PlotSpec {
  PlotKind kind = PlotKind::trajectory;
  std::string output_path;
  int width = 900;
  int height = 600;
  double level = 0.95;  // prediction band coverage for regression_grid
};

/// SVG document for the requested kind.
///   trajectory       one <polyline class="series"> per branch
///   tree_aggregate   one <polyline class="series"> per tree
///   regression_grid  one <g class="panel"> per calibration entry; scatter
///                    points come from the ledger when one is given
/// Throws Error(invalid_argument) for non-positive dimensions and
/// Error(empty_input) when the needed input is missing or empty.
std::string render_svg(const PlotSpec& spec, const SeasonLedger* ledger,
                       const CalibrationTable* calibration);

// render_svg written to spec.output_path. Throws Error(io_error) on failure.
void render_plot(const PlotSpec& spec, const SeasonLedger* ledger,
                 const CalibrationTable* calibration);

}  // namespace cherry
