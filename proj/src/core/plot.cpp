#include "cherry/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cherry/error.hpp"

namespace cherry {

namespace {

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view text) {
  std::string out;
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

double nice_step(double span, int target_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

struct Frame {
  double left, top, width, height;
  double x0, x1, y0, y1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

void text(std::string& out, double x, double y, std::string_view content,
          const char* anchor = "middle", int size = 12, const char* cls = "label") {
  out += "<text class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
         "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" +
         xml_escape(content) + "</text>\n";
}

void line(std::string& out, double x1, double y1, double x2, double y2, const char* cls,
          const char* stroke = "#000", const char* extra = "") {
  out += "<line class=\"" + std::string(cls) + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
         "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\"" + extra +
         "/>\n";
}

void y_axis(std::string& out, const Frame& f, int size) {
  line(out, f.left, f.top, f.left, f.top + f.height, "axis");
  const double step = nice_step(f.y1 - f.y0, 5);
  for (double v = std::ceil(f.y0 / step) * step; v <= f.y1 + 1e-9 * step; v += step) {
    const double y = f.py(v);
    line(out, f.left - 4, y, f.left, y, "tick");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    text(out, f.left - 6, y + size / 3.0, buf, "end", size);
  }
}

void x_axis_numeric(std::string& out, const Frame& f, int size) {
  const double base = f.top + f.height;
  line(out, f.left, base, f.left + f.width, base, "axis");
  const double step = nice_step(f.x1 - f.x0, 4);
  for (double v = std::ceil(f.x0 / step) * step; v <= f.x1 + 1e-9 * step; v += step) {
    const double x = f.px(v);
    line(out, x, base, x, base + 4, "tick");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    text(out, x, base + 4 + size, buf, "middle", size);
  }
}

std::string header(const PlotSpec& spec, std::string_view title) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
      "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " + std::to_string(spec.height) +
      "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  text(out, spec.width / 2.0, 20, title, "middle", 14, "title");
  return out;
}

struct Series {
  std::string name;
  std::vector<std::pair<Date, double>> points;
};

std::string render_series(const PlotSpec& spec, std::string_view title,
                          const std::vector<Series>& series) {
  Date first = series.front().points.front().first;
  Date last = first;
  double y_max = 0.0;
  std::vector<Date> dates;
  for (const auto& s : series) {
    for (const auto& [d, v] : s.points) {
      first = std::min(first, d);
      last = std::max(last, d);
      y_max = std::max(y_max, v);
      dates.push_back(d);
    }
  }
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

  const double legend_w = std::min(160.0, spec.width * 0.25);
  Frame f{60.0, 40.0, std::max(10.0, spec.width - 80.0 - legend_w),
          std::max(10.0, spec.height - 90.0), 0.0,
          std::max(1.0, double(days_between(first, last))), 0.0, std::max(1.0, y_max * 1.05)};

  std::string out = header(spec, title);
  y_axis(out, f, 11);
  const double base = f.top + f.height;
  line(out, f.left, base, f.left + f.width, base, "axis");
  // Skip labels that would overlap their left neighbour.
  double last_label = -1e9;
  for (Date d : dates) {
    const double x = f.px(days_between(first, d));
    line(out, x, base, x, base + 4, "tick");
    if (x - last_label < 42.0) continue;
    text(out, x, base + 16, format_month_day(d), "middle", 11);
    last_label = x;
  }
  text(out, f.left + f.width / 2, spec.height - 12.0, "date", "middle", 12);
  text(out, 14, f.top + f.height / 2, "count", "middle", 12);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % kPalette.size()];
    std::string pts;
    for (const auto& [d, v] : series[i].points) {
      if (!pts.empty()) pts += ' ';
      pts += num(f.px(days_between(first, d))) + "," + num(f.py(v));
    }
    out += "<polyline class=\"series\" data-name=\"" + xml_escape(series[i].name) +
           "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"><title>" + xml_escape(series[i].name) + "</title></polyline>\n";
    const double ly = f.top + 14.0 * double(i);
    if (ly < f.top + f.height) {
      const double lx = f.left + f.width + 16.0;
      line(out, lx, ly, lx + 18, ly, "legend", colour, " stroke-width=\"2\"");
      text(out, lx + 22, ly + 4, series[i].name, "start", 11, "legend");
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_trajectory(const PlotSpec& spec, const SeasonLedger& ledger) {
  std::vector<Series> series;
  for (const auto& b : ledger.branches()) {
    Series s{b.branch_id == kWholeTree ? b.tree_id : b.tree_id + "/" + b.branch_id, {}};
    for (const auto& p : trajectory(ledger, b.tree_id, b.branch_id))
      s.points.emplace_back(p.date, double(p.count));
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  if (series.empty()) throw Error(ErrorCode::empty_input, "ledger has no branch trajectories");
  return render_series(spec, "Object counts per branch", series);
}

std::string render_aggregate(const PlotSpec& spec, const SeasonLedger& ledger) {
  std::vector<Series> series;
  for (const auto& t : aggregate_by_tree(ledger)) {
    Series s{t.tree_id, {}};
    for (const auto& p : t.points) s.points.emplace_back(p.date, double(p.count));
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  if (series.empty()) throw Error(ErrorCode::empty_input, "ledger has no tree series");
  return render_series(spec, "Object counts per tree", series);
}

void render_panel(std::string& out, const Frame& f, const CalibrationEntry& entry,
                  const std::vector<PairedCount>& pairs, double level) {
  std::string body;
  const auto& fit = entry.fit;
  const bool band = entry.has_interval_stats && fit.n >= 3 && fit.residual_se > 0.0;
  auto interval = [&](double x) { return predict_with_interval(fit, x, level); };

  // Ranges: data when known, otherwise twice the stage mean.
  double x_max = 0.0;
  for (const auto& p : pairs) x_max = std::max(x_max, p.x);
  if (x_max <= 0.0) x_max = entry.has_interval_stats ? 2.0 * fit.mean_x : 100.0;
  if (!(x_max > 0.0)) x_max = 1.0;
  Frame g = f;
  g.x0 = 0.0;
  g.x1 = x_max * 1.05;
  double lo = std::min({0.0, fit.predict(0.0), fit.predict(g.x1)});
  double hi = std::max(fit.predict(0.0), fit.predict(g.x1));
  for (const auto& p : pairs) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  if (band) {
    for (double x : {g.x0, g.x1}) {
      const auto pi = interval(x);
      lo = std::min(lo, pi.lower);
      hi = std::max(hi, pi.upper);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  g.y0 = lo;
  g.y1 = hi + 0.05 * (hi - lo);

  out += "<g class=\"panel\" data-date=\"" + format_iso_date(entry.stage.date) + "\">\n";
  out += "<rect class=\"frame\" x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.width) + "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"#ccc\"/>\n";
  y_axis(out, g, 9);
  x_axis_numeric(out, g, 9);

  if (band) {
    std::string upper, lower;
    constexpr int kSteps = 24;
    for (int i = 0; i <= kSteps; ++i) {
      const double x = g.x0 + (g.x1 - g.x0) * i / kSteps;
      const auto pi = interval(x);
      upper += (i == 0 ? "M" : " L") + num(g.px(x)) + "," + num(g.py(pi.upper));
      lower = " L" + num(g.px(x)) + "," + num(g.py(pi.lower)) + lower;
    }
    out += "<path class=\"band\" d=\"" + upper + lower +
           " Z\" fill=\"#1f77b4\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }
  for (const auto& p : pairs) {
    out += "<circle class=\"point\" cx=\"" + num(g.px(p.x)) + "\" cy=\"" + num(g.py(p.y)) +
           "\" r=\"3\" fill=\"#d62728\"><title>" + xml_escape(p.tree_id + "/" + p.branch_id) +
           "</title></circle>\n";
  }
  line(out, g.px(g.x0), g.py(fit.predict(g.x0)), g.px(g.x1), g.py(fit.predict(g.x1)), "fit",
       "#1f77b4", " stroke-width=\"1.5\"");

  const std::string head = format_month_day(entry.stage.date) + "  BBCH " +
                           std::to_string(entry.stage.bbch.code()) + " " + entry.stage.label;
  text(out, f.left + f.width / 2, f.top - 6, head, "middle", 11, "label");
  char stats[96];
  if (fit.r_squared)
    std::snprintf(stats, sizeof stats, "slope=%.3f  R\xC2\xB2=%.3f", fit.slope, *fit.r_squared);
  else
    std::snprintf(stats, sizeof stats, "slope=%.3f  R\xC2\xB2=n/a", fit.slope);
  text(out, f.left + 6, f.top + 14, stats, "start", 10, "stats");
  out += "</g>\n";
}

std::string render_grid(const PlotSpec& spec, const CalibrationTable& table,
                        const SeasonLedger* ledger) {
  if (table.entries.empty()) throw Error(ErrorCode::empty_input, "calibration has no entries");
  if (!(spec.level > 0.0 && spec.level < 1.0))
    throw Error(ErrorCode::invalid_argument, "band level must lie in (0, 1)");
  const std::size_t n = table.entries.size();
  const auto cols = std::size_t(std::ceil(std::sqrt(double(n))));
  const auto rows = (n + cols - 1) / cols;
  const double cell_w = double(spec.width) / double(cols);
  const double cell_h = (double(spec.height) - 30.0) / double(rows);

  std::string out = header(spec, "Harvest count against stage count");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = table.entries[i];
    std::vector<PairedCount> pairs;
    if (ledger) pairs = pair_stage_with_harvest(*ledger, entry.stage, table.target);
    const double cx = cell_w * double(i % cols);
    const double cy = 30.0 + cell_h * double(i / cols);
    Frame f{cx + 45.0, cy + 20.0, std::max(10.0, cell_w - 60.0), std::max(10.0, cell_h - 45.0),
            0, 1, 0, 1};
    render_panel(out, f, entry, pairs, spec.level);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

const char* to_string(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::trajectory: return "trajectory";
    case PlotKind::tree_aggregate: return "tree_aggregate";
    case PlotKind::regression_grid: return "regression_grid";
  }
  return "?";
}

std::optional<PlotKind> parse_plot_kind(std::string_view text) {
  for (auto k : {PlotKind::trajectory, PlotKind::tree_aggregate, PlotKind::regression_grid})
    if (text == to_string(k)) return k;
  if (text == "tree-aggregate") return PlotKind::tree_aggregate;
  if (text == "regression-grid") return PlotKind::regression_grid;
  return std::nullopt;
}

std::string render_svg(const PlotSpec& spec, const SeasonLedger* ledger,
                       const CalibrationTable* calibration) {
  if (spec.width <= 0 || spec.height <= 0)
    throw Error(ErrorCode::invalid_argument, "plot dimensions must be positive");
  switch (spec.kind) {
    case PlotKind::trajectory:
    case PlotKind::tree_aggregate:
      if (!ledger || ledger->empty()) throw Error(ErrorCode::empty_input, "empty ledger");
      return spec.kind == PlotKind::trajectory ? render_trajectory(spec, *ledger)
                                               : render_aggregate(spec, *ledger);
    case PlotKind::regression_grid:
      if (!calibration) throw Error(ErrorCode::empty_input, "regression grid needs a calibration");
      return render_grid(spec, *calibration, ledger);
  }
  throw Error(ErrorCode::invalid_argument, "unknown plot kind");
}

void render_plot(const PlotSpec& spec, const SeasonLedger* ledger,
                 const CalibrationTable* calibration) {
  const auto svg = render_svg(spec, ledger, calibration);
  std::ofstream out(spec.output_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + spec.output_path);
  out << svg;
  if (!out.flush()) throw Error(ErrorCode::io_error, "cannot write " + spec.output_path);
}

}  // namespace cherry
