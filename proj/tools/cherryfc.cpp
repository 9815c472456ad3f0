// cherryfc: validate count ledgers, fit stage calibrations, forecast
// harvests, simulate seasons and draw plots.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "cherry/cherry.h"

using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kDomain = 1, kUsage = 2 };

struct Options {
  std::string format;
};

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Ledger = std::unique_ptr<cf_ledger, Deleter<cf_ledger, cf_ledger_free>>;
using Violations = std::unique_ptr<cf_violations, Deleter<cf_violations, cf_violations_free>>;
using Calibration = std::unique_ptr<cf_calibration, Deleter<cf_calibration, cf_calibration_free>>;
using ForecastPtr = std::unique_ptr<cf_forecast, Deleter<cf_forecast, cf_forecast_free>>;
using SimParams = std::unique_ptr<cf_sim_params, Deleter<cf_sim_params, cf_sim_params_free>>;
using Ranking = std::unique_ptr<cf_recommendation, Deleter<cf_recommendation, cf_recommendation_free>>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { cf_string_free(p); }
};

int exit_for(cf_status s) {
  switch (s) {
    case CF_OK: return kOk;
    case CF_PARSE_ERROR:
    case CF_IO_ERROR:
    case CF_INVALID_ARGUMENT:
      return kUsage;
    default:
      return kDomain;
  }
}

int report(cf_status s) {
  std::fprintf(stderr, "cherryfc: %s\n", cf_last_error());
  return exit_for(s);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string month_day(int month, int day) {
  static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  return std::string(names[(month - 1) % 12]) + "-" + std::to_string(day);
}

std::string iso(int y, int m, int d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool pick_format(const Options& o, const std::string& fallback, std::string& out) {
  out = o.format.empty() ? fallback : o.format;
  return true;
}

// ---- validate

int cmd_validate(const Options& o, const std::string& path, int season, char delimiter) {
  cf_ledger* raw_ledger = nullptr;
  cf_violations* raw_v = nullptr;
  if (auto s = cf_ledger_read_file(path.c_str(), season, delimiter, &raw_ledger, &raw_v); s)
    return report(s);
  Ledger ledger(raw_ledger);
  Violations v(raw_v);

  std::string format;
  pick_format(o, "text", format);
  const size_t n = cf_violations_count(v.get());
  const size_t errors = cf_violations_error_count(v.get());

  if (format == "json") {
    ordered_json doc;
    doc["file"] = path;
    doc["records"] = cf_ledger_size(ledger.get());
    doc["errors"] = errors;
    doc["warnings"] = n - errors;
    doc["violations"] = ordered_json::array();
    for (size_t i = 0; i < n; ++i) {
      cf_violation x;
      cf_violation_get(v.get(), i, &x);
      ordered_json j;
      j["severity"] = x.severity == CF_SEVERITY_ERROR ? "error" : "warning";
      j["rule"] = x.rule;
      j["row"] = x.row ? ordered_json(x.row) : ordered_json(nullptr);
      j["rows"] = x.rows;
      j["keys"] = x.keys;
      j["message"] = x.message;
      doc["violations"].push_back(j);
    }
    std::cout << doc.dump(2) << '\n';
  } else if (format == "csv") {
    std::cout << "severity,rule,row,rows,keys,message\n";
    for (size_t i = 0; i < n; ++i) {
      cf_violation x;
      cf_violation_get(v.get(), i, &x);
      std::cout << (x.severity == CF_SEVERITY_ERROR ? "error" : "warning") << ',' << x.rule << ','
                << (x.row ? std::to_string(x.row) : "") << ',' << csv_field(x.rows) << ','
                << csv_field(x.keys) << ',' << csv_field(x.message) << '\n';
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      cf_violation x;
      cf_violation_get(v.get(), i, &x);
      if (x.row) std::cout << path << ':' << x.row << ": ";
      std::cout << (x.severity == CF_SEVERITY_ERROR ? "error" : "warning") << " [" << x.rule
                << "] " << x.message;
      if (*x.keys) std::cout << " (" << x.keys << ')';
      std::cout << '\n';
    }
  }
  return errors ? kDomain : kOk;
}

// ---- fit

int cmd_fit(const Options& o, const std::string& path, int season, const std::string& target_name,
            char delimiter) {
  const int target = cf_object_type_parse(target_name.c_str());
  if (target != CF_OBJECT_TOTAL_CROPS && target != CF_OBJECT_GOOD_CROPS) {
    std::fprintf(stderr, "cherryfc: --target must be totalCrops or goodCrops\n");
    return kUsage;
  }
  cf_ledger* raw_ledger = nullptr;
  cf_violations* raw_v = nullptr;
  if (auto s = cf_ledger_read_file(path.c_str(), season, delimiter, &raw_ledger, &raw_v); s)
    return report(s);
  Ledger ledger(raw_ledger);
  Violations v(raw_v);
  if (size_t e = cf_violations_error_count(v.get()))
    std::fprintf(stderr, "cherryfc: %zu records dropped by validation (run validate for details)\n", e);

  cf_calibration* raw_cal = nullptr;
  if (auto s = cf_calibrate(ledger.get(), target, &raw_cal); s) return report(s);
  Calibration cal(raw_cal);
  for (size_t i = 0; i < cf_calibration_annotation_count(cal.get()); ++i)
    std::fprintf(stderr, "cherryfc: %s\n", cf_calibration_annotation(cal.get(), i));
  const size_t n = cf_calibration_count(cal.get());
  if (n == 0) {
    std::fprintf(stderr, "cherryfc: no fittable stages\n");
    return kDomain;
  }

  std::string format;
  pick_format(o, "csv", format);
  if (format == "json") {
    ordered_json doc;
    doc["season"] = cf_calibration_season(cal.get());
    doc["target"] = cf_object_type_name(cf_calibration_target(cal.get()));
    doc["entries"] = ordered_json::array();
    for (size_t i = 0; i < n; ++i) {
      cf_calibration_entry e;
      cf_calibration_entry_get(cal.get(), i, &e);
      ordered_json j;
      j["date"] = iso(e.year, e.month, e.day);
      j["object"] = cf_object_type_name(e.object_type);
      j["stage"] = e.label;
      j["bbch"] = e.bbch;
      j["slope"] = e.slope;
      j["intercept"] = e.intercept;
      j["r_squared"] = e.has_r_squared ? ordered_json(e.r_squared) : ordered_json(nullptr);
      j["p_value"] = e.has_p_value ? ordered_json(e.p_value) : ordered_json(nullptr);
      j["p_band"] = e.p_band;
      j["n"] = e.n;
      j["residual_se"] = e.residual_se;
      doc["entries"].push_back(j);
    }
    doc["annotations"] = ordered_json::array();
    for (size_t i = 0; i < cf_calibration_annotation_count(cal.get()); ++i)
      doc["annotations"].push_back(cf_calibration_annotation(cal.get(), i));
    std::cout << doc.dump(2) << '\n';
    return kOk;
  }
  if (format == "text") {
    std::printf("%-8s %-9s %-28s %4s %8s %9s %8s %-7s %3s\n", "Date", "Object", "Stage", "BBCH",
                "Slope", "Intercept", "R2", "p", "n");
    for (size_t i = 0; i < n; ++i) {
      cf_calibration_entry e;
      cf_calibration_entry_get(cal.get(), i, &e);
      std::printf("%-8s %-9s %-28s %4d %8.2f %9.2f %8s %-7s %3zu\n",
                  month_day(e.month, e.day).c_str(), cf_object_type_name(e.object_type), e.label,
                  e.bbch, e.slope, e.intercept,
                  e.has_r_squared ? fmt("%.2f", e.r_squared).c_str() : "n/a", e.p_band, e.n);
    }
    return kOk;
  }
  OwnedString text;
  if (auto s = cf_calibration_emit_csv(cal.get(), &text.p); s) return report(s);
  std::cout << text.p;
  return kOk;
}

// ---- predict

struct PredictArgs {
  std::string calibration;
  std::string stage;
  std::vector<double> counts;
  double level = 0.95;
  std::string tree_mode;
  int season = 0;
  int count_season = 0;
  std::optional<double> fruit_weight;
};

int cmd_predict(const Options& o, const PredictArgs& a) {
  if (a.counts.size() > 1 && a.tree_mode.empty()) {
    std::fprintf(stderr, "cherryfc: several --count values need --tree-mode\n");
    return kUsage;
  }
  cf_calibration* raw_cal = nullptr;
  if (auto s = cf_calibration_read_file(a.calibration.c_str(), a.season, &raw_cal); s)
    return report(s);
  Calibration cal(raw_cal);

  auto opts = cf_forecast_options_default();
  opts.level = a.level;
  opts.count_season = a.count_season;
  if (a.fruit_weight) {
    opts.has_fruit_weight = 1;
    opts.fruit_weight_kg = *a.fruit_weight;
  }
  cf_forecast* raw = nullptr;
  cf_status s;
  if (a.tree_mode.empty()) {
    s = cf_forecast_branch(cal.get(), a.stage.c_str(), a.counts.front(), &opts, &raw);
  } else {
    const int mode = a.tree_mode == "whole" ? CF_TREE_WHOLE : CF_TREE_SUM_OF_BRANCHES;
    s = cf_forecast_tree(cal.get(), a.stage.c_str(), a.counts.data(), a.counts.size(), mode,
                         &opts, &raw);
  }
  if (s) return report(s);
  ForecastPtr fc(raw);
  cf_forecast_result r;
  cf_forecast_get(fc.get(), &r);
  std::vector<std::string> notes;
  for (size_t i = 0; i < cf_forecast_annotation_count(fc.get()); ++i)
    notes.emplace_back(cf_forecast_annotation(fc.get(), i));

  const char* scope = r.scope == CF_SCOPE_TREE ? "tree" : "branch";
  std::string format;
  pick_format(o, "text", format);
  if (format == "json") {
    ordered_json doc;
    doc["stage"] = iso(r.year, r.month, r.day);
    doc["bbch"] = r.bbch;
    doc["label"] = r.stage_label;
    doc["scope"] = scope;
    doc["point"] = r.point;
    doc["lower"] = r.lower;
    doc["upper"] = r.upper;
    doc["level"] = r.level;
    doc["weight_kg"] = r.has_weight ? ordered_json(r.weight_kg) : ordered_json(nullptr);
    doc["annotations"] = notes;
    std::cout << doc.dump(2) << '\n';
  } else if (format == "csv") {
    std::string joined;
    for (const auto& n : notes) joined += (joined.empty() ? "" : "; ") + n;
    std::cout << "stage,bbch,scope,point,lower,upper,level,weight_kg,annotations\n"
              << iso(r.year, r.month, r.day) << ',' << r.bbch << ',' << scope << ','
              << fmt("%.6f", r.point) << ',' << fmt("%.6f", r.lower) << ','
              << fmt("%.6f", r.upper) << ',' << fmt("%g", r.level) << ','
              << (r.has_weight ? fmt("%.6f", r.weight_kg) : "") << ',' << csv_field(joined)
              << '\n';
  } else {
    std::printf("stage     %s (BBCH %d, %s)\n", month_day(r.month, r.day).c_str(), r.bbch,
                r.stage_label);
    std::printf("scope     %s\n", scope);
    std::printf("point     %.2f\n", r.point);
    std::printf("interval  [%.2f, %.2f] at %g%%\n", r.lower, r.upper, r.level * 100);
    if (r.has_weight) std::printf("weight    %.3f kg\n", r.weight_kg);
    for (const auto& n : notes) std::printf("note      %s\n", n.c_str());
  }
  return kOk;
}

// ---- recommend

int cmd_recommend(const Options& o, const std::string& path, int season,
                  const cf_scoring_weights& w) {
  cf_calibration* raw_cal = nullptr;
  if (auto s = cf_calibration_read_file(path.c_str(), season, &raw_cal); s) return report(s);
  Calibration cal(raw_cal);
  cf_recommendation* raw = nullptr;
  if (auto s = cf_recommend(cal.get(), &w, &raw); s) return report(s);
  Ranking rank(raw);
  long early = -1, robust = -1;
  cf_recommendation_pair(rank.get(), &early, &robust);

  std::string format;
  pick_format(o, "text", format);
  const size_t n = cf_recommendation_count(rank.get());
  if (format == "json") {
    ordered_json doc;
    doc["ranking"] = ordered_json::array();
    for (size_t i = 0; i < n; ++i) {
      cf_recommendation_item r;
      cf_recommendation_get(rank.get(), i, &r);
      doc["ranking"].push_back({{"date", iso(r.year, r.month, r.day)},
                                {"bbch", r.bbch},
                                {"label", r.label},
                                {"score", r.score},
                                {"r_squared", r.r_squared},
                                {"earliness", r.earliness},
                                {"risk_mass", r.risk_mass},
                                {"rationale", r.rationale}});
    }
    doc["early"] = early >= 0 ? ordered_json(early) : ordered_json(nullptr);
    doc["robust"] = robust >= 0 ? ordered_json(robust) : ordered_json(nullptr);
    std::cout << doc.dump(2) << '\n';
    return kOk;
  }
  if (format == "csv") std::cout << "rank,date,bbch,label,score,r_squared,earliness,risk_mass,pick\n";
  for (size_t i = 0; i < n; ++i) {
    cf_recommendation_item r;
    cf_recommendation_get(rank.get(), i, &r);
    const char* pick = long(i) == early ? "early" : long(i) == robust ? "robust" : "";
    if (format == "csv") {
      std::cout << i + 1 << ',' << iso(r.year, r.month, r.day) << ',' << r.bbch << ','
                << csv_field(r.label) << ',' << fmt("%.6f", r.score) << ','
                << fmt("%.6f", r.r_squared) << ',' << fmt("%.6f", r.earliness) << ','
                << fmt("%.6f", r.risk_mass) << ',' << pick << '\n';
    } else {
      std::printf("%zu. %-7s BBCH %d  score %6.3f  %s%s%s\n", i + 1,
                  month_day(r.month, r.day).c_str(), r.bbch, r.score, r.rationale,
                  *pick ? "  <- " : "", pick);
    }
  }
  return kOk;
}

// ---- simulate

int cmd_simulate(const Options& o, const std::string& params_path, int trees, int branches,
                 std::optional<long long> seed, const std::vector<std::string>& sets) {
  cf_sim_params* raw = nullptr;
  if (params_path.empty()) {
    raw = cf_sim_params_default();
  } else if (auto s = cf_sim_params_read_file(params_path.c_str(), &raw); s) {
    return report(s);
  }
  SimParams params(raw);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "cherryfc: --set expects key=value, got '%s'\n", kv.c_str());
      return kUsage;
    }
    if (auto s = cf_sim_params_set(params.get(), kv.substr(0, eq).c_str(),
                                   kv.substr(eq + 1).c_str());
        s)
      return report(s);
  }
  if (seed) {
    if (auto s = cf_sim_params_set(params.get(), "seed", std::to_string(*seed).c_str()); s)
      return report(s);
  }
  cf_ledger* raw_ledger = nullptr;
  if (auto s = cf_simulate_season(params.get(), trees, branches, &raw_ledger); s) return report(s);
  Ledger ledger(raw_ledger);

  std::string format;
  pick_format(o, "csv", format);
  if (format == "json") {
    ordered_json doc = ordered_json::array();
    for (size_t i = 0; i < cf_ledger_size(ledger.get()); ++i) {
      cf_record r;
      cf_ledger_record(ledger.get(), i, &r);
      ordered_json j;
      j["date"] = iso(r.year, r.month, r.day);
      j["bbch"] = r.bbch;
      j["treeID"] = r.tree_id;
      j["branchID"] = r.branch_id;
      j["branchColor"] = r.branch_color ? ordered_json(r.branch_color) : ordered_json(nullptr);
      j["objectType"] = cf_object_type_name(r.object_type);
      j["objectCount"] = r.object_count;
      j["cropWeight"] = r.has_weight ? ordered_json(r.weight_kg) : ordered_json(nullptr);
      doc.push_back(j);
    }
    std::cout << doc.dump(2) << '\n';
    return kOk;
  }
  OwnedString text;
  if (auto s = cf_ledger_emit_csv(ledger.get(), ',', &text.p); s) return report(s);
  std::cout << text.p;
  return kOk;
}

// ---- plot

int cmd_plot(const Options& o, const std::string& kind, const std::string& ledger_path,
             const std::string& cal_path, const std::string& out, int season, int width,
             int height, double level) {
  cf_plot_spec spec = cf_plot_spec_default();
  if (kind == "trajectory") spec.kind = CF_PLOT_TRAJECTORY;
  else if (kind == "tree_aggregate" || kind == "tree-aggregate") spec.kind = CF_PLOT_TREE_AGGREGATE;
  else if (kind == "regression_grid" || kind == "regression-grid") spec.kind = CF_PLOT_REGRESSION_GRID;
  else {
    std::fprintf(stderr, "cherryfc: unknown plot kind '%s'\n", kind.c_str());
    return kUsage;
  }
  spec.output_path = out.c_str();
  spec.width = width;
  spec.height = height;
  spec.level = level;

  Ledger ledger;
  if (!ledger_path.empty()) {
    cf_ledger* raw = nullptr;
    if (auto s = cf_ledger_read_file(ledger_path.c_str(), season, ',', &raw, nullptr); s)
      return report(s);
    ledger.reset(raw);
  }
  Calibration cal;
  if (!cal_path.empty()) {
    cf_calibration* raw = nullptr;
    if (auto s = cf_calibration_read_file(cal_path.c_str(), season, &raw); s) return report(s);
    cal.reset(raw);
  }
  if (spec.kind != CF_PLOT_REGRESSION_GRID && !ledger) {
    std::fprintf(stderr, "cherryfc: --ledger is required for %s plots\n", kind.c_str());
    return kUsage;
  }
  if (spec.kind == CF_PLOT_REGRESSION_GRID && !cal && ledger) {
    // Fit on the fly when only a ledger is given.
    cf_calibration* raw = nullptr;
    if (auto s = cf_calibrate(ledger.get(), CF_OBJECT_TOTAL_CROPS, &raw); s) return report(s);
    cal.reset(raw);
  }
  if (auto s = cf_render_plot(&spec, ledger.get(), cal.get()); s) return report(s);

  std::string format;
  pick_format(o, "text", format);
  if (format == "json") {
    std::cout << ordered_json{{"output", out}, {"kind", kind}, {"width", width}, {"height", height}}
                     .dump(2)
              << '\n';
  } else if (format == "csv") {
    std::cout << "output,kind,width,height\n" << csv_field(out) << ',' << kind << ',' << width
              << ',' << height << '\n';
  } else {
    std::cout << "wrote " << out << '\n';
  }
  return kOk;
}

char delimiter_of(const std::string& d) {
  if (d == "tab" || d == "\\t") return '\t';
  return d.empty() ? ',' : d[0];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sweet cherry yield forecasting from phenology counts"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", cf_version());
  Options opts;
  app.add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  int result = kOk;
  int season = 0;
  std::string delimiter = ",";

  auto* validate = app.add_subcommand("validate", "Check a count ledger CSV");
  std::string validate_file;
  validate->add_option("file", validate_file, "Ledger CSV")->required();
  validate->add_option("--season", season, "Season year for month-day dates")->required();
  validate->add_option("--delimiter", delimiter, "Field delimiter (',', ';' or tab)");

  auto* fit = app.add_subcommand("fit", "Fit per-stage calibration and print it as CSV");
  std::string fit_file, target = "totalCrops";
  fit->add_option("file", fit_file, "Ledger CSV")->required();
  fit->add_option("--season", season, "Season year for month-day dates")->required();
  fit->add_option("--target", target, "totalCrops or goodCrops");
  fit->add_option("--delimiter", delimiter, "Field delimiter");

  auto* predict = app.add_subcommand("predict", "Forecast harvest from a stage count");
  PredictArgs pa;
  predict->add_option("calibration", pa.calibration, "Calibration CSV")->required();
  predict->add_option("--stage", pa.stage, "Stage date, e.g. Jul-6 or 2023-07-06")->required();
  predict->add_option("--count", pa.counts, "Object count; repeat per branch")->required();
  predict->add_option("--level", pa.level, "Interval coverage")->check(CLI::Range(0.0, 1.0));
  predict->add_option("--tree-mode", pa.tree_mode, "Tree forecast: sum or whole")
      ->expected(0, 1)
      ->default_str("sum")
      ->check(CLI::IsMember({"sum", "whole"}));
  predict->add_option("--season", pa.season, "Season for month-day dates in the calibration");
  predict->add_option("--count-season", pa.count_season, "Season the counts were taken in");
  predict->add_option("--fruit-weight", pa.fruit_weight, "Mean fruit weight in kg");

  auto* recommend = app.add_subcommand("recommend", "Rank calibration stages as forecast timepoints");
  std::string rec_file;
  cf_scoring_weights weights{1.0, 0.5, 0.5};
  recommend->add_option("calibration", rec_file, "Calibration CSV")->required();
  recommend->add_option("--season", season, "Season for month-day dates");
  recommend->add_option("--fit-weight", weights.fit, "Weight of R2 in the score");
  recommend->add_option("--earliness-weight", weights.earliness, "Weight of earliness");
  recommend->add_option("--risk-weight", weights.risk, "Weight of remaining weather risk");

  auto* simulate = app.add_subcommand("simulate", "Simulate a season ledger");
  std::string params_file;
  int trees = 3, branches = 6;
  std::optional<long long> seed;
  std::vector<std::string> sets;
  simulate->add_option("params", params_file, "key = value parameter file");
  simulate->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
  simulate->add_option("--branches", branches, "Branches per tree")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Random seed")->check(CLI::NonNegativeNumber);
  simulate->add_option("--set", sets, "Override a parameter, key=value");

  auto* plot = app.add_subcommand("plot", "Write an SVG plot");
  std::string kind = "trajectory", ledger_file, cal_file, out_file;
  int width = 900, height = 600;
  double level = 0.95;
  plot->add_option("--kind", kind, "trajectory, tree_aggregate or regression_grid");
  plot->add_option("--ledger", ledger_file, "Ledger CSV");
  plot->add_option("--calibration", cal_file, "Calibration CSV");
  plot->add_option("-o,--output", out_file, "Output SVG path")->required();
  plot->add_option("--season", season, "Season year for month-day dates");
  plot->add_option("--width", width, "Image width in px")->check(CLI::PositiveNumber);
  plot->add_option("--height", height, "Image height in px")->check(CLI::PositiveNumber);
  plot->add_option("--level", level, "Prediction band coverage")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*predict && predict->count("--tree-mode") && pa.tree_mode.empty()) pa.tree_mode = "sum";

  if (*validate) result = cmd_validate(opts, validate_file, season, delimiter_of(delimiter));
  else if (*fit) result = cmd_fit(opts, fit_file, season, target, delimiter_of(delimiter));
  else if (*predict) result = cmd_predict(opts, pa);
  else if (*recommend) result = cmd_recommend(opts, rec_file, season, weights);
  else if (*simulate) result = cmd_simulate(opts, params_file, trees, branches, seed, sets);
  else if (*plot)
    result = cmd_plot(opts, kind, ledger_file, cal_file, out_file, season, width, height, level);
  return result;
}
