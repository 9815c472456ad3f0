#include "cherry/cherry.h"

#include <cstring>
#include <fstream>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cherry/error.hpp"
#include "cherry/forecast.hpp"
#include "cherry/ingest.hpp"
#include "cherry/phenology.hpp"
#include "cherry/plot.hpp"
#include "cherry/regression.hpp"
#include "cherry/simulation.hpp"

struct cf_ledger {
  cherry::SeasonLedger ledger;
};

struct cf_violations {
  struct Item {
    cherry::Violation v;
    std::string keys;
    std::string rows;
    std::size_t row = 0;
  };
  std::vector<Item> items;
};

struct cf_calibration {
  cherry::CalibrationTable table;
};

struct cf_forecast {
  cherry::Forecast forecast;
};

struct cf_recommendation {
  std::vector<cherry::Recommendation> ranked;
};

struct cf_sim_params {
  std::string text;
  cherry::SimulationConfig config;
};

namespace {

thread_local std::string g_last_error;

cf_status fail(cf_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
cf_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CF_OK;
  } catch (const cherry::Error& e) {
    return fail(static_cast<cf_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CF_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(CF_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(CF_INTERNAL_ERROR, "unknown failure");
  }
}

#define CF_REQUIRE(cond, what)                         \
  do {                                                 \
    if (!(cond)) return fail(CF_INVALID_ARGUMENT, what); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void split_date(cherry::Date d, int& y, int& m, int& day) {
  y = int(d.year());
  m = int(unsigned(d.month()));
  day = int(unsigned(d.day()));
}

bool valid_object_type(int t) { return t >= CF_OBJECT_BUD && t <= CF_OBJECT_TOTAL_CROPS; }

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cherry::Error(cherry::ErrorCode::io_error, std::string("cannot open ") + path);
  return cherry::csv::read_all(in);
}

// Violation record indices point into the parsed record list; map them back
// to file rows.
cf_violations* collect_violations(const cherry::ParseResult& parsed,
                                  const std::vector<cherry::Violation>& built) {
  auto* out = new cf_violations;
  auto add = [&](const cherry::Violation& v) {
    cf_violations::Item item;
    item.v = v;
    for (const auto& k : v.offending_keys) {
      if (!item.keys.empty()) item.keys += "; ";
      item.keys += k;
    }
    std::vector<std::size_t> rows;
    if (v.row) rows.push_back(*v.row);
    for (auto idx : v.record_indices)
      if (idx < parsed.rows.size()) rows.push_back(parsed.rows[idx]);
    for (auto r : rows) {
      if (!item.rows.empty()) item.rows += ',';
      item.rows += std::to_string(r);
    }
    item.row = rows.empty() ? 0 : rows.front();
    out->items.push_back(std::move(item));
  };
  for (const auto& v : parsed.violations) add(v);
  for (const auto& v : built) add(v);
  return out;
}

cf_status parse_ledger(const std::string& text, int season, char delimiter, cf_ledger** ledger,
                       cf_violations** violations) {
  return guard([&] {
    cherry::CsvDialect dialect;
    if (delimiter) dialect.delimiter = delimiter;
    auto parsed = cherry::parse_csv(text, season, dialect);
    auto built = cherry::build_ledger(parsed.records);
    std::unique_ptr<cf_violations> v(collect_violations(parsed, built.violations));
    if (ledger) *ledger = new cf_ledger{std::move(built.ledger)};
    if (violations) *violations = v.release();
  });
}

cherry::ForecastOptions to_options(const cf_forecast_options* o) {
  cherry::ForecastOptions opts;
  if (!o) return opts;
  opts.level = o->level;
  if (o->count_season) opts.count_season = o->count_season;
  if (o->has_fruit_weight) opts.mean_fruit_weight_kg = o->fruit_weight_kg;
  return opts;
}

cherry::Date resolve_stage(const cherry::CalibrationTable& table, const char* stage) {
  auto date = cherry::parse_date(stage, table.season);
  if (!date)
    throw cherry::Error(cherry::ErrorCode::invalid_argument,
                        std::string("unreadable stage '") + stage + "'");
  return *date;
}

cherry::SimulationConfig parse_config(const std::string& text) {
  return cherry::parse_simulation_config(text);
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "1.0.0"; }

const char* cf_last_error(void) { return g_last_error.c_str(); }

const char* cf_status_name(cf_status status) {
  switch (status) {
    case CF_OK: return "ok";
    case CF_INVALID_ARGUMENT: return "invalid_argument";
    case CF_NOT_FOUND: return "not_found";
    case CF_INSUFFICIENT_DATA: return "insufficient_data";
    case CF_DEGENERATE_PREDICTOR: return "degenerate_predictor";
    case CF_DOMAIN_ERROR: return "domain_error";
    case CF_NO_TARGET_DATA: return "no_target_data";
    case CF_NO_CALIBRATION: return "no_calibration";
    case CF_NO_WEIGHT_DATA: return "no_weight_data";
    case CF_EMPTY_SCHEDULE: return "empty_schedule";
    case CF_UNKNOWN_STAGE: return "unknown_stage";
    case CF_EMPTY_INPUT: return "empty_input";
    case CF_PARSE_ERROR: return "parse_error";
    case CF_IO_ERROR: return "io_error";
    case CF_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

void cf_string_free(char* text) { std::free(text); }

const char* cf_object_type_name(int object_type) {
  if (!valid_object_type(object_type)) return nullptr;
  return cherry::to_string(static_cast<cherry::ObjectType>(object_type)).data();
}

int cf_object_type_parse(const char* text) {
  if (!text) return -1;
  auto t = cherry::parse_object_type(text);
  return t ? static_cast<int>(*t) : -1;
}

// ---- ledger

cf_status cf_ledger_parse(const char* text, size_t length, int season, char delimiter,
                          cf_ledger** ledger, cf_violations** violations) {
  CF_REQUIRE(text || length == 0, "text is null");
  return parse_ledger(std::string(text ? text : "", length), season, delimiter, ledger,
                      violations);
}

cf_status cf_ledger_read_file(const char* path, int season, char delimiter, cf_ledger** ledger,
                              cf_violations** violations) {
  CF_REQUIRE(path, "path is null");
  std::string text;
  if (auto s = guard([&] { text = read_file(path); }); s != CF_OK) return s;
  return parse_ledger(text, season, delimiter, ledger, violations);
}

void cf_ledger_free(cf_ledger* ledger) { delete ledger; }

size_t cf_ledger_size(const cf_ledger* ledger) { return ledger ? ledger->ledger.size() : 0; }

int cf_ledger_season(const cf_ledger* ledger) {
  return ledger ? ledger->ledger.season().value_or(0) : 0;
}

size_t cf_ledger_branch_count(const cf_ledger* ledger) {
  return ledger ? ledger->ledger.branches().size() : 0;
}

cf_status cf_ledger_record(const cf_ledger* ledger, size_t index, cf_record* out) {
  CF_REQUIRE(ledger && out, "null argument");
  if (index >= ledger->ledger.size()) return fail(CF_NOT_FOUND, "record index out of range");
  const auto& r = ledger->ledger.records()[index];
  split_date(r.date, out->year, out->month, out->day);
  out->season = r.season;
  out->bbch = r.bbch.code();
  out->tree_id = r.tree_id.c_str();
  out->branch_id = r.branch_id.c_str();
  out->branch_color = r.branch_color ? r.branch_color->c_str() : nullptr;
  out->object_type = static_cast<int>(r.object_type);
  out->object_count = r.object_count;
  out->has_weight = r.crop_weight.has_value();
  out->weight_kg = r.crop_weight.value_or(0.0);
  return CF_OK;
}

cf_status cf_ledger_emit_csv(const cf_ledger* ledger, char delimiter, char** out) {
  CF_REQUIRE(ledger && out, "null argument");
  return guard([&] {
    cherry::CsvDialect dialect;
    if (delimiter) dialect.delimiter = delimiter;
    *out = dup_string(cherry::emit_csv(ledger->ledger, dialect));
  });
}

cf_status cf_ledger_mean_fruit_weight(const cf_ledger* ledger, double* out_kg) {
  CF_REQUIRE(ledger && out_kg, "null argument");
  return guard([&] { *out_kg = cherry::mean_fruit_weight(ledger->ledger); });
}

void cf_violations_free(cf_violations* violations) { delete violations; }

size_t cf_violations_count(const cf_violations* violations) {
  return violations ? violations->items.size() : 0;
}

size_t cf_violations_error_count(const cf_violations* violations) {
  if (!violations) return 0;
  size_t n = 0;
  for (const auto& i : violations->items) n += i.v.severity == cherry::Severity::error;
  return n;
}

cf_status cf_violation_get(const cf_violations* violations, size_t index, cf_violation* out) {
  CF_REQUIRE(violations && out, "null argument");
  if (index >= violations->items.size()) return fail(CF_NOT_FOUND, "violation index out of range");
  const auto& item = violations->items[index];
  out->severity = item.v.severity == cherry::Severity::error ? CF_SEVERITY_ERROR
                                                             : CF_SEVERITY_WARNING;
  out->rule = item.v.rule_id().data();
  out->message = item.v.message.c_str();
  out->keys = item.keys.c_str();
  out->row = item.row;
  out->rows = item.rows.c_str();
  return CF_OK;
}

// ---- regression

cf_status cf_fit_ols(const double* x, const double* y, size_t n, cf_fit* out) {
  CF_REQUIRE(out && ((x && y) || n == 0), "null argument");
  return guard([&] {
    std::vector<cherry::Point> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {x[i], y[i]};
    const auto fit = cherry::fit_ols(pts);
    out->slope = fit.slope;
    out->intercept = fit.intercept;
    out->has_r_squared = fit.r_squared.has_value();
    out->r_squared = fit.r_squared.value_or(0.0);
    out->has_p_value = fit.p_value.has_value();
    out->p_value = fit.p_value.value_or(0.0);
    out->n = fit.n;
    out->residual_se = fit.residual_se;
    out->sxx = fit.sxx;
    out->mean_x = fit.mean_x;
    out->mean_y = fit.mean_y;
  });
}

cf_status cf_predict_interval(const cf_fit* fit, double x, double level, double* point,
                              double* lower, double* upper) {
  CF_REQUIRE(fit && point && lower && upper, "null argument");
  return guard([&] {
    cherry::RegressionFit f;
    f.slope = fit->slope;
    f.intercept = fit->intercept;
    f.n = fit->n;
    f.residual_se = fit->residual_se;
    f.sxx = fit->sxx;
    f.mean_x = fit->mean_x;
    f.mean_y = fit->mean_y;
    const auto pi = cherry::predict_with_interval(f, x, level);
    *point = pi.point;
    *lower = pi.lower;
    *upper = pi.upper;
  });
}

cf_status cf_incomplete_beta(double x, double a, double b, double* out) {
  CF_REQUIRE(out, "null argument");
  return guard([&] { *out = cherry::regularized_incomplete_beta(x, a, b); });
}

cf_status cf_p_value(double t, int df, double* out) {
  CF_REQUIRE(out, "null argument");
  return guard([&] { *out = cherry::p_value_two_sided(t, df); });
}

cf_status cf_t_critical(double level, int df, double* out) {
  CF_REQUIRE(out, "null argument");
  return guard([&] { *out = cherry::t_critical(level, df); });
}

const char* cf_p_value_band(double p) {
  if (!(p > 0.0 && p <= 1.0)) return nullptr;
  return cherry::p_value_band(p).data();
}

// ---- calibration

cf_status cf_calibrate(const cf_ledger* ledger, int target, cf_calibration** out) {
  CF_REQUIRE(ledger && out, "null argument");
  CF_REQUIRE(target == CF_OBJECT_TOTAL_CROPS || target == CF_OBJECT_GOOD_CROPS,
             "target must be totalCrops or goodCrops");
  return guard([&] {
    *out = new cf_calibration{
        cherry::calibrate(ledger->ledger, static_cast<cherry::ObjectType>(target))};
  });
}

cf_status cf_calibration_parse(const char* text, size_t length, int season,
                               cf_calibration** out) {
  CF_REQUIRE(out && (text || length == 0), "null argument");
  return guard([&] {
    std::optional<int> s;
    if (season) s = season;
    *out = new cf_calibration{
        cherry::parse_calibration_csv(std::string_view(text ? text : "", length), s)};
  });
}

cf_status cf_calibration_read_file(const char* path, int season, cf_calibration** out) {
  CF_REQUIRE(path && out, "null argument");
  return guard([&] {
    const auto text = read_file(path);
    std::optional<int> s;
    if (season) s = season;
    *out = new cf_calibration{cherry::parse_calibration_csv(text, s)};
  });
}

void cf_calibration_free(cf_calibration* calibration) { delete calibration; }

cf_status cf_calibration_emit_csv(const cf_calibration* calibration, char** out) {
  CF_REQUIRE(calibration && out, "null argument");
  return guard([&] { *out = dup_string(cherry::emit_calibration_csv(calibration->table)); });
}

int cf_calibration_season(const cf_calibration* calibration) {
  return calibration ? calibration->table.season : 0;
}

int cf_calibration_target(const cf_calibration* calibration) {
  return calibration ? static_cast<int>(calibration->table.target) : -1;
}

size_t cf_calibration_count(const cf_calibration* calibration) {
  return calibration ? calibration->table.entries.size() : 0;
}

cf_status cf_calibration_entry_get(const cf_calibration* calibration, size_t index,
                                   cf_calibration_entry* out) {
  CF_REQUIRE(calibration && out, "null argument");
  if (index >= calibration->table.entries.size())
    return fail(CF_NOT_FOUND, "calibration index out of range");
  const auto& e = calibration->table.entries[index];
  split_date(e.stage.date, out->year, out->month, out->day);
  out->bbch = e.stage.bbch.code();
  out->object_type = static_cast<int>(e.stage.object_type);
  out->label = e.stage.label.c_str();
  out->p_band = e.p_band.c_str();
  out->slope = e.fit.slope;
  out->intercept = e.fit.intercept;
  out->has_r_squared = e.fit.r_squared.has_value();
  out->r_squared = e.fit.r_squared.value_or(0.0);
  out->has_p_value = e.fit.p_value.has_value();
  out->p_value = e.fit.p_value.value_or(0.0);
  out->n = e.fit.n;
  out->has_interval_stats = e.has_interval_stats;
  out->residual_se = e.fit.residual_se;
  return CF_OK;
}

size_t cf_calibration_annotation_count(const cf_calibration* calibration) {
  return calibration ? calibration->table.annotations.size() : 0;
}

const char* cf_calibration_annotation(const cf_calibration* calibration, size_t index) {
  if (!calibration || index >= calibration->table.annotations.size()) return nullptr;
  return calibration->table.annotations[index].c_str();
}

// ---- forecasts

cf_forecast_options cf_forecast_options_default(void) {
  return cf_forecast_options{0.95, 0, 0, 0.0};
}

cf_status cf_forecast_branch(const cf_calibration* calibration, const char* stage, double count,
                             const cf_forecast_options* options, cf_forecast** out) {
  CF_REQUIRE(calibration && stage && out, "null argument");
  return guard([&] {
    const auto date = resolve_stage(calibration->table, stage);
    *out = new cf_forecast{
        cherry::forecast_branch(calibration->table, date, count, to_options(options))};
  });
}

cf_status cf_forecast_tree(const cf_calibration* calibration, const char* stage,
                           const double* counts, size_t n_counts, int mode,
                           const cf_forecast_options* options, cf_forecast** out) {
  CF_REQUIRE(calibration && stage && out && (counts || n_counts == 0), "null argument");
  CF_REQUIRE(mode == CF_TREE_SUM_OF_BRANCHES || mode == CF_TREE_WHOLE, "unknown tree mode");
  return guard([&] {
    const auto date = resolve_stage(calibration->table, stage);
    std::span<const double> span(counts, n_counts);
    *out = new cf_forecast{cherry::forecast_tree(
        calibration->table, date, span,
        mode == CF_TREE_WHOLE ? cherry::TreeMode::whole_tree : cherry::TreeMode::sum_of_branches,
        to_options(options))};
  });
}

void cf_forecast_free(cf_forecast* forecast) { delete forecast; }

cf_status cf_forecast_get(const cf_forecast* forecast, cf_forecast_result* out) {
  CF_REQUIRE(forecast && out, "null argument");
  const auto& f = forecast->forecast;
  out->point = f.point;
  out->lower = f.lower;
  out->upper = f.upper;
  out->level = f.level;
  out->scope = f.scope == cherry::Scope::tree ? CF_SCOPE_TREE : CF_SCOPE_BRANCH;
  split_date(f.stage_used.date, out->year, out->month, out->day);
  out->bbch = f.stage_used.bbch.code();
  out->stage_label = f.stage_used.label.c_str();
  out->has_weight = f.weight_estimate_kg.has_value();
  out->weight_kg = f.weight_estimate_kg.value_or(0.0);
  return CF_OK;
}

size_t cf_forecast_annotation_count(const cf_forecast* forecast) {
  return forecast ? forecast->forecast.annotations.size() : 0;
}

const char* cf_forecast_annotation(const cf_forecast* forecast, size_t index) {
  if (!forecast || index >= forecast->forecast.annotations.size()) return nullptr;
  return forecast->forecast.annotations[index].c_str();
}

// ---- recommendation

cf_status cf_recommend(const cf_calibration* calibration, const cf_scoring_weights* weights,
                       cf_recommendation** out) {
  CF_REQUIRE(calibration && out, "null argument");
  return guard([&] {
    cherry::ScoringWeights w;
    if (weights) w = {weights->fit, weights->earliness, weights->risk};
    const auto risks = cherry::default_risk_windows();
    *out = new cf_recommendation{cherry::recommend_timepoints(calibration->table, risks, w)};
  });
}

void cf_recommendation_free(cf_recommendation* ranking) { delete ranking; }

size_t cf_recommendation_count(const cf_recommendation* ranking) {
  return ranking ? ranking->ranked.size() : 0;
}

cf_status cf_recommendation_get(const cf_recommendation* ranking, size_t index,
                                cf_recommendation_item* out) {
  CF_REQUIRE(ranking && out, "null argument");
  if (index >= ranking->ranked.size()) return fail(CF_NOT_FOUND, "ranking index out of range");
  const auto& r = ranking->ranked[index];
  split_date(r.stage.date, out->year, out->month, out->day);
  out->bbch = r.stage.bbch.code();
  out->object_type = static_cast<int>(r.stage.object_type);
  out->label = r.stage.label.c_str();
  out->score = r.score;
  out->r_squared = r.r_squared;
  out->earliness = r.earliness;
  out->risk_mass = r.risk_mass;
  out->rationale = r.rationale.c_str();
  return CF_OK;
}

void cf_recommendation_pair(const cf_recommendation* ranking, long* early, long* robust) {
  if (early) *early = -1;
  if (robust) *robust = -1;
  if (!ranking) return;
  const auto pair = cherry::recommended_pair(ranking->ranked);
  auto index_of = [&](const std::optional<cherry::Recommendation>& r) -> long {
    if (!r) return -1;
    for (size_t i = 0; i < ranking->ranked.size(); ++i)
      if (ranking->ranked[i].stage == r->stage) return long(i);
    return -1;
  };
  if (early) *early = index_of(pair.early);
  if (robust) *robust = index_of(pair.robust);
}

// ---- simulation

cf_sim_params* cf_sim_params_default(void) {
  try {
    return new cf_sim_params{};
  } catch (...) {
    return nullptr;
  }
}

cf_status cf_sim_params_parse(const char* text, size_t length, cf_sim_params** out) {
  CF_REQUIRE(out && (text || length == 0), "null argument");
  return guard([&] {
    std::string body(text ? text : "", length);
    if (!body.empty() && body.back() != '\n') body.push_back('\n');
    auto config = parse_config(body);
    *out = new cf_sim_params{std::move(body), std::move(config)};
  });
}

cf_status cf_sim_params_read_file(const char* path, cf_sim_params** out) {
  CF_REQUIRE(path && out, "null argument");
  std::string text;
  if (auto s = guard([&] { text = read_file(path); }); s != CF_OK) return s;
  return cf_sim_params_parse(text.data(), text.size(), out);
}

cf_status cf_sim_params_set(cf_sim_params* params, const char* key, const char* value) {
  CF_REQUIRE(params && key && value, "null argument");
  CF_REQUIRE(!std::strpbrk(key, "\n\r=#") && !std::strpbrk(value, "\n\r#"),
             "key or value contains a reserved character");
  return guard([&] {
    auto text = params->text + key + " = " + value + "\n";
    params->config = parse_config(text);
    params->text = std::move(text);
  });
}

void cf_sim_params_free(cf_sim_params* params) { delete params; }

cf_status cf_simulate_season(const cf_sim_params* params, int trees, int branches,
                             cf_ledger** out) {
  CF_REQUIRE(params && out, "null argument");
  return guard([&] {
    *out = new cf_ledger{cherry::simulate_season(params->config.params, trees, branches,
                                                 params->config.schedule)};
  });
}

cf_status cf_sim_expected_slope(const cf_sim_params* params, const char* stage_date,
                                double* out) {
  CF_REQUIRE(params && stage_date && out, "null argument");
  return guard([&] {
    const auto& schedule = params->config.schedule;
    auto date = cherry::parse_date(stage_date, int(schedule.front().date.year()));
    if (!date)
      throw cherry::Error(cherry::ErrorCode::invalid_argument,
                          std::string("unreadable stage '") + stage_date + "'");
    *out = cherry::expected_survival_slope(params->config.params, schedule, *date);
  });
}

// ---- plots

cf_plot_spec cf_plot_spec_default(void) {
  return cf_plot_spec{CF_PLOT_TRAJECTORY, nullptr, 900, 600, 0.95};
}

namespace {

cherry::PlotSpec to_spec(const cf_plot_spec& s) {
  if (s.kind < CF_PLOT_TRAJECTORY || s.kind > CF_PLOT_REGRESSION_GRID)
    throw cherry::Error(cherry::ErrorCode::invalid_argument, "unknown plot kind");
  cherry::PlotSpec spec;
  spec.kind = static_cast<cherry::PlotKind>(s.kind);
  spec.output_path = s.output_path ? s.output_path : "";
  spec.width = s.width;
  spec.height = s.height;
  spec.level = s.level;
  return spec;
}

}  // namespace

cf_status cf_render_svg(const cf_plot_spec* spec, const cf_ledger* ledger,
                        const cf_calibration* calibration, char** out) {
  CF_REQUIRE(spec && out, "null argument");
  return guard([&] {
    *out = dup_string(cherry::render_svg(to_spec(*spec), ledger ? &ledger->ledger : nullptr,
                                         calibration ? &calibration->table : nullptr));
  });
}

cf_status cf_render_plot(const cf_plot_spec* spec, const cf_ledger* ledger,
                         const cf_calibration* calibration) {
  CF_REQUIRE(spec && spec->output_path, "null argument");
  return guard([&] {
    cherry::render_plot(to_spec(*spec), ledger ? &ledger->ledger : nullptr,
                        calibration ? &calibration->table : nullptr);
  });
}

}  // extern "C"
