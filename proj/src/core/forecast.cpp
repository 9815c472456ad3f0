#include "cherry/forecast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "cherry/error.hpp"
#include "cherry/ingest.hpp"

namespace cherry {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string normalize_header(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == ' ' || c == '_' || c == '-') continue;
    // UTF-8 superscript two
    if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xB2) {
      out.push_back('2');
      ++i;
      continue;
    }
    out.push_back(char(std::tolower(c)));
  }
  return out;
}

std::string_view object_plural(ObjectType t) {
  switch (t) {
    case ObjectType::bud: return "Buds";
    case ObjectType::blossom: return "Blossoms";
    case ObjectType::cherry: return "Cherries";
    default: return to_string(t);
  }
}

std::optional<ObjectType> parse_object_plural(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  if (s == "buds") return ObjectType::bud;
  if (s == "blossoms") return ObjectType::blossom;
  if (s == "cherries") return ObjectType::cherry;
  return parse_object_type(text);
}

std::string available_stages(const CalibrationTable& table) {
  std::string out;
  for (const auto& e : table.entries) {
    if (!out.empty()) out += ", ";
    out += format_month_day(e.stage.date);
  }
  return out.empty() ? "none" : out;
}

const CalibrationEntry& require_entry(const CalibrationTable& table, Date stage) {
  const auto* entry = table.find(stage);
  if (!entry)
    throw Error(ErrorCode::no_calibration, "no calibration for stage " + format_iso_date(stage) +
                                               "; available: " + available_stages(table));
  return *entry;
}

void require_target(ObjectType target) {
  if (target != ObjectType::total_crops && target != ObjectType::good_crops)
    throw Error(ErrorCode::invalid_argument, "target must be totalCrops or goodCrops");
}

void add_unique(std::vector<std::string>& notes, const std::string& note) {
  if (std::find(notes.begin(), notes.end(), note) == notes.end()) notes.push_back(note);
}

// Clamping, season and weight bookkeeping shared by branch and tree forecasts.
void finish_forecast(Forecast& f, const CalibrationTable& table, const ForecastOptions& options) {
  if (f.point < 0.0) {
    add_unique(f.annotations, "raw forecast " + fixed(f.point, 2) + " clamped to 0");
    f.point = 0.0;
  }
  if (f.lower < 0.0) {
    f.lower = 0.0;
    add_unique(f.annotations, "lower bound truncated at 0");
  }
  f.upper = std::max(f.upper, f.point);
  if (options.count_season && *options.count_season != table.season)
    add_unique(f.annotations, "cross-season: counts from " + std::to_string(*options.count_season) +
                                  ", calibration from " + std::to_string(table.season));
  if (options.mean_fruit_weight_kg) {
    if (!(*options.mean_fruit_weight_kg >= 0.0))
      throw Error(ErrorCode::invalid_argument, "mean fruit weight must be non-negative");
    f.weight_estimate_kg = f.point * *options.mean_fruit_weight_kg;
  }
}

void check_count(double count) {
  if (!(count >= 0.0) || !std::isfinite(count))
    throw Error(ErrorCode::invalid_argument, "counts must be finite and non-negative");
}

}  // namespace

// ---------------------------------------------------------------------------
// Stage pairing and calibration

std::vector<StageKey> stage_keys(const SeasonLedger& ledger) {
  struct DayTally {
    std::map<ObjectType, int> types;
    std::map<int, int> codes;
  };
  std::map<Date, DayTally> days;
  for (const auto& r : ledger.records()) {
    if (!is_developmental(r.object_type)) continue;
    auto& day = days[r.date];
    ++day.types[r.object_type];
    ++day.codes[r.bbch.code()];
  }

  std::vector<StageKey> keys;
  for (const auto& [date, tally] : days) {
    ObjectType type = ObjectType::bud;
    int best = -1;
    for (const auto& [t, n] : tally.types) {
      if (n >= best) {  // map order is bud < blossom < cherry; later wins ties
        best = n;
        type = t;
      }
    }
    int code = 0;
    best = -1;
    for (const auto& [c, n] : tally.codes) {
      if (n > best) {
        best = n;
        code = c;
      }
    }
    const BbchStage stage(code);
    keys.push_back({date, stage, type, bbch_label(stage)});
  }
  return keys;
}

std::vector<PairedCount> pair_stage_with_harvest(const SeasonLedger& ledger,
                                                 const StageKey& stage, ObjectType target) {
  require_target(target);
  std::vector<PairedCount> out;
  for (const auto& ref : ledger.branches()) {
    if (ref.branch_id == kWholeTree) continue;
    const auto harvest = ledger.harvest_date(ref.tree_id, ref.branch_id);
    std::optional<double> x;
    std::optional<double> y;
    for (const auto& r : ledger.records()) {
      if (r.tree_id != ref.tree_id || r.branch_id != ref.branch_id) continue;
      if (is_developmental(r.object_type) && r.date == stage.date &&
          (!harvest || r.date < *harvest)) {
        x = x.value_or(0.0) + double(r.object_count);
      } else if (r.object_type == target && harvest && r.date == *harvest) {
        y = double(r.object_count);
      }
    }
    if (x && y) out.push_back({ref.tree_id, ref.branch_id, *x, *y});
  }
  return out;
}

const CalibrationEntry* CalibrationTable::find(Date date) const noexcept {
  for (const auto& e : entries) {
    if (e.stage.date == date) return &e;
  }
  return nullptr;
}

CalibrationTable calibrate(const SeasonLedger& ledger, ObjectType target) {
  require_target(target);
  const auto records = ledger.records();
  const bool has_target = std::any_of(records.begin(), records.end(), [&](const CountRecord& r) {
    return r.object_type == target && !r.is_whole_tree();
  });
  if (!has_target)
    throw Error(ErrorCode::no_target_data,
                "ledger has no branch-level " + std::string(to_string(target)) + " records");

  CalibrationTable table;
  table.season = ledger.season().value_or(0);
  table.target = target;
  for (const auto& stage : stage_keys(ledger)) {
    const auto pairs = pair_stage_with_harvest(ledger, stage, target);
    const auto when = format_month_day(stage.date);
    if (pairs.size() < 3) {
      table.annotations.push_back(when + " skipped: " + std::to_string(pairs.size()) +
                                  " complete branch pairs (need 3)");
      continue;
    }
    std::vector<Point> points;
    points.reserve(pairs.size());
    for (const auto& p : pairs) points.push_back({p.x, p.y});
    try {
      CalibrationEntry entry{stage, fit_ols(points), true, {}};
      entry.p_band = entry.fit.p_value ? std::string(p_value_band(*entry.fit.p_value))
                                       : std::string("DEGENERATE");
      table.entries.push_back(std::move(entry));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_predictor) throw;
      table.annotations.push_back(when + " skipped: all branches share one count");
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Calibration CSV

namespace {

constexpr std::string_view kCalibrationColumns[] = {
    "Date",         "Object",          "Development stage", "BBCH",     "Slope",
    "Intercept",    "R2",              "p-value",           "n",        "slope_exact",
    "intercept_exact", "r2_exact",     "p_exact",           "residual_se", "sxx",
    "mean_x",       "mean_y"};
constexpr std::size_t kRequiredColumns = 9;

}  // namespace

std::string emit_calibration_csv(const CalibrationTable& table) {
  std::string out;
  out += "# season=" + std::to_string(table.season) + "\n";
  out += "# target=" + std::string(to_string(table.target)) + "\n";
  for (std::size_t i = 0; i < std::size(kCalibrationColumns); ++i) {
    if (i) out += ',';
    out += kCalibrationColumns[i];
  }
  out += '\n';

  for (const auto& e : table.entries) {
    const auto& f = e.fit;
    std::vector<std::string> cells{
        format_iso_date(e.stage.date),
        std::string(object_plural(e.stage.object_type)),
        e.stage.label,
        std::to_string(e.stage.bbch.code()),
        fixed(f.slope, 6),
        fixed(f.intercept, 6),
        f.r_squared ? fixed(*f.r_squared, 6) : "DEGENERATE",
        e.p_band,
        std::to_string(f.n),
        csv::format_exact(f.slope),
        csv::format_exact(f.intercept),
        f.r_squared ? csv::format_exact(*f.r_squared) : "",
        f.p_value ? csv::format_exact(*f.p_value) : "",
    };
    if (e.has_interval_stats) {
      for (double v : {f.residual_se, f.sxx, f.mean_x, f.mean_y}) cells.push_back(csv::format_exact(v));
    } else {
      cells.insert(cells.end(), 4, "");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv::escape(cells[i], ',');
    }
    out += '\n';
  }
  return out;
}

CalibrationTable parse_calibration_csv(std::string_view text, std::optional<int> season_year) {
  CalibrationTable table;
  std::optional<int> season = season_year;
  std::string body;

  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        body += '\n';
        continue;
      }
      auto key = line.substr(first + 1, eq - first - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      auto value = line.substr(eq + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      value.erase(value.find_last_not_of(" \t\r") + 1);
      if (key == "season" && !season_year) {
        try {
          season = std::stoi(value);
        } catch (const std::exception&) {
          throw Error(ErrorCode::parse_error, "bad season comment '" + value + "'");
        }
      } else if (key == "target") {
        auto t = parse_object_type(value);
        if (!t || (*t != ObjectType::total_crops && *t != ObjectType::good_crops))
          throw Error(ErrorCode::parse_error, "bad target comment '" + value + "'");
        table.target = *t;
      }
      body += '\n';
      continue;
    }
    body += line;
    body += '\n';
  }

  const auto rows = csv::split(body, ',');
  if (rows.empty()) throw Error(ErrorCode::parse_error, "calibration file has no header");

  std::vector<std::size_t> position(std::size(kCalibrationColumns), SIZE_MAX);
  const auto& header = rows.front().fields;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = normalize_header(header[i].text);
    for (std::size_t c = 0; c < std::size(kCalibrationColumns); ++c) {
      if (normalize_header(kCalibrationColumns[c]) == name) position[c] = i;
    }
  }
  for (std::size_t c = 0; c < kRequiredColumns; ++c) {
    if (position[c] == SIZE_MAX)
      throw Error(ErrorCode::parse_error,
                  "calibration file lacks column '" + std::string(kCalibrationColumns[c]) + "'");
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    const auto where = "calibration line " + std::to_string(rows[r].number) + ": ";
    auto cell = [&](std::size_t c) -> std::string {
      if (position[c] == SIZE_MAX || position[c] >= fields.size()) return {};
      return fields[position[c]].text;
    };
    auto number = [&](std::size_t c) -> std::optional<double> {
      auto s = cell(c);
      if (s.empty()) return std::nullopt;
      auto v = csv::parse_decimal(s);
      if (!v) throw Error(ErrorCode::parse_error, where + "unreadable number '" + s + "'");
      return v;
    };

    CalibrationEntry e;
    const auto date_text = cell(0);
    auto date = parse_iso_date(date_text);
    if (!date) {
      if (!season)
        throw Error(ErrorCode::parse_error,
                    where + "month-day date '" + date_text + "' needs a season");
      date = parse_month_day(date_text, *season);
    }
    if (!date) throw Error(ErrorCode::parse_error, where + "unreadable date '" + date_text + "'");
    e.stage.date = *date;

    auto type = parse_object_plural(cell(1));
    if (!type || !is_developmental(*type))
      throw Error(ErrorCode::parse_error, where + "unknown object '" + cell(1) + "'");
    e.stage.object_type = *type;

    auto code = number(3);
    if (!code || *code != std::floor(*code) || !BbchStage::try_make(int(*code)))
      throw Error(ErrorCode::parse_error, where + "bad BBCH code '" + cell(3) + "'");
    e.stage.bbch = BbchStage(int(*code));
    e.stage.label = cell(2).empty() ? bbch_label(e.stage.bbch) : cell(2);

    auto slope = number(9) ? number(9) : number(4);
    auto intercept = number(10) ? number(10) : number(5);
    if (!slope || !intercept)
      throw Error(ErrorCode::parse_error, where + "missing slope or intercept");
    e.fit.slope = *slope;
    e.fit.intercept = *intercept;

    const auto r2_text = cell(6);
    if (auto exact = number(11)) {
      e.fit.r_squared = exact;
    } else if (!r2_text.empty() && r2_text != "DEGENERATE") {
      e.fit.r_squared = number(6);
    }
    e.fit.p_value = number(12);
    e.p_band = cell(7);

    auto n = number(8);
    if (!n || *n < 3 || *n != std::floor(*n))
      throw Error(ErrorCode::parse_error, where + "sample size must be an integer >= 3");
    e.fit.n = std::size_t(*n);

    auto se = number(13);
    auto sxx = number(14);
    auto mx = number(15);
    auto my = number(16);
    e.has_interval_stats = se && sxx && mx && my && *sxx > 0.0;
    if (e.has_interval_stats) {
      e.fit.residual_se = *se;
      e.fit.sxx = *sxx;
      e.fit.mean_x = *mx;
      e.fit.mean_y = *my;
    }
    table.entries.push_back(std::move(e));
  }

  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.stage.date < b.stage.date; });
  if (season)
    table.season = *season;
  else if (!table.entries.empty())
    table.season = int(table.entries.front().stage.date.year());
  return table;
}

const CalibrationEntry* find_stage(const CalibrationTable& table, std::string_view stage) {
  auto date = parse_date(stage, table.season);
  if (!date) return nullptr;
  return table.find(*date);
}

// ---------------------------------------------------------------------------
// Forecasts

Forecast forecast_branch(const CalibrationTable& table, Date stage, double count,
                         const ForecastOptions& options) {
  const auto& entry = require_entry(table, stage);
  check_count(count);

  Forecast f;
  f.level = options.level;
  f.stage_used = entry.stage;
  f.scope = Scope::branch;
  if (entry.has_interval_stats) {
    const auto pi = predict_with_interval(entry.fit, count, options.level);
    f.point = pi.point;
    f.lower = pi.lower;
    f.upper = pi.upper;
    if (pi.degenerate) f.annotations.push_back("degenerate: zero residual spread, interval collapsed");
  } else {
    if (!(options.level > 0.0 && options.level < 1.0))
      throw Error(ErrorCode::domain_error, "coverage level must lie in (0, 1)");
    f.point = f.lower = f.upper = entry.fit.predict(count);
    f.annotations.push_back("interval unavailable: calibration lacks residual statistics");
  }
  finish_forecast(f, table, options);
  return f;
}

Forecast forecast_tree(const CalibrationTable& table, Date stage,
                       std::span<const double> branch_counts, TreeMode mode,
                       const ForecastOptions& options) {
  const auto& entry = require_entry(table, stage);
  if (branch_counts.empty())
    throw Error(ErrorCode::invalid_argument, "tree forecast needs at least one branch count");
  for (double c : branch_counts) check_count(c);

  Forecast f;
  f.level = options.level;
  f.stage_used = entry.stage;
  f.scope = Scope::tree;

  if (mode == TreeMode::sum_of_branches) {
    ForecastOptions per_branch = options;
    per_branch.mean_fruit_weight_kg.reset();
    for (double c : branch_counts) {
      const auto b = forecast_branch(table, stage, c, per_branch);
      f.point += b.point;
      f.lower += b.lower;
      f.upper += b.upper;
      for (const auto& note : b.annotations) add_unique(f.annotations, note);
    }
    add_unique(f.annotations, "sum of per-branch intervals (conservative)");
    finish_forecast(f, table, options);
    return f;
  }

  const double k = double(branch_counts.size());
  double total = 0.0;
  for (double c : branch_counts) total += c;
  const auto& fit = entry.fit;
  f.point = fit.slope * total + k * fit.intercept;
  f.lower = f.upper = f.point;
  if (entry.has_interval_stats) {
    if (fit.residual_se == 0.0) {
      f.annotations.push_back("degenerate: zero residual spread, interval collapsed");
    } else {
      // Prediction variance of the sum of k new branch responses.
      const double dx = total - k * fit.mean_x;
      const double half = t_critical(options.level, fit.df()) * fit.residual_se *
                          std::sqrt(k + k * k / double(fit.n) + dx * dx / fit.sxx);
      f.lower = f.point - half;
      f.upper = f.point + half;
    }
  } else {
    if (!(options.level > 0.0 && options.level < 1.0))
      throw Error(ErrorCode::domain_error, "coverage level must lie in (0, 1)");
    f.annotations.push_back("interval unavailable: calibration lacks residual statistics");
  }
  f.annotations.push_back("extrapolation: branch-level calibration applied to " +
                          std::to_string(branch_counts.size()) +
                          " branch units (intercept scaled accordingly)");
  finish_forecast(f, table, options);
  return f;
}

double mean_fruit_weight(const SeasonLedger& ledger) {
  double weight = 0.0;
  std::int64_t count = 0;
  for (const auto& r : ledger.records()) {
    if (r.object_type != ObjectType::total_crops || !r.crop_weight) continue;
    weight += *r.crop_weight;
    count += r.object_count;
  }
  if (count <= 0) throw Error(ErrorCode::no_weight_data, "no weighed totalCrops records");
  return weight / double(count);
}

// ---------------------------------------------------------------------------
// Timepoint recommendation

std::vector<RiskWindow> default_risk_windows() {
  return {{"night frost during flowering", BbchStage(60), BbchStage(69), 1},
          {"drought during fruit growth", BbchStage(71), BbchStage(85), 1}};
}

std::vector<Recommendation> recommend_timepoints(const CalibrationTable& table,
                                                 std::span<const RiskWindow> risks,
                                                 const ScoringWeights& weights) {
  if (table.entries.empty())
    throw Error(ErrorCode::invalid_argument, "calibration table is empty");
  for (const auto& w : risks) {
    if (w.last < w.first)
      throw Error(ErrorCode::invalid_argument, "risk window '" + w.label + "' is empty");
  }

  const Date first = table.entries.front().stage.date;
  const Date last = table.entries.back().stage.date;
  const int span = days_between(first, last);

  std::vector<Recommendation> out;
  for (const auto& e : table.entries) {
    Recommendation rec;
    rec.stage = e.stage;
    rec.r_squared = e.fit.r_squared.value_or(0.0);
    rec.earliness = span > 0 ? double(days_between(e.stage.date, last)) / span : 1.0;

    std::string risk_notes;
    for (const auto& w : risks) {
      const int width = w.last.code() - w.first.code() + 1;
      const int ahead = std::clamp(w.last.code() - std::max(e.stage.bbch.code(), w.first.code() - 1),
                                   0, width);
      const double mass = w.severity * double(ahead) / width;
      rec.risk_mass += mass;
      if (mass > 0.0) risk_notes += "; " + w.label + " " + fixed(mass, 2);
    }
    rec.score = weights.fit * rec.r_squared + weights.earliness * rec.earliness -
                weights.risk * rec.risk_mass;
    rec.rationale = "R2 " + (e.fit.r_squared ? fixed(rec.r_squared, 2) : std::string("undefined")) +
                    ", earliness " + fixed(rec.earliness, 2) + ", risk " +
                    fixed(rec.risk_mass, 2) + risk_notes;
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.stage.date < b.stage.date;
  });
  return out;
}

TimepointPair recommended_pair(std::span<const Recommendation> ranked) {
  TimepointPair pair;
  for (const auto& r : ranked) {
    if (!pair.early && r.stage.bbch.code() < 60) pair.early = r;
    if (r.stage.object_type == ObjectType::cherry &&
        (!pair.robust || r.stage.date < pair.robust->stage.date))
      pair.robust = r;
  }
  return pair;
}

}  // namespace cherry
