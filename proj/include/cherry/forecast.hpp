#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cherry/phenology.hpp"
#include "cherry/regression.hpp"

namespace cherry {

// One measurement campaign day.
struct StageKey {
  Date date{};
  BbchStage bbch{};
  ObjectType object_type = ObjectType::bud;
  std::string label;

  friend bool operator==(const StageKey&, const StageKey&) = default;
};

// Developmental observation days of the ledger, date-ascending. Each day's
// object type and BBCH code are the most frequent among its records (ties go
// to the more advanced type and the lower code).
std::vector<StageKey> stage_keys(const SeasonLedger& ledger);

struct PairedCount {
  std::string tree_id;
  std::string branch_id;
  double x = 0.0;  // developmental count on the stage date
  double y = 0.0;  // harvest count of the target type
};

// Pairwise-complete: a branch contributes only when it has both a
// developmental count on the stage date and a target harvest record.
std::vector<PairedCount> pair_stage_with_harvest(const SeasonLedger& ledger,
                                                 const StageKey& stage, ObjectType target);

struct CalibrationEntry {
  StageKey stage;
  RegressionFit fit;
  // Tables read from summary files may lack residual_se / sxx / means.
  bool has_interval_stats = true;
  // Band as published when no exact p-value is known.
  std::string p_band;
};

struct CalibrationTable {
  int season = 0;
  ObjectType target = ObjectType::total_crops;
  std::vector<CalibrationEntry> entries;  // date-ascending
  std::vector<std::string> annotations;

  const CalibrationEntry* find(Date date) const noexcept;
};

/// Per-stage fits of harvest count on stage count. Stages with fewer than 3
/// complete pairs (or no x spread) are skipped and annotated. Throws
/// Error(no_target_data) when the ledger holds no target harvest records.
CalibrationTable calibrate(const SeasonLedger& ledger,
                           ObjectType target = ObjectType::total_crops);

// CSV with the published table columns followed by full-precision fields.
std::string emit_calibration_csv(const CalibrationTable& table);

/// Reads emit_calibration_csv output or a hand-typed summary table with only
/// the leading columns. Month-day dates need a season, taken from a
/// "# season=YYYY" comment line or from `season_year`.
CalibrationTable parse_calibration_csv(std::string_view text,
                                       std::optional<int> season_year = std::nullopt);

// Resolves "Jul-6" or "2023-07-06" against the table's entries.
const CalibrationEntry* find_stage(const CalibrationTable& table, std::string_view stage);

enum class Scope { branch, tree };

struct ForecastOptions {
  double level = 0.95;
  // Season the counts were taken in; a different season than the
  // calibration's is allowed but annotated.
  std::optional<int> count_season;
  std::optional<double> mean_fruit_weight_kg;
};

struct Forecast {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  StageKey stage_used;
  Scope scope = Scope::branch;
  std::optional<double> weight_estimate_kg;
  std::vector<std::string> annotations;
};

/// Throws Error(no_calibration) for a stage missing from the table and
/// Error(invalid_argument) for a negative count.
Forecast forecast_branch(const CalibrationTable& table, Date stage, double count,
                         const ForecastOptions& options = {});

enum class TreeMode { sum_of_branches, whole_tree };

Forecast forecast_tree(const CalibrationTable& table, Date stage,
                       std::span<const double> branch_counts, TreeMode mode,
                       const ForecastOptions& options = {});

/// Total totalCrops weight over total totalCrops count, in kg per fruit.
/// Throws Error(no_weight_data) when no weighed fruit exists.
double mean_fruit_weight(const SeasonLedger& ledger);

struct RiskWindow {
  std::string label;
  BbchStage first;
  BbchStage last;
  int severity = 1;
};

// Night frost over flowering [60, 69] and drought over fruit growth [71, 85].
std::vector<RiskWindow> default_risk_windows();

struct ScoringWeights {
  double fit = 1.0;
  double earliness = 0.5;
  double risk = 0.5;
};

struct Recommendation {
  StageKey stage;
  double score = 0.0;
  double r_squared = 0.0;
  double earliness = 0.0;  // 1 at the first entry, 0 at the last, linear in days
  double risk_mass = 0.0;
  std::string rationale;
};

/// Ranks calibration entries by
///   fit * R² + earliness_weight * earliness - risk_weight * risk_mass,
/// where risk_mass sums each window's severity times the share of its BBCH
/// codes still ahead of the stage. Ties go to the earlier date.
std::vector<Recommendation> recommend_timepoints(const CalibrationTable& table,
                                                 std::span<const RiskWindow> risks,
                                                 const ScoringWeights& weights = {});

struct TimepointPair {
  // Best-scoring entry before flowering (BBCH < 60).
  std::optional<Recommendation> early;
  // Earliest cherry-stage entry, i.e. the first count after fruit drop.
  std::optional<Recommendation> robust;
};

TimepointPair recommended_pair(std::span<const Recommendation> ranked);

}  // namespace cherry
