#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cherry/forecast.hpp"
#include "cherry/phenology.hpp"

namespace cherry {

struct FrostEvent {
  BbchStage stage;
  double kill_fraction = 0.0;
};

// Multiplicative fruit-development model. Each factor is applied once, at the
// first schedule stage of its phase:
//   swelling buds (bud, BBCH < 53)      B = initial_buds * count_scale
//   open cluster (bud, BBCH >= 53)      * flower_bud_fraction
//   bloom (blossom)                     * blossoms_per_cluster
//   first fruit stage (cherry)          * fruit_set_fraction * prod(1 - drop)
//   every later cherry stage / harvest  * (1 - attrition_rate)
// Frost multiplies the count at the first stage with BBCH >= frost stage.
struct SimulationParams {
  int initial_buds = 150;
  // Per-branch bud counts are drawn uniformly from initial_buds * [1 - s, 1 + s].
  double bud_spread = 0.4;
  double flower_bud_fraction = 0.55;
  double blossoms_per_cluster = 2.7;
  double fruit_set_fraction = 0.35;
  std::vector<double> drop_fractions{0.1, 0.05};
  double attrition_rate = 0.01;
  std::optional<FrostEvent> frost;
  double noise_sd = 0.0;
  double good_fraction = 0.6;
  // Harvest records carry count * fruit_weight_kg rounded to grams; 0 omits weights.
  double fruit_weight_kg = 0.0087;
  // Multiplies every branch's bud count; large scales make rounding negligible.
  std::int64_t count_scale = 1;
  std::uint64_t seed = 1;
};

// Throws Error(invalid_argument) naming the first offending parameter.
void validate(const SimulationParams& params);

// The eight 2023 campaign days from dormancy to harvest.
std::vector<StageKey> default_schedule(int season = 2023);

struct SimulationConfig {
  SimulationParams params;
  std::vector<StageKey> schedule = default_schedule();
};

/// Plain "key = value" configuration. '#' starts a comment. Keys mirror the
/// SimulationParams fields; drop_fractions is a comma list; frost is
/// "frost_bbch" plus "frost_kill_fraction". Each "stage = DATE, BBCH, TYPE[, label]"
/// line appends to a custom schedule replacing the default.
SimulationConfig parse_simulation_config(std::string_view text);

struct BranchIdentity {
  std::string tree_id = "sim_1";
  std::string branch_id = "1s1";
  std::optional<std::string> branch_color;
};

BranchIdentity branch_identity(int tree_index, int branch_index);

// Noiseless expected count at each schedule stage, before rounding.
std::vector<double> expected_counts(const SimulationParams& params,
                                    std::span<const StageKey> schedule);

/// One branch trajectory: a developmental record per stage and
/// goodCrops/badCrops/totalCrops at the final (harvest) stage.
/// Throws Error(empty_schedule) for an empty schedule.
std::vector<CountRecord> simulate_branch(const SimulationParams& params,
                                         std::span<const StageKey> schedule,
                                         const BranchIdentity& identity = {});

// Parameters used for one branch of a season: drawn bud count and derived seed.
SimulationParams branch_params(const SimulationParams& params, int tree_index,
                               int branch_index);

SeasonLedger simulate_season(const SimulationParams& params, int n_trees, int n_branches,
                             std::span<const StageKey> schedule);

/// Product of all factors applied after `stage` up to harvest: the exact
/// regression slope of a noiseless simulated season at that stage.
/// Throws Error(unknown_stage) when the date is not in the schedule.
double expected_survival_slope(const SimulationParams& params,
                               std::span<const StageKey> schedule, Date stage);

}  // namespace cherry
