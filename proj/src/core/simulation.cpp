#include "cherry/simulation.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cherry/error.hpp"
#include "cherry/ingest.hpp"

namespace cherry {

namespace {

enum class Phase { swelling, open_cluster, bloom, fruit, harvest };

Phase phase_of(const StageKey& s) {
  switch (s.object_type) {
    case ObjectType::bud: return s.bbch.code() < 53 ? Phase::swelling : Phase::open_cluster;
    case ObjectType::blossom: return Phase::bloom;
    case ObjectType::cherry: return Phase::fruit;
    default: return Phase::harvest;
  }
}

void validate_schedule(std::span<const StageKey> schedule) {
  if (schedule.empty()) throw Error(ErrorCode::empty_schedule, "empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const bool last = i + 1 == schedule.size();
    if ((phase_of(schedule[i]) == Phase::harvest) != last)
      throw Error(ErrorCode::invalid_argument,
                  "schedule must end in exactly one harvest stage (a crop object type)");
    if (i > 0) {
      if (!(schedule[i - 1].date < schedule[i].date))
        throw Error(ErrorCode::invalid_argument, "schedule dates must be strictly ascending");
      if (phase_of(schedule[i]) < phase_of(schedule[i - 1]))
        throw Error(ErrorCode::invalid_argument,
                    "schedule stages must follow bud, blossom, cherry, harvest order");
    }
  }
}

// Multiplier applied on entering each stage.
std::vector<double> stage_factors(const SimulationParams& p, std::span<const StageKey> schedule) {
  std::vector<double> factors;
  factors.reserve(schedule.size());
  bool flower = false, cluster = false, set = false, frost = false;
  for (const auto& stage : schedule) {
    const Phase ph = phase_of(stage);
    double m = 1.0;
    if (ph >= Phase::open_cluster && !flower) {
      m *= p.flower_bud_fraction;
      flower = true;
    }
    if (ph >= Phase::bloom && !cluster) {
      m *= p.blossoms_per_cluster;
      cluster = true;
    }
    if (ph >= Phase::fruit) {
      if (!set) {
        m *= p.fruit_set_fraction;
        for (double d : p.drop_fractions) m *= 1.0 - d;
        set = true;
      } else {
        m *= 1.0 - p.attrition_rate;
      }
    }
    if (p.frost && !frost && stage.bbch >= p.frost->stage) {
      m *= 1.0 - p.frost->kill_fraction;
      frost = true;
    }
    factors.push_back(m);
  }
  return factors;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller on raw engine output so draws match across standard libraries.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = unit_open(rng());
  const double u2 = unit_open(rng());
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t emit_count(double expected, double noise_sd, std::mt19937_64& rng) {
  double value = expected;
  if (noise_sd > 0.0) value += noise_sd * standard_normal(rng);
  return std::max<std::int64_t>(0, std::llround(value));
}

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw Error(ErrorCode::invalid_argument, std::string(name) + " must lie in [0, 1]");
}

constexpr std::array<std::string_view, 6> kColors = {"pink", "blue", "green",
                                                     "yellow", "orange", "white"};

}  // namespace

void validate(const SimulationParams& p) {
  if (p.initial_buds < 1) throw Error(ErrorCode::invalid_argument, "initial_buds must be >= 1");
  if (!(p.bud_spread >= 0.0 && p.bud_spread < 1.0))
    throw Error(ErrorCode::invalid_argument, "bud_spread must lie in [0, 1)");
  require_fraction(p.flower_bud_fraction, "flower_bud_fraction");
  if (!(p.blossoms_per_cluster > 0.0) || !std::isfinite(p.blossoms_per_cluster))
    throw Error(ErrorCode::invalid_argument, "blossoms_per_cluster must be positive");
  require_fraction(p.fruit_set_fraction, "fruit_set_fraction");
  for (double d : p.drop_fractions) require_fraction(d, "drop_fractions");
  require_fraction(p.attrition_rate, "attrition_rate");
  if (p.frost) require_fraction(p.frost->kill_fraction, "frost_kill_fraction");
  if (!(p.noise_sd >= 0.0) || !std::isfinite(p.noise_sd))
    throw Error(ErrorCode::invalid_argument, "noise_sd must be >= 0");
  require_fraction(p.good_fraction, "good_fraction");
  if (!(p.fruit_weight_kg >= 0.0) || !std::isfinite(p.fruit_weight_kg))
    throw Error(ErrorCode::invalid_argument, "fruit_weight_kg must be >= 0");
  if (p.count_scale < 1) throw Error(ErrorCode::invalid_argument, "count_scale must be >= 1");
}

std::vector<StageKey> default_schedule(int season) {
  using namespace std::chrono;
  auto key = [&](unsigned m, unsigned d, int code, ObjectType t) {
    const BbchStage stage(code);
    return StageKey{Date{year{season}, month{m}, day{d}}, stage, t,
                    t == ObjectType::total_crops ? std::string("Harvest") : bbch_label(stage)};
  };
  return {key(3, 2, 51, ObjectType::bud),     key(4, 14, 56, ObjectType::bud),
          key(4, 25, 60, ObjectType::blossom), key(5, 25, 65, ObjectType::blossom),
          key(6, 6, 75, ObjectType::cherry),   key(6, 16, 81, ObjectType::cherry),
          key(7, 6, 85, ObjectType::cherry),   key(7, 14, 89, ObjectType::total_crops)};
}

SimulationConfig parse_simulation_config(std::string_view text) {
  SimulationConfig config;
  auto& p = config.params;
  std::optional<int> frost_bbch;
  std::optional<double> frost_kill;
  std::optional<int> season;
  std::vector<StageKey> stages;

  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::invalid_argument,
                  "line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    auto number = [&]() {
      auto v = csv::parse_decimal(value);
      if (!v || !std::isfinite(*v))
        throw Error(ErrorCode::invalid_argument, key + ": not a number '" + value + "'");
      return *v;
    };
    auto integer = [&]() -> std::int64_t {
      const double v = number();
      if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw Error(ErrorCode::invalid_argument, key + ": not an integer '" + value + "'");
      return std::int64_t(v);
    };

    if (key == "initial_buds") {
      p.initial_buds = int(std::clamp<std::int64_t>(integer(), -1, 1'000'000'000));
    } else if (key == "bud_spread") {
      p.bud_spread = number();
    } else if (key == "flower_bud_fraction") {
      p.flower_bud_fraction = number();
    } else if (key == "blossoms_per_cluster") {
      p.blossoms_per_cluster = number();
    } else if (key == "fruit_set_fraction") {
      p.fruit_set_fraction = number();
    } else if (key == "drop_fractions") {
      p.drop_fractions.clear();
      for (const auto& row : csv::split(value, ',')) {
        for (const auto& field : row.fields) {
          if (field.text.empty()) continue;
          auto v = csv::parse_decimal(field.text);
          if (!v) throw Error(ErrorCode::invalid_argument, "drop_fractions: not a number '" + field.text + "'");
          p.drop_fractions.push_back(*v);
        }
      }
    } else if (key == "attrition_rate") {
      p.attrition_rate = number();
    } else if (key == "frost_bbch") {
      auto v = integer();
      if (v < 0 || v > 99) throw Error(ErrorCode::invalid_argument, "frost_bbch must lie in [0, 99]");
      frost_bbch = int(v);
    } else if (key == "frost_kill_fraction") {
      frost_kill = number();
    } else if (key == "noise_sd") {
      p.noise_sd = number();
    } else if (key == "good_fraction") {
      p.good_fraction = number();
    } else if (key == "fruit_weight_kg") {
      p.fruit_weight_kg = number();
    } else if (key == "count_scale") {
      p.count_scale = integer();
    } else if (key == "seed") {
      const auto v = integer();
      if (v < 0) throw Error(ErrorCode::invalid_argument, "seed must be >= 0");
      p.seed = std::uint64_t(v);
    } else if (key == "season") {
      season = int(integer());
    } else if (key == "stage") {
      const auto rows = csv::split(value, ',');
      if (rows.size() != 1 || rows[0].fields.size() < 3 || rows[0].fields.size() > 4)
        throw Error(ErrorCode::invalid_argument, "stage: expected DATE, BBCH, TYPE[, label]");
      const auto& f = rows[0].fields;
      auto date = parse_iso_date(f[0].text);
      auto code = csv::parse_decimal(f[1].text);
      auto type = parse_object_type(f[2].text);
      if (!date || !code || !type || !BbchStage::try_make(int(*code)))
        throw Error(ErrorCode::invalid_argument, "stage: cannot read '" + value + "'");
      const BbchStage stage{int(*code)};
      stages.push_back({*date, stage, *type,
                        f.size() == 4 ? f[3].text
                                      : (is_harvest(*type) ? "Harvest" : bbch_label(stage))});
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown parameter '" + key + "'");
    }
  }

  if (frost_bbch || frost_kill) {
    if (!frost_bbch || !frost_kill)
      throw Error(ErrorCode::invalid_argument,
                  "frost needs both frost_bbch and frost_kill_fraction");
    p.frost = FrostEvent{BbchStage(*frost_bbch), *frost_kill};
  }
  if (!stages.empty())
    config.schedule = std::move(stages);
  else if (season)
    config.schedule = default_schedule(*season);

  validate(p);
  validate_schedule(config.schedule);
  return config;
}

BranchIdentity branch_identity(int tree_index, int branch_index) {
  BranchIdentity id;
  id.tree_id = "sim_" + std::to_string(tree_index + 1);
  id.branch_id = std::to_string(tree_index + 1) + "s" + std::to_string(branch_index + 1);
  id.branch_color = std::string(kColors[std::size_t(branch_index) % kColors.size()]);
  return id;
}

std::vector<double> expected_counts(const SimulationParams& params,
                                    std::span<const StageKey> schedule) {
  validate(params);
  validate_schedule(schedule);
  std::vector<double> out;
  double value = double(params.initial_buds) * double(params.count_scale);
  for (double f : stage_factors(params, schedule)) {
    value *= f;
    out.push_back(value);
  }
  return out;
}

std::vector<CountRecord> simulate_branch(const SimulationParams& params,
                                         std::span<const StageKey> schedule,
                                         const BranchIdentity& identity) {
  const auto expected = expected_counts(params, schedule);
  std::mt19937_64 rng(params.seed);

  std::vector<CountRecord> out;
  auto base = [&](const StageKey& stage) {
    CountRecord r;
    r.date = stage.date;
    r.season = int(stage.date.year());
    r.bbch = stage.bbch;
    r.tree_id = identity.tree_id;
    r.branch_id = identity.branch_id;
    r.branch_color = identity.branch_color;
    return r;
  };

  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    auto r = base(schedule[i]);
    r.object_type = schedule[i].object_type;
    r.object_count = emit_count(expected[i], params.noise_sd, rng);
    out.push_back(std::move(r));
  }

  const auto& harvest = schedule.back();
  const std::int64_t total = emit_count(expected.back(), params.noise_sd, rng);
  const std::int64_t good = std::llround(double(total) * params.good_fraction);
  const std::int64_t bad = total - good;
  auto grams = [&](std::int64_t n) {
    return std::round(double(n) * params.fruit_weight_kg * 1000.0) / 1000.0;
  };
  for (auto [type, count] : {std::pair{ObjectType::good_crops, good},
                             std::pair{ObjectType::bad_crops, bad},
                             std::pair{ObjectType::total_crops, total}}) {
    auto r = base(harvest);
    r.object_type = type;
    r.object_count = count;
    if (params.fruit_weight_kg > 0.0) {
      r.crop_weight = type == ObjectType::total_crops ? grams(good) + grams(bad) : grams(count);
    }
    out.push_back(std::move(r));
  }
  return out;
}

SimulationParams branch_params(const SimulationParams& params, int tree_index,
                               int branch_index) {
  SimulationParams p = params;
  const std::uint64_t slot =
      (std::uint64_t(std::uint32_t(tree_index)) << 32) | std::uint32_t(branch_index);
  p.seed = splitmix64(params.seed ^ splitmix64(slot));
  const double u = unit_open(splitmix64(p.seed));
  const double buds = double(params.initial_buds) * (1.0 - params.bud_spread + 2.0 * params.bud_spread * u);
  p.initial_buds = int(std::max<long long>(1, std::llround(buds)));
  return p;
}

SeasonLedger simulate_season(const SimulationParams& params, int n_trees, int n_branches,
                             std::span<const StageKey> schedule) {
  if (n_trees < 1 || n_branches < 1)
    throw Error(ErrorCode::invalid_argument, "trees and branches must be >= 1");
  validate(params);
  validate_schedule(schedule);

  std::vector<CountRecord> records;
  for (int t = 0; t < n_trees; ++t) {
    for (int b = 0; b < n_branches; ++b) {
      auto branch = simulate_branch(branch_params(params, t, b), schedule, branch_identity(t, b));
      records.insert(records.end(), std::make_move_iterator(branch.begin()),
                     std::make_move_iterator(branch.end()));
    }
  }
  return build_ledger(records).ledger;
}

double expected_survival_slope(const SimulationParams& params,
                               std::span<const StageKey> schedule, Date stage) {
  validate(params);
  validate_schedule(schedule);
  const auto factors = stage_factors(params, schedule);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].date != stage) continue;
    double product = 1.0;
    for (std::size_t j = i + 1; j < factors.size(); ++j) product *= factors[j];
    return product;
  }
  throw Error(ErrorCode::unknown_stage, "stage " + format_iso_date(stage) + " not in schedule");
}

}  // namespace cherry
