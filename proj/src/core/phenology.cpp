#include "cherry/phenology.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cherry/error.hpp"

namespace cherry {

namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 12> kMonths = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; };
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

std::optional<int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value < 0) return std::nullopt;
  return value;
}

int type_rank(ObjectType t) {
  switch (t) {
    case ObjectType::bud: return 0;
    case ObjectType::blossom: return 1;
    case ObjectType::cherry: return 2;
    default: return 3;
  }
}

Violation make_violation(Severity severity, RuleId rule, std::string message,
                         std::vector<std::string> keys = {},
                         std::vector<std::size_t> indices = {}) {
  Violation v;
  v.severity = severity;
  v.rule = rule;
  v.message = std::move(message);
  v.offending_keys = std::move(keys);
  v.record_indices = std::move(indices);
  return v;
}

bool same_branch(const CountRecord& r, std::string_view tree, std::string_view branch) {
  return r.tree_id == tree && r.branch_id == branch;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dates

std::string format_iso_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(date.year()),
                unsigned(date.month()), unsigned(date.day()));
  return buf;
}

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_digits(text.substr(0, 4));
  auto m = parse_digits(text.substr(5, 2));
  auto d = parse_digits(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  Date date{year{*y}, month{unsigned(*m)}, day{unsigned(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<Date> parse_month_day(std::string_view text, int season_year) {
  auto dash = text.find('-');
  if (dash != 3 || text.size() < 5 || text.size() > 6) return std::nullopt;
  auto name = text.substr(0, 3);
  auto it = std::find_if(kMonths.begin(), kMonths.end(),
                         [&](std::string_view m) { return iequals(m, name); });
  if (it == kMonths.end()) return std::nullopt;
  auto d = parse_digits(text.substr(4));
  if (!d) return std::nullopt;
  Date date{year{season_year}, month{unsigned(it - kMonths.begin() + 1)}, day{unsigned(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_month_day(Date date) {
  return std::string(kMonths[unsigned(date.month()) - 1]) + "-" +
         std::to_string(unsigned(date.day()));
}

std::optional<Date> parse_date(std::string_view text, int season_year) {
  if (auto iso = parse_iso_date(text)) return iso;
  return parse_month_day(text, season_year);
}

int days_between(Date from, Date to) {
  return int((sys_days{to} - sys_days{from}).count());
}

// ---------------------------------------------------------------------------
// Stages and object types

BbchStage::BbchStage(int code) {
  if (code < kMin || code > kMax)
    throw Error(ErrorCode::invalid_argument,
                "BBCH code " + std::to_string(code) + " outside [0, 99]");
  code_ = static_cast<std::uint8_t>(code);
}

std::optional<BbchStage> BbchStage::try_make(int code) noexcept {
  if (code < kMin || code > kMax) return std::nullopt;
  return BbchStage(code);
}

std::string bbch_label(BbchStage stage) {
  switch (stage.code()) {
    case 0: return "Dormancy";
    case 51: return "Swelling";
    case 53: return "Bud burst";
    case 54: return "Green cluster";
    case 55: return "Single flower buds visible";
    case 56: return "Open cluster";
    case 57: return "Sepals open";
    case 59: return "Balloon";
    case 60: return "First bloom";
    case 61: return "Beginning of flowering";
    case 65: return "Full bloom";
    case 67: return "Flowers fading";
    case 69: return "End of flowering";
    case 71: return "Ovary growing";
    case 72: return "Green ovary";
    case 73: return "Second fruit drop";
    case 75: return "Development of fruit";
    case 77: return "Fruit 70% of final size";
    case 81: return "Beginning of fruit coloring";
    case 85: return "Advanced fruit coloring";
    case 87: return "Fruit ripe for picking";
    case 89: return "Fruit ripe for consumption";
    default: return "BBCH " + std::to_string(stage.code());
  }
}

std::string_view to_string(ObjectType type) noexcept {
  switch (type) {
    case ObjectType::bud: return "bud";
    case ObjectType::blossom: return "blossom";
    case ObjectType::cherry: return "cherry";
    case ObjectType::good_crops: return "goodCrops";
    case ObjectType::bad_crops: return "badCrops";
    case ObjectType::total_crops: return "totalCrops";
  }
  return "?";
}

std::optional<ObjectType> parse_object_type(std::string_view text) {
  for (auto t : {ObjectType::bud, ObjectType::blossom, ObjectType::cherry,
                 ObjectType::good_crops, ObjectType::bad_crops, ObjectType::total_crops}) {
    if (iequals(text, to_string(t))) return t;
  }
  return std::nullopt;
}

RecordKey key_of(const CountRecord& record) {
  return {record.date, record.tree_id, record.branch_id, record.object_type};
}

std::string to_string(const RecordKey& key) {
  return format_iso_date(key.date) + "/" + key.tree_id + "/" + key.branch_id + "/" +
         std::string(to_string(key.object_type));
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::error ? "error" : "warning";
}

std::string_view to_string(RuleId rule) noexcept {
  switch (rule) {
    case RuleId::negative_count: return "negative_count";
    case RuleId::negative_weight: return "negative_weight";
    case RuleId::invalid_weight: return "invalid_weight";
    case RuleId::weight_on_non_harvest: return "weight_on_non_harvest";
    case RuleId::season_mismatch: return "season_mismatch";
    case RuleId::empty_identifier: return "empty_identifier";
    case RuleId::whole_tree_developmental: return "whole_tree_developmental";
    case RuleId::count_mismatch: return "count_mismatch";
    case RuleId::weight_mismatch: return "weight_mismatch";
    case RuleId::missing_total: return "missing_total";
    case RuleId::mixed_harvest_group: return "mixed_harvest_group";
    case RuleId::crop_not_final: return "crop_not_final";
    case RuleId::after_harvest: return "after_harvest";
    case RuleId::stage_order: return "stage_order";
    case RuleId::duplicate_key: return "duplicate_key";
    case RuleId::possible_miscount: return "possible_miscount";
    case RuleId::column_count: return "column_count";
    case RuleId::unknown_object_type: return "unknown_object_type";
    case RuleId::bbch_out_of_range: return "bbch_out_of_range";
    case RuleId::bad_date: return "bad_date";
    case RuleId::bad_number: return "bad_number";
  }
  return "?";
}

bool has_errors(std::span<const Violation> violations) noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::error; });
}

// ---------------------------------------------------------------------------
// Ledger

std::optional<int> SeasonLedger::season() const noexcept {
  if (records_.empty()) return std::nullopt;
  return records_.front().season;
}

std::vector<SeasonLedger::BranchRef> SeasonLedger::branches() const {
  std::vector<BranchRef> out;
  for (const auto& r : records_) {
    if (out.empty() || out.back().tree_id != r.tree_id || out.back().branch_id != r.branch_id)
      out.push_back({r.tree_id, r.branch_id});
  }
  return out;
}

std::vector<std::string> SeasonLedger::tree_ids() const {
  std::vector<std::string> out;
  for (const auto& r : records_) {
    if (out.empty() || out.back() != r.tree_id) out.push_back(r.tree_id);
  }
  return out;
}

std::optional<Date> SeasonLedger::harvest_date(std::string_view tree_id,
                                               std::string_view branch_id) const {
  std::optional<Date> latest;
  for (const auto& r : records_) {
    if (!same_branch(r, tree_id, branch_id) || !is_harvest(r.object_type)) continue;
    if (!latest || r.date > *latest) latest = r.date;
  }
  return latest;
}

std::vector<Violation> validate_record(const CountRecord& record) {
  std::vector<Violation> out;
  const auto key = to_string(key_of(record));
  auto add = [&](RuleId rule, std::string message) {
    out.push_back(make_violation(Severity::error, rule, std::move(message), {key}));
  };

  if (record.object_count < 0)
    add(RuleId::negative_count,
        "negative count " + std::to_string(record.object_count));
  if (record.tree_id.empty() || record.branch_id.empty())
    add(RuleId::empty_identifier, "tree_id and branch_id must be non-empty");
  if (!record.date.ok() || int(record.date.year()) != record.season)
    add(RuleId::season_mismatch, "date " + format_iso_date(record.date) +
                                     " does not belong to season " +
                                     std::to_string(record.season));
  if (record.crop_weight) {
    const double w = *record.crop_weight;
    if (!is_harvest(record.object_type))
      add(RuleId::weight_on_non_harvest,
          "crop weight given for " + std::string(to_string(record.object_type)));
    if (!std::isfinite(w))
      add(RuleId::invalid_weight, "crop weight is not a finite number");
    else if (w < 0.0)
      add(RuleId::negative_weight, "negative crop weight");
  }
  if (record.is_whole_tree() && is_developmental(record.object_type))
    add(RuleId::whole_tree_developmental,
        "WHOLE_TREE records may only carry harvest object types");
  return out;
}

std::vector<Violation> check_harvest_consistency(std::span<const CountRecord> group) {
  std::vector<Violation> out;
  if (group.empty()) return out;

  const auto& head = group.front();
  for (const auto& r : group) {
    if (r.date != head.date || r.tree_id != head.tree_id || r.branch_id != head.branch_id) {
      out.push_back(make_violation(Severity::error, RuleId::mixed_harvest_group,
                                   "harvest group mixes dates or branches",
                                   {to_string(key_of(head)), to_string(key_of(r))}));
      return out;
    }
  }

  const CountRecord* good = nullptr;
  const CountRecord* bad = nullptr;
  const CountRecord* total = nullptr;
  for (const auto& r : group) {
    if (r.object_type == ObjectType::good_crops && !good) good = &r;
    if (r.object_type == ObjectType::bad_crops && !bad) bad = &r;
    if (r.object_type == ObjectType::total_crops && !total) total = &r;
  }
  if (!good || !bad) return out;

  std::vector<std::string> keys{to_string(key_of(*good)), to_string(key_of(*bad))};
  if (!total) {
    out.push_back(make_violation(Severity::error, RuleId::missing_total,
                                 "goodCrops and badCrops without totalCrops", keys));
    return out;
  }
  keys.push_back(to_string(key_of(*total)));

  if (good->object_count + bad->object_count != total->object_count) {
    std::ostringstream msg;
    msg << "count mismatch: " << good->object_count << " + " << bad->object_count
        << " != " << total->object_count;
    out.push_back(make_violation(Severity::error, RuleId::count_mismatch, msg.str(), keys));
  }
  if (good->crop_weight && bad->crop_weight && total->crop_weight) {
    const double diff = *good->crop_weight + *bad->crop_weight - *total->crop_weight;
    if (!(std::abs(diff) <= 1e-9)) {
      std::ostringstream msg;
      msg << "weight mismatch: " << *good->crop_weight << " + " << *bad->crop_weight
          << " != " << *total->crop_weight << " kg";
      out.push_back(make_violation(Severity::error, RuleId::weight_mismatch, msg.str(), keys));
    }
  }
  return out;
}

LedgerBuild build_ledger(std::span<const CountRecord> records) {
  std::vector<Violation> violations;
  std::vector<bool> keep(records.size(), true);

  // Record-level rules.
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto found = validate_record(records[i]);
    for (auto& v : found) {
      v.record_indices = {i};
      if (v.severity == Severity::error) keep[i] = false;
      violations.push_back(std::move(v));
    }
  }

  // Key uniqueness: first occurrence wins.
  std::map<RecordKey, std::size_t> first_seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!keep[i]) continue;
    auto key = key_of(records[i]);
    auto [it, inserted] = first_seen.emplace(key, i);
    if (!inserted) {
      keep[i] = false;
      violations.push_back(make_violation(
          Severity::warning, RuleId::duplicate_key,
          "duplicate key; keeping row " + std::to_string(it->second + 1) + " of the input",
          {to_string(key)}, {it->second, i}));
    }
  }

  // Group surviving records by branch.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_branch;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) by_branch[{records[i].tree_id, records[i].branch_id}].push_back(i);
  }

  for (auto& [branch, indices] : by_branch) {
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(records[a].date, records[a].object_type, a) <
             std::tie(records[b].date, records[b].object_type, b);
    });

    // Harvest placement: crop types only on the branch's final crop date and
    // nothing developmental after it.
    std::optional<Date> harvest;
    for (auto i : indices) {
      if (is_harvest(records[i].object_type) && (!harvest || records[i].date > *harvest))
        harvest = records[i].date;
    }
    if (harvest) {
      for (auto i : indices) {
        const auto& r = records[i];
        if (is_harvest(r.object_type) && r.date < *harvest) {
          keep[i] = false;
          violations.push_back(make_violation(
              Severity::error, RuleId::crop_not_final,
              "harvest object type before the branch's final harvest date " +
                  format_iso_date(*harvest),
              {to_string(key_of(r))}, {i}));
        } else if (is_developmental(r.object_type) && r.date > *harvest) {
          keep[i] = false;
          violations.push_back(make_violation(
              Severity::error, RuleId::after_harvest,
              "developmental count after harvest on " + format_iso_date(*harvest),
              {to_string(key_of(r))}, {i}));
        }
      }

      std::vector<CountRecord> group;
      std::vector<std::size_t> group_indices;
      for (auto i : indices) {
        if (keep[i] && is_harvest(records[i].object_type) && records[i].date == *harvest) {
          group.push_back(records[i]);
          group_indices.push_back(i);
        }
      }
      auto found = check_harvest_consistency(group);
      if (has_errors(found)) {
        for (auto i : group_indices) keep[i] = false;
      }
      for (auto& v : found) {
        v.record_indices = group_indices;
        violations.push_back(std::move(v));
      }
    }

    // Stage order: bud before blossom before cherry.
    int max_rank_before = -1;
    int max_rank_today = -1;
    std::optional<Date> today;
    for (auto i : indices) {
      const auto& r = records[i];
      if (!keep[i] || !is_developmental(r.object_type)) continue;
      if (!today || r.date != *today) {
        max_rank_before = std::max(max_rank_before, max_rank_today);
        max_rank_today = -1;
        today = r.date;
      }
      if (type_rank(r.object_type) < max_rank_before) {
        keep[i] = false;
        violations.push_back(make_violation(
            Severity::error, RuleId::stage_order,
            std::string(to_string(r.object_type)) + " observed after a later stage",
            {to_string(key_of(r))}, {i}));
        continue;
      }
      max_rank_today = std::max(max_rank_today, type_rank(r.object_type));
    }

    // Late-season plausibility: counts cannot grow once fruit has set.
    std::map<Date, std::pair<std::int64_t, int>> daily;  // sum, most advanced rank
    std::map<Date, std::vector<std::size_t>> daily_indices;
    for (auto i : indices) {
      const auto& r = records[i];
      if (!keep[i] || !is_developmental(r.object_type)) continue;
      if (harvest && r.date >= *harvest) continue;
      auto& [sum, rank] = daily[r.date];
      sum += r.object_count;
      rank = std::max(rank, type_rank(r.object_type));
      daily_indices[r.date].push_back(i);
    }
    bool in_fruit = false;
    std::optional<std::pair<Date, std::int64_t>> previous;
    for (const auto& [date, day] : daily) {
      if (day.second == type_rank(ObjectType::cherry)) in_fruit = true;
      if (!in_fruit) continue;
      if (previous && day.first > previous->second) {
        std::vector<std::string> keys;
        for (auto i : daily_indices[date]) keys.push_back(to_string(key_of(records[i])));
        violations.push_back(make_violation(
            Severity::warning, RuleId::possible_miscount,
            "count rose from " + std::to_string(previous->second) + " on " +
                format_iso_date(previous->first) + " to " + std::to_string(day.first) +
                " after fruit set",
            std::move(keys), daily_indices[date]));
      }
      previous = {date, day.first};
    }
  }

  std::vector<CountRecord> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) kept.push_back(records[i]);
  }
  std::sort(kept.begin(), kept.end(), [](const CountRecord& a, const CountRecord& b) {
    return std::tie(a.tree_id, a.branch_id, a.date, a.object_type) <
           std::tie(b.tree_id, b.branch_id, b.date, b.object_type);
  });
  return {SeasonLedger(std::move(kept)), std::move(violations)};
}

// ---------------------------------------------------------------------------
// Series

std::vector<TrajectoryPoint> trajectory(const SeasonLedger& ledger, std::string_view tree_id,
                                        std::string_view branch_id) {
  std::vector<TrajectoryPoint> out;
  bool found = false;
  const auto harvest = ledger.harvest_date(tree_id, branch_id);

  for (const auto& r : ledger.records()) {
    if (!same_branch(r, tree_id, branch_id)) continue;
    found = true;
    if (is_developmental(r.object_type)) {
      // The totalCrops point supersedes same-day developmental counts.
      if (harvest && r.date >= *harvest) continue;
      if (!out.empty() && out.back().date == r.date) {
        auto& point = out.back();
        point.count += r.object_count;
        if (type_rank(r.object_type) > type_rank(point.object_type)) {
          point.object_type = r.object_type;
          point.bbch = r.bbch;
        }
      } else {
        out.push_back({r.date, r.bbch, r.object_type, r.object_count});
      }
    } else if (r.object_type == ObjectType::total_crops && harvest && r.date == *harvest) {
      out.push_back({r.date, r.bbch, r.object_type, r.object_count});
    }
  }
  if (!found)
    throw Error(ErrorCode::not_found, "no records for tree " + std::string(tree_id) +
                                          " branch " + std::string(branch_id));
  return out;
}

std::vector<TreeSeries> aggregate_by_tree(const SeasonLedger& ledger) {
  std::vector<TreeSeries> out;
  std::map<std::string, std::map<Date, std::int64_t>> sums;
  std::vector<std::string> order;
  for (const auto& ref : ledger.branches()) {
    if (ref.branch_id == kWholeTree) continue;
    if (!sums.contains(ref.tree_id)) order.push_back(ref.tree_id);
    auto& tree = sums[ref.tree_id];
    for (const auto& p : trajectory(ledger, ref.tree_id, ref.branch_id)) tree[p.date] += p.count;
  }
  for (const auto& id : order) {
    TreeSeries series{id, {}};
    for (const auto& [date, count] : sums[id]) series.points.push_back({date, count});
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace cherry
