#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cherry {

using Date = std::chrono::year_month_day;

std::string format_iso_date(Date date);
std::optional<Date> parse_iso_date(std::string_view text);
// "Mar-2" / "Jun-06" style; the year is not part of the text.
std::optional<Date> parse_month_day(std::string_view text, int season_year);
std::string format_month_day(Date date);
// Accepts either of the two forms above.
std::optional<Date> parse_date(std::string_view text, int season_year);
int days_between(Date from, Date to);

class BbchStage {
 public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 99;

  constexpr BbchStage() = default;
  // Throws Error(invalid_argument) outside [0, 99].
  explicit BbchStage(int code);

  static std::optional<BbchStage> try_make(int code) noexcept;

  constexpr int code() const noexcept { return code_; }

  friend constexpr auto operator<=>(BbchStage, BbchStage) = default;

 private:
  std::uint8_t code_ = 0;
};

// Short development-stage description for the codes used in cherry
// phenology tables; other codes render as "BBCH nn".
std::string bbch_label(BbchStage stage);

enum class ObjectType : std::uint8_t {
  bud,
  blossom,
  cherry,
  good_crops,
  bad_crops,
  total_crops,
};

std::string_view to_string(ObjectType type) noexcept;
// Case-insensitive; accepts the ledger spellings (bud, goodCrops, ...).
std::optional<ObjectType> parse_object_type(std::string_view text);

constexpr bool is_developmental(ObjectType t) noexcept {
  return t == ObjectType::bud || t == ObjectType::blossom || t == ObjectType::cherry;
}
constexpr bool is_harvest(ObjectType t) noexcept { return !is_developmental(t); }

inline constexpr std::string_view kWholeTree = "WHOLE_TREE";

struct CountRecord {
  Date date{};
  int season = 0;
  BbchStage bbch{};
  std::string tree_id;
  std::string branch_id;
  std::optional<std::string> branch_color;
  ObjectType object_type = ObjectType::bud;
  std::int64_t object_count = 0;
  std::optional<double> crop_weight;  // kilograms

  bool is_whole_tree() const noexcept { return branch_id == kWholeTree; }

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

struct RecordKey {
  Date date{};
  std::string tree_id;
  std::string branch_id;
  ObjectType object_type = ObjectType::bud;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

RecordKey key_of(const CountRecord& record);
std::string to_string(const RecordKey& key);

enum class Severity { error, warning };

// Closed set of rule identifiers reported by validation and ingestion.
enum class RuleId {
  negative_count,
  negative_weight,
  invalid_weight,
  weight_on_non_harvest,
  season_mismatch,
  empty_identifier,
  whole_tree_developmental,
  count_mismatch,
  weight_mismatch,
  missing_total,
  mixed_harvest_group,
  crop_not_final,
  after_harvest,
  stage_order,
  duplicate_key,
  possible_miscount,
  column_count,
  unknown_object_type,
  bbch_out_of_range,
  bad_date,
  bad_number,
};

std::string_view to_string(Severity severity) noexcept;
std::string_view to_string(RuleId rule) noexcept;

struct Violation {
  Severity severity = Severity::error;
  RuleId rule = RuleId::negative_count;
  std::string message;
  std::vector<std::string> offending_keys;
  // Positions in the list handed to build_ledger.
  std::vector<std::size_t> record_indices;
  // 1-based source row when the record came from CSV (header is row 1).
  std::optional<std::size_t> row;

  std::string_view rule_id() const noexcept { return to_string(rule); }
};

bool has_errors(std::span<const Violation> violations) noexcept;

class SeasonLedger;

struct LedgerBuild;

LedgerBuild build_ledger(std::span<const CountRecord> records);

// Validated, deduplicated records sorted by (tree, branch, date, object type).
// Only build_ledger can produce a non-empty ledger.
class SeasonLedger {
 public:
  SeasonLedger() = default;

  std::span<const CountRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::optional<int> season() const noexcept;

  struct BranchRef {
    std::string tree_id;
    std::string branch_id;
    friend auto operator<=>(const BranchRef&, const BranchRef&) = default;
  };
  // Every (tree, branch) pair, WHOLE_TREE included, in ledger order.
  std::vector<BranchRef> branches() const;
  std::vector<std::string> tree_ids() const;

  // Latest date carrying crop object types for the branch, if any.
  std::optional<Date> harvest_date(std::string_view tree_id,
                                   std::string_view branch_id) const;

  friend bool operator==(const SeasonLedger&, const SeasonLedger&) = default;

 private:
  friend LedgerBuild build_ledger(std::span<const CountRecord> records);
  explicit SeasonLedger(std::vector<CountRecord> sorted) : records_(std::move(sorted)) {}

  std::vector<CountRecord> records_;
};

struct LedgerBuild {
  SeasonLedger ledger;
  std::vector<Violation> violations;
};

std::vector<Violation> validate_record(const CountRecord& record);

// Group must share (date, tree_id, branch_id); only crop records are examined.
std::vector<Violation> check_harvest_consistency(std::span<const CountRecord> group);

struct TrajectoryPoint {
  Date date{};
  BbchStage bbch{};
  ObjectType object_type = ObjectType::bud;
  std::int64_t count = 0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

// Developmental counts per observation day plus the totalCrops harvest point.
// Several developmental types on one day are summed and reported under the
// most advanced type. Throws Error(not_found) for an unknown branch.
std::vector<TrajectoryPoint> trajectory(const SeasonLedger& ledger,
                                        std::string_view tree_id,
                                        std::string_view branch_id);

struct AggregatePoint {
  Date date{};
  std::int64_t count = 0;

  friend bool operator==(const AggregatePoint&, const AggregatePoint&) = default;
};

struct TreeSeries {
  std::string tree_id;
  std::vector<AggregatePoint> points;
};

// Sums branch trajectories per tree and date. WHOLE_TREE records are not
// branches and are left out.
std::vector<TreeSeries> aggregate_by_tree(const SeasonLedger& ledger);

}  // namespace cherry
