#include "cherry/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <sstream>

#include "cherry/error.hpp"

namespace cherry {

namespace csv {

std::vector<Row> split(std::string_view text, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  Field field;
  bool in_quotes = false;
  bool field_started = false;  // any character or quote seen in this field
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto finish_field = [&] {
    if (!field.quoted) {
      auto& s = field.text;
      auto first = s.find_first_not_of(" \t");
      auto last = s.find_last_not_of(" \t");
      s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
    }
    row.fields.push_back(std::move(field));
    field = Field{};
    field_started = false;
  };
  auto finish_row = [&] {
    const bool blank = row.fields.size() == 1 && row.fields[0].text.empty() &&
                       !row.fields[0].quoted;
    if (!blank) {
      row.number = row_line;
      rows.push_back(std::move(row));
    }
    row = Row{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.text.push_back(c);
      }
      continue;
    }
    if (c == '"' && (!field_started || field.text.find_first_not_of(" \t") == std::string::npos)) {
      field.text.clear();
      field.quoted = true;
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      finish_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      finish_field();
      finish_row();
      row_line = ++line;
    } else {
      field.text.push_back(c);
      field_started = true;
    }
  }
  if (field_started || !row.fields.empty()) {
    finish_field();
    finish_row();
  }
  return rows;
}

std::string escape(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::optional<double> parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string normalized(text);
  if (std::count(normalized.begin(), normalized.end(), ',') +
          std::count(normalized.begin(), normalized.end(), '.') > 1)
    return std::nullopt;
  std::replace(normalized.begin(), normalized.end(), ',', '.');
  for (char c : normalized) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' ||
          c == 'e' || c == 'E'))
      return std::nullopt;
  }
  const char* begin = normalized.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, normalized.data() + normalized.size(), value);
  if (ec != std::errc{} || ptr != normalized.data() + normalized.size()) return std::nullopt;
  return value;
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io_error, "failed to read input stream");
  return ss.str();
}

}  // namespace csv

namespace {

enum Column { kDate, kBbch, kTree, kBranch, kColor, kType, kCount, kWeight, kColumnCount };

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

bool all_digits(const csv::Field& f) {
  return !f.quoted && !f.text.empty() &&
         std::all_of(f.text.begin(), f.text.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::optional<std::int64_t> parse_integer(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

Violation row_violation(RuleId rule, std::size_t row, std::string message) {
  Violation v;
  v.severity = Severity::error;
  v.rule = rule;
  v.message = std::move(message);
  v.row = row;
  v.offending_keys = {"row " + std::to_string(row)};
  return v;
}

}  // namespace

ParseResult parse_csv(std::string_view text, int season_year, const CsvDialect& dialect) {
  auto rows = csv::split(text, dialect.delimiter);
  if (rows.empty()) throw Error(ErrorCode::parse_error, "missing header row");

  // Header: every ledger column exactly once, any order, case-insensitive.
  std::array<std::size_t, kColumnCount> position{};
  position.fill(SIZE_MAX);
  const auto& header = rows.front();
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    auto name = lower(header.fields[i].text);
    // Published tables label the column "Date 2023 season".
    if (name.rfind("date ", 0) == 0) name = "date";
    auto it = std::find_if(std::begin(kLedgerColumns), std::end(kLedgerColumns),
                           [&](std::string_view c) { return lower(c) == name; });
    if (it == std::end(kLedgerColumns))
      throw Error(ErrorCode::parse_error, "unknown header column '" + header.fields[i].text + "'");
    auto& slot = position[std::size_t(it - std::begin(kLedgerColumns))];
    if (slot != SIZE_MAX)
      throw Error(ErrorCode::parse_error, "duplicate header column '" + header.fields[i].text + "'");
    slot = i;
  }
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    if (position[c] == SIZE_MAX)
      throw Error(ErrorCode::parse_error,
                  "missing header column '" + std::string(kLedgerColumns[c]) + "'");
  }

  ParseResult result;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto fields = rows[r].fields;
    const std::size_t row = rows[r].number;

    // Repair an unquoted decimal-comma weight split into two digit tokens.
    const std::size_t w = position[kWeight];
    if (fields.size() == kColumnCount + 1 && w + 1 < fields.size() && all_digits(fields[w]) &&
        all_digits(fields[w + 1])) {
      fields[w].text += "," + fields[w + 1].text;
      fields.erase(fields.begin() + std::ptrdiff_t(w + 1));
    }
    if (fields.size() != kColumnCount) {
      result.violations.push_back(row_violation(
          RuleId::column_count, row,
          "expected " + std::to_string(kColumnCount) + " fields, found " +
              std::to_string(fields.size())));
      continue;
    }
    auto cell = [&](Column c) -> const std::string& { return fields[position[c]].text; };

    CountRecord rec;
    rec.season = season_year;

    auto date = parse_date(cell(kDate), season_year);
    if (!date) {
      result.violations.push_back(
          row_violation(RuleId::bad_date, row, "unreadable date '" + cell(kDate) + "'"));
      continue;
    }
    rec.date = *date;

    auto bbch = parse_integer(cell(kBbch));
    if (!bbch) {
      result.violations.push_back(
          row_violation(RuleId::bad_number, row, "unreadable BBCH code '" + cell(kBbch) + "'"));
      continue;
    }
    auto stage = BbchStage::try_make(int(std::clamp<std::int64_t>(*bbch, -1, 100)));
    if (!stage) {
      result.violations.push_back(row_violation(
          RuleId::bbch_out_of_range, row, "BBCH code " + cell(kBbch) + " outside [0, 99]"));
      continue;
    }
    rec.bbch = *stage;

    rec.tree_id = cell(kTree);
    rec.branch_id = cell(kBranch);
    if (!cell(kColor).empty()) rec.branch_color = cell(kColor);

    auto type = parse_object_type(cell(kType));
    if (!type) {
      result.violations.push_back(row_violation(
          RuleId::unknown_object_type, row, "unknown object type '" + cell(kType) + "'"));
      continue;
    }
    rec.object_type = *type;

    auto count = parse_integer(cell(kCount));
    if (!count) {
      result.violations.push_back(
          row_violation(RuleId::bad_number, row, "unreadable count '" + cell(kCount) + "'"));
      continue;
    }
    rec.object_count = *count;

    if (!cell(kWeight).empty()) {
      auto weight = csv::parse_decimal(cell(kWeight));
      if (!weight) {
        result.violations.push_back(
            row_violation(RuleId::bad_number, row, "unreadable weight '" + cell(kWeight) + "'"));
        continue;
      }
      rec.crop_weight = *weight;
    }

    result.records.push_back(std::move(rec));
    result.rows.push_back(row);
  }
  return result;
}

ParseResult parse_csv(std::istream& in, int season_year, const CsvDialect& dialect) {
  return parse_csv(csv::read_all(in), season_year, dialect);
}

std::string emit_csv(const SeasonLedger& ledger, const CsvDialect& dialect) {
  const char d = dialect.delimiter;
  std::string out;
  for (std::size_t c = 0; c < std::size(kLedgerColumns); ++c) {
    if (c) out.push_back(d);
    out += kLedgerColumns[c];
  }
  out.push_back('\n');

  for (const auto& r : ledger.records()) {
    out += format_iso_date(r.date);
    out.push_back(d);
    out += std::to_string(r.bbch.code());
    out.push_back(d);
    out += csv::escape(r.tree_id, d);
    out.push_back(d);
    out += csv::escape(r.branch_id, d);
    out.push_back(d);
    if (r.branch_color) out += csv::escape(*r.branch_color, d);
    out.push_back(d);
    out += to_string(r.object_type);
    out.push_back(d);
    out += std::to_string(r.object_count);
    out.push_back(d);
    if (r.crop_weight) out += csv::escape(csv::format_exact(*r.crop_weight), d);
    out.push_back('\n');
  }
  return out;
}

}  // namespace cherry
