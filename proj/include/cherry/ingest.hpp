#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cherry/phenology.hpp"

namespace cherry {

// Input accepts '.' and ',' decimal separators and both MMM-D and ISO dates;
// output always uses '.' and ISO dates.
struct CsvDialect {
  char delimiter = ',';
};

struct ParseResult {
  std::vector<CountRecord> records;
  // Source line of each record (header is line 1).
  std::vector<std::size_t> rows;
  std::vector<Violation> violations;
};

// Throws Error(parse_error) for a missing or wrong header and Error(io_error)
// when the stream fails. Malformed rows become violations.
ParseResult parse_csv(std::string_view text, int season_year, const CsvDialect& dialect = {});
ParseResult parse_csv(std::istream& in, int season_year, const CsvDialect& dialect = {});

std::string emit_csv(const SeasonLedger& ledger, const CsvDialect& dialect = {});

// Header in canonical column order.
inline constexpr std::string_view kLedgerColumns[] = {
    "Date", "BBCH", "treeID", "branchID", "branchColor", "objectType", "objectCount", "cropWeight"};

namespace csv {

struct Field {
  std::string text;
  bool quoted = false;
};

struct Row {
  std::vector<Field> fields;
  std::size_t number = 0;  // 1-based line where the record starts
};

// RFC 4180 style splitting. Blank lines are skipped; a leading UTF-8 BOM is
// dropped; unquoted fields are trimmed of surrounding blanks.
std::vector<Row> split(std::string_view text, char delimiter);

// Quotes the field when it contains the delimiter, a quote or a line break.
std::string escape(std::string_view field, char delimiter);

// Decimal with '.' or ',' as separator and an optional exponent; rejects
// thousands separators and anything else.
std::optional<double> parse_decimal(std::string_view text);

// Shortest representation that reads back to the same double.
std::string format_exact(double value);

std::string read_all(std::istream& in);

}  // namespace csv

}  // namespace cherry
