#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "cherry/error.hpp"
#include "cherry/ingest.hpp"
#include "oracles.hpp"

using namespace cherry;

namespace {

const std::string kData = CHERRY_TEST_DATA;

bool has_rule(const std::vector<Violation>& v, RuleId rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST_CASE("csv splitting") {
  auto rows = csv::split("\xEF\xBB\xBF" "a, b ,\"c,d\"\n\n\"x\"\"y\",\"multi\nline\",z\n", ',');
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields.size() == 3);
  CHECK(rows[0].fields[0].text == "a");
  CHECK(rows[0].fields[1].text == "b");
  CHECK(rows[0].fields[2].text == "c,d");
  CHECK(rows[0].fields[2].quoted);
  CHECK(rows[1].number == 3);
  CHECK(rows[1].fields[0].text == "x\"y");
  CHECK(rows[1].fields[1].text == "multi\nline");
  CHECK(csv::escape("a,b", ',') == "\"a,b\"");
  CHECK(csv::escape("plain", ',') == "plain");
}

TEST_CASE("decimal parsing") {
  CHECK(csv::parse_decimal("0,29") == 0.29);
  CHECK(csv::parse_decimal("0.29") == 0.29);
  CHECK(csv::parse_decimal("-11.52") == -11.52);
  CHECK_FALSE(csv::parse_decimal("1.000,5"));
  CHECK_FALSE(csv::parse_decimal("abc"));
  CHECK_FALSE(csv::parse_decimal(""));
  CHECK(csv::parse_decimal("1.5e-3") == 1.5e-3);
  for (double v : {0.1, 1.0 / 3.0, 0.47, 1e-12, 123456.789})
    CHECK(csv::parse_decimal(csv::format_exact(v)) == v);
}

TEST_CASE("table 1 fixture parses with decimal commas") {
  for (const char* name : {"/table1.csv", "/table1_unquoted.csv"}) {
    CAPTURE(name);
    auto parsed = parse_csv(oracle::slurp(kData + name), 2023);
    CHECK(parsed.violations.empty());
    REQUIRE(parsed.records.size() == 10);
    CHECK(parsed.rows.front() == 2);
    CHECK(parsed.records[7].crop_weight == 0.29);
    CHECK(parsed.records[9].object_count == 54);
    CHECK(parsed.records[0].branch_color == "pink");
  }
}

TEST_CASE("header problems are fatal") {
  CHECK_THROWS_AS(parse_csv("", 2023), Error);
  CHECK_THROWS_AS(parse_csv("Mar-2,51,t,b,,bud,1,\n", 2023), Error);
  CHECK_THROWS_AS(parse_csv("Date,BBCH,treeID,branchID,branchColor,objectType,objectCount\n", 2023),
                  Error);
  std::istringstream in("BBCH,Date,objectCount,treeID,branchID,objectType,cropWeight,branchColor\n"
                        "51,2023-03-02,10,t,b,bud,,\n");
  auto parsed = parse_csv(in, 2023);
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.records[0].object_count == 10);
}

TEST_CASE("malformed rows become violations with line numbers") {
  const std::string text =
      "Date,BBCH,treeID,branchID,branchColor,objectType,objectCount,cropWeight\n"
      "Mar-2,51,t,b,,bud,10,\n"
      "Mar-2,151,t,b,,bud,10,\n"
      "Xyz-2,51,t,b,,bud,10,\n"
      "Mar-2,51,t,b,,leaf,10,\n"
      "Mar-2,51,t,b,,bud,ten,\n"
      "Mar-2,51,t,b\n";
  auto parsed = parse_csv(text, 2023);
  CHECK(parsed.records.size() == 1);
  CHECK(has_rule(parsed.violations, RuleId::bbch_out_of_range));
  CHECK(has_rule(parsed.violations, RuleId::bad_date));
  CHECK(has_rule(parsed.violations, RuleId::unknown_object_type));
  CHECK(has_rule(parsed.violations, RuleId::bad_number));
  CHECK(has_rule(parsed.violations, RuleId::column_count));
  std::vector<std::size_t> lines;
  for (const auto& v : parsed.violations) lines.push_back(*v.row);
  CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 7});
}

TEST_CASE("emit then parse reproduces the ledger") {
  auto parsed = parse_csv(oracle::slurp(kData + "/table1.csv"), 2023);
  auto ledger = build_ledger(parsed.records).ledger;
  const auto text = emit_csv(ledger);
  CHECK(text.rfind("Date,BBCH,treeID,branchID,branchColor,objectType,objectCount,cropWeight\n", 0) == 0);
  CHECK(text.find("2023-07-14,89,satin_2,2s1,pink,goodCrops,31,0.29\n") != std::string::npos);
  auto again = parse_csv(text, 2023);
  CHECK(again.violations.empty());
  CHECK(build_ledger(again.records).ledger == ledger);
  CHECK(emit_csv(build_ledger(again.records).ledger) == text);
}

TEST_CASE("semicolon dialect") {
  CsvDialect dialect{';'};
  auto parsed = parse_csv(oracle::slurp(kData + "/table1.csv"), 2023);
  auto ledger = build_ledger(parsed.records).ledger;
  const auto text = emit_csv(ledger, dialect);
  CHECK(text.find(';') != std::string::npos);
  CHECK(build_ledger(parse_csv(text, 2023, dialect).records).ledger == ledger);
}
