#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"
#include "oracles.hpp"

namespace {

const std::string kData = CHERRY_TEST_DATA;
const std::string kCli = CHERRY_CLI;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "cherryfc_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("validate") {
  auto ok = run("validate " + kData + "/table1.csv --season 2023");
  CHECK(ok.code == 0);
  CHECK(ok.out.empty());

  std::string text = oracle::slurp(kData + "/table1.csv");
  text.replace(text.find("totalCrops,54"), 13, "totalCrops,50");
  const auto bad = scratch() / "mismatch.csv";
  write(bad, text);
  auto r = run("validate " + bad.string() + " --season 2023");
  CHECK(r.code == 1);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
  CHECK(r.out.find("count_mismatch") != std::string::npos);

  r = run("validate " + bad.string() + " --season 2023 --format=csv");
  CHECK(r.code == 1);
  CHECK(r.out.rfind("severity,rule,row", 0) == 0);

  r = run("validate " + bad.string() + " --season 2023 --format=json");
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["errors"] == 1);
  CHECK(doc["violations"][0]["row"] == 9);

  const auto headless = scratch() / "headless.csv";
  write(headless, text.substr(text.find('\n') + 1));
  CHECK(run("validate " + headless.string() + " --season 2023").code == 2);
  CHECK(run("validate /nonexistent/file.csv --season 2023").code == 2);
  CHECK(run("validate").code == 2);
}

TEST_CASE("fit and predict") {
  auto r = run("fit " + kData + "/table1.csv --season 2023");
  CHECK(r.code == 1);  // one branch: no stage has three pairs

  const auto sim = scratch() / "sim.csv";
  auto s = run("simulate --set count_scale=1000 --set attrition_rate=0");
  REQUIRE(s.code == 0);
  write(sim, s.out);
  r = run("fit " + sim.string() + " --season 2023");
  REQUIRE(r.code == 0);
  CHECK(r.out.find(",1.000000,") != std::string::npos);
  const auto cal = scratch() / "cal.csv";
  write(cal, r.out);

  auto p = run("predict " + cal.string() + " --stage Jul-6 --count 52 --format=json");
  REQUIRE(p.code == 0);
  auto doc = nlohmann::json::parse(p.out);
  CHECK(doc["scope"] == "branch");

  p = run("predict " + kData + "/table2_calibration.csv --stage Jul-6 --count 52 --format=json");
  doc = nlohmann::json::parse(p.out);
  CHECK(std::abs(doc["point"].get<double>() - 53.97) < 0.01);
  p = run("predict " + kData + "/table2_calibration.csv --stage Apr-14 --count 0 --format=csv");
  CHECK(p.out.find("2023-04-14,56,branch,2.030000") != std::string::npos);
  p = run("predict " + kData + "/table2_calibration.csv --stage Aug-1 --count 3");
  CHECK(p.code == 1);
  p = run("predict " + kData + "/table2_calibration.csv --stage Jul-6 --count 3 --count 4");
  CHECK(p.code == 2);
  p = run("predict " + kData + "/table2_calibration.csv --stage Jul-6 --count 3 --count 4 --tree-mode=whole");
  CHECK(p.code == 0);
  CHECK(p.out.find("tree") != std::string::npos);
}

TEST_CASE("simulate") {
  auto a = run("simulate --seed 7 --set noise_sd=2");
  auto b = run("simulate --seed 7 --set noise_sd=2");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != run("simulate --seed 8 --set noise_sd=2").out);

  auto j = nlohmann::json::parse(run("simulate --trees=3 --branches=6 --format=json").out);
  std::set<std::string> ids;
  for (const auto& r : j) ids.insert(r["treeID"].get<std::string>() + "/" + r["branchID"].get<std::string>());
  CHECK(ids.size() == 18);

  const auto params = scratch() / "frost.txt";
  write(params, "frost_bbch = 60\nfrost_kill_fraction = 1\n");
  auto f = run("simulate " + params.string() + " --format=json");
  REQUIRE(f.code == 0);
  for (const auto& r : nlohmann::json::parse(f.out)) {
    if (r["objectType"] == "totalCrops") CHECK(r["objectCount"] == 0);
  }

  write(params, "fruit_set_fraction = 1.4\n");
  CHECK(run("simulate " + params.string()).code == 2);
}

TEST_CASE("plot") {
  const auto out = scratch() / "table1.svg";
  auto r = run("plot --kind trajectory --ledger " + kData + "/table1.csv --season 2023 -o " +
               out.string());
  REQUIRE(r.code == 0);
  auto root = oracle::XmlReader(oracle::slurp(out.string())).parse();
  auto lines = oracle::find_all(root, "polyline");
  REQUIRE(lines.size() == 1);
  const auto pts = lines[0]->attr("points");
  CHECK(std::count(pts.begin(), pts.end(), ',') == 8);

  const auto empty = scratch() / "empty.csv";
  write(empty, "Date,BBCH,treeID,branchID,branchColor,objectType,objectCount,cropWeight\n");
  CHECK(run("plot --ledger " + empty.string() + " --season 2023 -o " + out.string()).code == 1);
  CHECK(run("plot --kind pie --ledger " + empty.string() + " -o " + out.string()).code == 2);

  const auto grid = scratch() / "grid.svg";
  r = run("plot --kind regression_grid --calibration " + kData + "/table2_calibration.csv -o " +
          grid.string() + " --format=json");
  REQUIRE(r.code == 0);
  root = oracle::XmlReader(oracle::slurp(grid.string())).parse();
  CHECK(oracle::find_all(root, "g", "panel").size() == 7);
}

TEST_CASE("recommend") {
  auto r = run("recommend " + kData + "/table2_calibration.csv --format=json");
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["ranking"][0]["date"] == "2023-07-06");
  CHECK(doc["ranking"][doc["early"].get<int>()]["bbch"] == 56);
}
