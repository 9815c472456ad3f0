#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>

#include "cherry/cherry.h"
#include "oracles.hpp"

namespace {
const std::string kData = CHERRY_TEST_DATA;
}

TEST_CASE("status names and errors") {
  CHECK(std::string(cf_status_name(CF_OK)) == "ok");
  CHECK(std::string(cf_status_name(CF_NO_CALIBRATION)) == "no_calibration");
  double v = 0;
  CHECK(cf_incomplete_beta(2.0, 1, 1, &v) == CF_DOMAIN_ERROR);
  CHECK(std::strlen(cf_last_error()) > 0);
  CHECK(cf_incomplete_beta(0.3, 2, 3, &v) == CF_OK);
  CHECK(std::strlen(cf_last_error()) == 0);
  CHECK(std::abs(v - 0.3483) < 1e-12);
  CHECK(cf_p_value(1.0, 1, &v) == CF_OK);
  CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cf_incomplete_beta(0.5, 1, 1, nullptr) == CF_INVALID_ARGUMENT);
  CHECK(std::string(cf_p_value_band(0.02)) == "P<.05");
  CHECK(cf_p_value_band(0.0) == nullptr);
  CHECK(cf_object_type_parse("goodCrops") == CF_OBJECT_GOOD_CROPS);
  CHECK(cf_object_type_parse("leaf") == -1);
  CHECK(std::string(cf_object_type_name(CF_OBJECT_TOTAL_CROPS)) == "totalCrops");
}

TEST_CASE("ledger round trip through the C interface") {
  cf_ledger* ledger = nullptr;
  cf_violations* v = nullptr;
  const auto path = kData + "/table1.csv";
  REQUIRE(cf_ledger_read_file(path.c_str(), 2023, ',', &ledger, &v) == CF_OK);
  CHECK(cf_violations_count(v) == 0);
  CHECK(cf_ledger_size(ledger) == 10);
  CHECK(cf_ledger_season(ledger) == 2023);
  CHECK(cf_ledger_branch_count(ledger) == 1);

  cf_record r;
  REQUIRE(cf_ledger_record(ledger, 9, &r) == CF_OK);
  CHECK(r.object_type == CF_OBJECT_TOTAL_CROPS);
  CHECK(r.object_count == 54);
  CHECK(r.has_weight);
  CHECK(r.weight_kg == 0.47);
  CHECK(std::string(r.branch_color) == "pink");
  CHECK(cf_ledger_record(ledger, 10, &r) == CF_NOT_FOUND);

  double mfw = 0;
  REQUIRE(cf_ledger_mean_fruit_weight(ledger, &mfw) == CF_OK);
  CHECK(mfw == doctest::Approx(0.47 / 54));

  char* text = nullptr;
  REQUIRE(cf_ledger_emit_csv(ledger, ',', &text) == CF_OK);
  cf_ledger* again = nullptr;
  REQUIRE(cf_ledger_parse(text, std::strlen(text), 2023, ',', &again, nullptr) == CF_OK);
  char* text2 = nullptr;
  REQUIRE(cf_ledger_emit_csv(again, ',', &text2) == CF_OK);
  CHECK(std::string(text) == std::string(text2));
  cf_string_free(text);
  cf_string_free(text2);
  cf_ledger_free(again);
  cf_ledger_free(ledger);
  cf_violations_free(v);
}

TEST_CASE("violations carry source rows") {
  std::string text = oracle::slurp(kData + "/table1.csv");
  text.replace(text.find("totalCrops,54"), 13, "totalCrops,50");
  text += "Mar-2,51,satin_2,2s1,pink,bud,175,\n";
  cf_ledger* ledger = nullptr;
  cf_violations* v = nullptr;
  REQUIRE(cf_ledger_parse(text.data(), text.size(), 2023, ',', &ledger, &v) == CF_OK);
  CHECK(cf_violations_error_count(v) == 1);
  REQUIRE(cf_violations_count(v) == 2);
  bool saw_dup = false, saw_mismatch = false;
  for (size_t i = 0; i < 2; ++i) {
    cf_violation x;
    REQUIRE(cf_violation_get(v, i, &x) == CF_OK);
    if (std::string(x.rule) == "duplicate_key") {
      saw_dup = true;
      CHECK(std::string(x.rows) == "2,12");
      CHECK(x.severity == CF_SEVERITY_WARNING);
    }
    if (std::string(x.rule) == "count_mismatch") {
      saw_mismatch = true;
      CHECK(x.row == 9);
    }
  }
  CHECK(saw_dup);
  CHECK(saw_mismatch);
  cf_ledger_free(ledger);
  cf_violations_free(v);

  const char* headless = "Mar-2,51,a,b,,bud,1,\n";
  CHECK(cf_ledger_parse(headless, std::strlen(headless), 2023, ',', &ledger, &v) == CF_PARSE_ERROR);
  CHECK(cf_ledger_read_file("/nonexistent/x.csv", 2023, ',', &ledger, &v) == CF_IO_ERROR);
}

TEST_CASE("forecasts through the C interface") {
  cf_calibration* cal = nullptr;
  const auto path = kData + "/table2_calibration.csv";
  REQUIRE(cf_calibration_read_file(path.c_str(), 0, &cal) == CF_OK);
  CHECK(cf_calibration_count(cal) == 7);
  CHECK(cf_calibration_season(cal) == 2023);

  cf_calibration_entry e;
  REQUIRE(cf_calibration_entry_get(cal, 1, &e) == CF_OK);
  CHECK(e.bbch == 56);
  CHECK(e.intercept == 2.03);
  CHECK(std::string(e.p_band) == "P<.001");
  CHECK_FALSE(e.has_interval_stats);

  cf_forecast* f = nullptr;
  REQUIRE(cf_forecast_branch(cal, "Jul-6", 52, nullptr, &f) == CF_OK);
  cf_forecast_result res;
  cf_forecast_get(f, &res);
  CHECK(std::abs(res.point - 53.97) < 0.01);
  CHECK(res.month == 7);
  CHECK(cf_forecast_annotation_count(f) == 1);
  cf_forecast_free(f);

  CHECK(cf_forecast_branch(cal, "Aug-1", 52, nullptr, &f) == CF_NO_CALIBRATION);
  CHECK(std::string(cf_last_error()).find("Apr-14") != std::string::npos);

  const double counts[] = {40, 50};
  REQUIRE(cf_forecast_tree(cal, "2023-07-06", counts, 2, CF_TREE_WHOLE, nullptr, &f) == CF_OK);
  cf_forecast_get(f, &res);
  CHECK(res.point == doctest::Approx(1.11 * 90 - 2 * 3.75));
  CHECK(res.scope == CF_SCOPE_TREE);
  cf_forecast_free(f);

  cf_recommendation* rank = nullptr;
  REQUIRE(cf_recommend(cal, nullptr, &rank) == CF_OK);
  CHECK(cf_recommendation_count(rank) == 7);
  long early = -2, robust = -2;
  cf_recommendation_pair(rank, &early, &robust);
  cf_recommendation_item item;
  REQUIRE(cf_recommendation_get(rank, size_t(early), &item) == CF_OK);
  CHECK(item.bbch == 56);
  REQUIRE(cf_recommendation_get(rank, size_t(robust), &item) == CF_OK);
  CHECK(item.bbch == 75);
  cf_recommendation_free(rank);
  cf_calibration_free(cal);
}

TEST_CASE("simulate, calibrate and plot through the C interface") {
  cf_sim_params* p = cf_sim_params_default();
  REQUIRE(cf_sim_params_set(p, "count_scale", "1000") == CF_OK);
  REQUIRE(cf_sim_params_set(p, "flower_bud_fraction", "0.6") == CF_OK);
  REQUIRE(cf_sim_params_set(p, "blossoms_per_cluster", "2.5") == CF_OK);
  REQUIRE(cf_sim_params_set(p, "fruit_set_fraction", "0.4") == CF_OK);
  REQUIRE(cf_sim_params_set(p, "drop_fractions", "0.5, 0.2") == CF_OK);
  REQUIRE(cf_sim_params_set(p, "attrition_rate", "0") == CF_OK);
  CHECK(cf_sim_params_set(p, "good_fraction", "7") == CF_INVALID_ARGUMENT);
  CHECK(std::string(cf_last_error()).find("good_fraction") != std::string::npos);
  CHECK(cf_sim_params_set(p, "seed", "1\nbogus=2") == CF_INVALID_ARGUMENT);

  cf_ledger* ledger = nullptr;
  REQUIRE(cf_simulate_season(p, 3, 6, &ledger) == CF_OK);
  CHECK(cf_ledger_branch_count(ledger) == 18);

  cf_calibration* cal = nullptr;
  REQUIRE(cf_calibrate(ledger, CF_OBJECT_TOTAL_CROPS, &cal) == CF_OK);
  REQUIRE(cf_calibration_count(cal) == 7);
  for (size_t i = 0; i < 7; ++i) {
    cf_calibration_entry e;
    cf_calibration_entry_get(cal, i, &e);
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", e.year, e.month, e.day);
    double slope = 0;
    REQUIRE(cf_sim_expected_slope(p, date, &slope) == CF_OK);
    CHECK(std::abs(e.slope - slope) < 1e-9);
  }
  CHECK(cf_calibrate(ledger, CF_OBJECT_BUD, &cal) == CF_INVALID_ARGUMENT);

  cf_plot_spec spec = cf_plot_spec_default();
  char* svg = nullptr;
  REQUIRE(cf_render_svg(&spec, ledger, nullptr, &svg) == CF_OK);
  auto root = oracle::XmlReader(svg).parse();
  CHECK(oracle::find_all(root, "polyline").size() == 18);
  cf_string_free(svg);
  spec.kind = CF_PLOT_REGRESSION_GRID;
  REQUIRE(cf_render_svg(&spec, ledger, cal, &svg) == CF_OK);
  root = oracle::XmlReader(svg).parse();
  CHECK(oracle::find_all(root, "g", "panel").size() == 7);
  cf_string_free(svg);
  spec.kind = 9;
  CHECK(cf_render_svg(&spec, ledger, cal, &svg) == CF_INVALID_ARGUMENT);

  cf_calibration_free(cal);
  cf_ledger_free(ledger);
  cf_sim_params_free(p);
}

TEST_CASE("ols through the C interface") {
  const double x[] = {1, 2, 3, 4, 5};
  const double y[] = {2.1, 3.9, 6.2, 7.8, 10.1};
  cf_fit fit;
  REQUIRE(cf_fit_ols(x, y, 5, &fit) == CF_OK);
  CHECK(fit.slope == doctest::Approx(1.99));
  CHECK(fit.has_p_value);
  double point, lo, hi;
  REQUIRE(cf_predict_interval(&fit, 3, 0.95, &point, &lo, &hi) == CF_OK);
  CHECK(lo < point);
  CHECK(point < hi);
  CHECK(cf_fit_ols(x, y, 2, &fit) == CF_INSUFFICIENT_DATA);
  const double flat[] = {1, 1, 1};
  CHECK(cf_fit_ols(flat, y, 3, &fit) == CF_DEGENERATE_PREDICTOR);
  double t = 0;
  REQUIRE(cf_t_critical(0.95, 12, &t) == CF_OK);
  CHECK(t == doctest::Approx(2.178813).epsilon(1e-6));
}
