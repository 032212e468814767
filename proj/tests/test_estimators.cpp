#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "operc/estimators.hpp"
#include "operc/report.hpp"

using operc::ExperimentResult;

namespace {

// rows of a given experiment label, in emission order
std::vector<operc::Row> rows_of(const ExperimentResult& r, const std::string& label) {
  std::vector<operc::Row> out;
  for (const auto& row : r.rows)
    if (row.experiment == label) out.push_back(row);
  return out;
}

std::string render(const ExperimentResult& r) {
  return operc::csv_string(r.rows) + r.summary.dump(2);
}

}  // namespace

TEST_CASE("certain survival and certain death are reported exactly") {
  operc::ThetaOpts o;
  o.trials = 400;
  o.eps = 0.0;
  o.n_trunc = 32;
  auto res = operc::estimate_theta(o);
  auto main_rows = rows_of(res, "theta");
  REQUIRE(main_rows.size() == 1);
  CHECK(main_rows[0].estimate == 1.0);
  CHECK(main_rows[0].ci_hi == 1.0);
  CHECK(main_rows[0].trials == 400);

  o.eps = 1.0;
  auto dead = operc::estimate_theta(o);
  CHECK(rows_of(dead, "theta")[0].estimate == 0.0);
}

TEST_CASE("survival curves are non-increasing along the level grid") {
  operc::SurvivalOpts o;
  o.trials = 3000;
  o.eps = 0.35;
  o.horizon = 32;
  auto res = operc::estimate_survival_curve(o);
  auto rows = rows_of(res, "survival");
  REQUIRE(rows.size() >= 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].x > rows[i - 1].x);
    CHECK(rows[i].estimate <= rows[i - 1].estimate);  // same trials, nested events
  }
}

TEST_CASE("failure probability is pathwise non-increasing in the initial radius") {
  operc::Eq2Opts o;
  o.trials = 4000;
  o.eps = 0.25;
  o.k_list = {0, 1, 2, 3};
  o.n_trunc = 64;
  o.min_failures_for_fit = 5;
  auto res = operc::experiment_eq2(o);
  auto rows = rows_of(res, "eq2");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].estimate <= rows[i - 1].estimate);  // exact, not just statistical
  }
  CHECK(res.summary.contains("tail_fit_in_k"));
}

TEST_CASE("hit probability is pathwise non-decreasing as eps shrinks") {
  operc::Corollary2Opts o;
  o.trials = 2000;
  o.eps_list = {0.5, 0.3, 0.1};
  o.k = 1;
  o.n_eval = 16;
  auto res = operc::corollary2_sweep(o);
  auto rows = rows_of(res, "corollary2");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].x < rows[i - 1].x);
    CHECK(rows[i].estimate >= rows[i - 1].estimate);  // exact under the shared field
  }
}

TEST_CASE("experiment outputs do not depend on the worker count") {
  operc::Eq2Opts o;
  o.trials = 1500;
  o.eps = 0.3;
  o.k_list = {0, 1, 2};
  o.n_trunc = 32;
  o.workers = 1;
  auto a = operc::experiment_eq2(o);
  o.workers = 3;
  auto b = operc::experiment_eq2(o);
  CHECK(render(a) == render(b));

  operc::Prop3Opts p;
  p.trials = 400;
  p.eps = 0.05;
  p.n_list = {8, 16};
  p.m_list = {4};
  p.n_fix = 8;
  p.workers = 1;
  auto pa = operc::experiment_prop3(p);
  p.workers = 4;
  auto pb = operc::experiment_prop3(p);
  CHECK(render(pa) == render(pb));
}

TEST_CASE("changing the seed changes the sample") {
  operc::ThetaOpts o;
  o.trials = 2000;
  o.eps = 0.45;
  o.n_trunc = 16;
  o.seed = 1;
  auto a = operc::estimate_theta(o);
  o.seed = 2;
  auto b = operc::estimate_theta(o);
  CHECK(rows_of(a, "theta")[0].estimate != rows_of(b, "theta")[0].estimate);
}

TEST_CASE("conditional density rows condition on survival") {
  operc::Prop3Opts o;
  o.trials = 600;
  o.eps = 0.1;
  o.beta = 0.5;
  o.rho = 0.5;
  o.n_list = {4, 8};
  o.m_list = {2};
  o.n_fix = 4;
  auto res = operc::experiment_prop3(o);
  auto rows = rows_of(res, "prop3_n");
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    // trials column holds the surviving count; censored holds the dead count
    CHECK(r.trials + r.censored_count == 600);
    CHECK(r.trials > 0);
    CHECK(r.estimate >= 0.0);
    CHECK(r.estimate <= 1.0);
  }
  CHECK(rows_of(res, "prop3_size").size() == 1);
}

TEST_CASE("sure bonds move the right edge at unit speed") {
  operc::EdgeSpeedOpts o;
  o.trials = 200;
  o.mode = operc::ProcessMode::bond;
  o.p_list = {1.0};
  o.a_list = {0.5};
  o.n_list = {8, 16};
  auto res = operc::experiment_edge_speed(o);
  auto alpha = rows_of(res, "edgespeed_alpha");
  REQUIRE(alpha.size() == 1);
  CHECK(alpha[0].estimate == 1.0);
  CHECK(alpha[0].ci_lo == 1.0);
  CHECK(alpha[0].ci_hi == 1.0);
  for (const auto& r : rows_of(res, "edgespeed_tail")) {
    CHECK(r.estimate == 0.0);  // the edge never falls behind a*n
  }
}

TEST_CASE("full-line bond density rows cover every level and size") {
  operc::Prop4fOpts o;
  o.trials = 500;
  o.p = 0.9;
  o.p_prime = 0.6;
  o.n = 8;
  o.n_second = 16;
  o.s_sizes = {4, 8};
  auto res = operc::experiment_prop4f(o);
  auto rows = rows_of(res, "prop4f");
  REQUIRE(rows.size() == 4);  // 2 levels x 2 sizes
  for (const auto& r : rows) {
    CHECK(r.estimate >= 0.0);
    CHECK(r.estimate <= 1.0);
    CHECK(r.trials == 500);
  }
  // p = 1 leaves no site unreached, so no shortfall at all
  o.p = 1.0;
  auto sure = operc::experiment_prop4f(o);
  for (const auto& r : rows_of(sure, "prop4f")) CHECK(r.estimate == 0.0);
}

TEST_CASE("full-line shortfall is visible and decays near the density threshold") {
  // With the stationary density close to p', the shortfall event has real
  // mass at small |S| and dies off as |S| grows — the detector is falsifiable.
  operc::Prop4fOpts o;
  o.trials = 4000;
  o.p = 0.75;
  o.p_prime = 0.6;
  o.n = 64;
  o.n_second = 64;
  o.s_sizes = {8, 16, 32};
  auto res = operc::experiment_prop4f(o);
  auto rows = rows_of(res, "prop4f");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].estimate > 0.005);
  CHECK(rows[0].estimate > rows[1].estimate);
  CHECK(rows[1].estimate > rows[2].estimate);
}

TEST_CASE("the sampled exchange check carries both pmfs and a calibrated p-value") {
  operc::DualityMcOpts o;
  o.trials = 4000;
  o.eps = 0.2;
  o.p = 0.5;
  o.k = 1;
  o.n = 4;
  o.permutations = 500;
  auto res = operc::duality_check_mc(o);
  auto a = rows_of(res, "duality_product_start");
  auto b = rows_of(res, "duality_interval_start");
  REQUIRE(a.size() == 4);  // counts 0..3
  REQUIRE(b.size() == 4);
  double ma = 0, mb = 0;
  for (const auto& r : a) ma += r.estimate;
  for (const auto& r : b) mb += r.estimate;
  CHECK(ma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mb == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.summary["ks"]["p_value"].get<double>() > 0.001);
  // the instance is small enough for the exact oracle to ride along
  REQUIRE_FALSE(res.summary["oracle"].is_null());
  CHECK(res.summary["oracle"]["sup_distance"].get<double>() <= 1e-12);
  double exact1 = res.summary["oracle"]["pmf_product_start"][1].get<double>();
  double sampled1 = a[1].estimate;
  CHECK(std::abs(exact1 - sampled1) < 0.05);
}

TEST_CASE("estimator input contracts are enforced") {
  operc::Eq2Opts bad;
  bad.k_list = {2, 1};
  CHECK_THROWS_AS(operc::experiment_eq2(bad), std::invalid_argument);
  operc::Corollary2Opts c;
  c.eps_list = {0.1, 0.2};
  CHECK_THROWS_AS(operc::corollary2_sweep(c), std::invalid_argument);
  operc::ThetaOpts t;
  t.n_trunc = 0;
  CHECK_THROWS_AS(operc::estimate_theta(t), std::invalid_argument);
  CHECK_THROWS_AS(operc::parse_subset_spec("nonsense"), std::invalid_argument);
}
