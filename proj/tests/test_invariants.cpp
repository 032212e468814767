#include <string>

#include "doctest.h"
#include "operc/invariants.hpp"

namespace {

operc::SelftestOpts small_opts() {
  operc::SelftestOpts o;
  o.trials = 40;
  o.horizon = 24;
  o.oracle_trials = 3000;
  return o;
}

}  // namespace

TEST_CASE("the invariant suite passes on the honest engine") {
  auto reports = operc::run_selftest(small_opts());
  REQUIRE(reports.size() == 7);
  for (const auto& r : reports) {
    INFO(r.name, ": ", r.first_failure);
    CHECK(r.pass);
    CHECK(r.checked > 0);
  }
  CHECK(operc::all_pass(reports));
}

TEST_CASE("a skewed transmission rule is caught by the window identity") {
  auto o = small_opts();
  o.inject_fault = true;
  auto reports = operc::run_selftest(o);
  bool found = false;
  for (const auto& r : reports) {
    if (r.name == "interval_identity") {
      found = true;
      CHECK_FALSE(r.pass);
      CHECK(r.first_failure.find("eps=") != std::string::npos);  // locates the breakage
    }
  }
  CHECK(found);
  CHECK_FALSE(operc::all_pass(reports));
}

TEST_CASE("invariant reports are deterministic") {
  auto a = operc::run_selftest(small_opts());
  auto b = operc::run_selftest(small_opts());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].pass == b[i].pass);
    CHECK(a[i].checked == b[i].checked);
    CHECK(a[i].first_failure == b[i].first_failure);
  }
}

TEST_CASE("the failure location does not depend on the worker count") {
  auto o = small_opts();
  o.inject_fault = true;
  o.workers = 1;
  auto a = operc::run_selftest(o);
  o.workers = 4;
  auto b = operc::run_selftest(o);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first_failure == b[i].first_failure);
  }
}
