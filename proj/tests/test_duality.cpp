#include <cmath>

#include "doctest.h"
#include "operc/kernels.hpp"
#include "operc/oracle.hpp"

using operc::make_kernel;
using operc::OracleLimits;

// Two independently coded exact routes must produce the same law for the
// number of targets reached: forward evolution from a random start counted on
// a fixed set, versus per-target cluster evolution intersected with the
// random set.  The second route shares no state-space code with the first.

TEST_CASE("the two exact routes agree on a hand-computed instance") {
  // eps = 0.2, density p = 0.3, single target, depth 1 (two levels).
  // By hand: the target is reached with probability
  //   0.8^2 (1 - 0.7^3) + 2 * 0.8 * 0.2 * (1 - 0.7^2) = 0.58368.
  auto res = operc::exact_duality_check(make_kernel("independent", 0.2), 0.3, 0, 1,
                                        OracleLimits{});
  REQUIRE(res.count_from_product.size() == 2);
  REQUIRE(res.count_from_interval.size() == 2);
  CHECK(res.count_from_product[1] == doctest::Approx(0.58368).epsilon(1e-12));
  CHECK(res.count_from_interval[1] == doctest::Approx(0.58368).epsilon(1e-12));
  CHECK(res.count_from_product[0] == doctest::Approx(0.41632).epsilon(1e-12));
  CHECK(res.sup_distance <= 1e-12);
}

TEST_CASE("the exchange identity holds across a small grid") {
  for (double eps : {0.2, 0.6}) {
    for (double p : {0.3, 1.0}) {
      for (int k : {0, 1}) {
        for (int n : {1, 2}) {
          auto res = operc::exact_duality_check(make_kernel("independent", eps), p, k, n,
                                                OracleLimits{});
          INFO("eps=", eps, " p=", p, " k=", k, " n=", n);
          CHECK(res.sup_distance <= 1e-12);
          double mass_a = 0.0, mass_b = 0.0;
          for (double v : res.count_from_product) mass_a += v;
          for (double v : res.count_from_interval) mass_b += v;
          CHECK(mass_a == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(mass_b == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("a sure random set turns the count law into pure survival") {
  // p = 1: the target count is k side-wise deterministic given reach events;
  // with a single target the reach probability equals two-level survival of
  // the dual cluster, here 1 - eps^2.
  for (double eps : {0.3, 0.5}) {
    auto res = operc::exact_duality_check(make_kernel("independent", eps), 1.0, 0, 1,
                                          OracleLimits{});
    CHECK(res.count_from_interval[1] == doctest::Approx(1.0 - eps * eps).epsilon(1e-12));
    CHECK(res.sup_distance <= 1e-12);
  }
}

TEST_CASE("the exchange also holds for the correlated-pair kernel") {
  for (int n : {1, 2}) {
    auto res = operc::exact_duality_check(make_kernel("dependent-pair", 0.4), 0.5, 1, n,
                                          OracleLimits{});
    CHECK(res.sup_distance <= 1e-12);
  }
}
