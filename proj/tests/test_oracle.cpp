#include <numeric>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "operc/kernels.hpp"
#include "operc/oracle.hpp"
#include "operc/oracle_exactq.hpp"

using operc::make_kernel;
using operc::OracleLimits;

namespace {
const OracleLimits kLim{};

template <class V>
double total(const V& pmf) {
  return static_cast<double>(std::accumulate(pmf.begin(), pmf.end(), 0.0L));
}
}  // namespace

// Expected values below were computed by a brute-force enumerator over all
// designations of the light cone, written independently in another language.

TEST_CASE("point-start survival matches brute-force enumeration") {
  CHECK(operc::exact_survival(make_kernel("independent", 0.5), operc::Singleton{}, 2, kLim) ==
        doctest::Approx(0.75).epsilon(1e-12));  // closed form 1 - eps^2
  CHECK(operc::exact_survival(make_kernel("independent", 0.3), operc::Singleton{}, 3, kLim) ==
        doctest::Approx(0.858970).epsilon(1e-12));
  CHECK(operc::exact_survival(make_kernel("independent", 0.2), operc::Singleton{}, 4, kLim) ==
        doctest::Approx(0.931921920).epsilon(1e-12));
}

TEST_CASE("interval-start survival matches brute-force enumeration") {
  CHECK(operc::exact_survival(make_kernel("independent", 0.3), operc::IntervalInit{1}, 3, kLim) ==
        doctest::Approx(0.977701753).epsilon(1e-12));
}

TEST_CASE("survival is monotone in eps and in the level") {
  double prev = 1.0;
  for (double eps : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double s = operc::exact_survival(make_kernel("independent", eps), operc::Singleton{}, 4, kLim);
    CHECK(s < prev);
    prev = s;
  }
  prev = 1.0;
  for (int n : {1, 2, 3, 4, 5}) {
    double s = operc::exact_survival(make_kernel("independent", 0.4), operc::Singleton{}, n, kLim);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("correlated-pair survival matches brute-force enumeration") {
  CHECK(operc::exact_survival(make_kernel("dependent-pair", 0.5), operc::Singleton{}, 2, kLim) ==
        doctest::Approx(0.646446609406726).epsilon(1e-10));
  CHECK(operc::exact_survival(make_kernel("dependent-pair", 0.3), operc::Singleton{}, 3, kLim) ==
        doctest::Approx(0.730109760994909).epsilon(1e-10));
}

TEST_CASE("intersection pmf matches brute-force enumeration") {
  auto pmf = operc::exact_intersection_pmf(make_kernel("independent", 0.5), operc::Singleton{}, 2,
                                           {0}, kLim);
  REQUIRE(pmf.size() == 2);
  CHECK(pmf[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pmf[1] == doctest::Approx(0.75).epsilon(1e-12));

  auto pmf2 = operc::exact_intersection_pmf(make_kernel("independent", 0.3), operc::Singleton{}, 3,
                                            {-1, 1}, kLim);
  REQUIRE(pmf2.size() == 3);
  CHECK(pmf2[0] == doctest::Approx(0.141030).epsilon(1e-12));
  CHECK(pmf2[1] == doctest::Approx(0.149940).epsilon(1e-12));
  CHECK(pmf2[2] == doctest::Approx(0.709030).epsilon(1e-12));

  auto pmf3 = operc::exact_intersection_pmf(make_kernel("independent", 0.3),
                                            operc::IntervalInit{1}, 2, {-2, 0, 2}, kLim);
  REQUIRE(pmf3.size() == 4);
  CHECK(pmf3[0] == doctest::Approx(0.008100).epsilon(1e-12));
  CHECK(pmf3[1] == doctest::Approx(0.037800).epsilon(1e-12));
  CHECK(pmf3[2] == doctest::Approx(0.170100).epsilon(1e-12));
  CHECK(pmf3[3] == doctest::Approx(0.784000).epsilon(1e-12));
  CHECK(total(pmf3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact rational survival matches brute-force fractions at dyadic eps") {
  auto as_string = [](const auto& q) {
    std::ostringstream os;
    os << q;
    return os.str();
  };
  CHECK(as_string(operc::exact_survival_exactq(0.5, operc::Singleton{}, 3, kLim)) == "19/32");
  CHECK(as_string(operc::exact_survival_exactq(0.5, operc::Singleton{}, 4, kLim)) == "123/256");
  CHECK(as_string(operc::exact_survival_exactq(0.25, operc::Singleton{}, 2, kLim)) == "15/16");
  CHECK(as_string(operc::exact_survival_exactq(0.25, operc::IntervalInit{1}, 3, kLim)) ==
        "259461/262144");
  // the floating DP agrees with the exact fraction
  double f = operc::exact_survival(make_kernel("independent", 0.5), operc::Singleton{}, 4, kLim);
  CHECK(f == doctest::Approx(123.0 / 256.0).epsilon(1e-14));
}

TEST_CASE("joint open-pattern law: independent kernel is a product") {
  auto pmf = operc::joint_open_pmf(make_kernel("independent", 0.25), {-2, 0, 2});
  // mask order: bit i = site i open; all-open has probability 0.75^3
  REQUIRE(pmf.size() == 8);
  CHECK(pmf[7] == doctest::Approx(0.421875).epsilon(1e-12));
  CHECK(pmf[0] == doctest::Approx(0.015625).epsilon(1e-12));
  CHECK(total(pmf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("joint open-pattern law: correlated pairs really correlate") {
  auto pmf = operc::joint_open_pmf(make_kernel("dependent-pair", 0.5), {0, 2});
  REQUIRE(pmf.size() == 4);
  // shared column: P(both open) = (1-delta)^3, marginals 0.5 each
  double keep = std::sqrt(0.5);
  CHECK(pmf[3] == doctest::Approx(keep * keep * keep).epsilon(1e-12));
  CHECK(pmf[1] + pmf[3] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pmf[2] + pmf[3] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(total(pmf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("capacity limits and contract violations raise typed errors") {
  CHECK_THROWS_AS(operc::exact_survival(make_kernel("independent", 0.5), operc::Singleton{}, 40,
                                        kLim),
                  std::length_error);
  CHECK_THROWS_AS(operc::exact_intersection_pmf(make_kernel("independent", 0.5),
                                                operc::Singleton{}, 2, {1}, kLim),
                  std::invalid_argument);  // target parity must match the level
  CHECK_THROWS_AS(operc::exact_intersection_pmf(make_kernel("independent", 0.5),
                                                operc::Singleton{}, 2, {}, kLim),
                  std::invalid_argument);
  operc::FunctionKernel fk;
  fk.radius = 0;
  fk.rule = [](const operc::RandomSource&, int, int) { return true; };
  CHECK_THROWS_AS(operc::joint_open_pmf(operc::SiteKernel{fk}, {0}), std::invalid_argument);
}
