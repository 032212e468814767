#pragma once

#include <cstdint>
#include <vector>

namespace operc {

struct BinomialCi {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact (Clopper-Pearson) two-sided interval.
BinomialCi clopper_pearson(std::int64_t successes, std::int64_t trials, double conf = 0.95);

// Wilson score interval, used as a cross-check on the exact one.
BinomialCi wilson(std::int64_t successes, std::int64_t trials, double conf = 0.95);

double normal_quantile(double q);

struct TailFit {
  bool fitted = false;     // false: too few usable points ("below resolution")
  double rate = 0.0;       // log p(x) ~ intercept - rate * x
  double intercept = 0.0;
  double r2 = 0.0;         // weighted
  int points_used = 0;
};

// Weighted least squares of log(phat) on x with weights trials * phat * (1 - phat).
// Points with phat at 0 or 1 carry no usable log value and are dropped.
TailFit fit_exponential_tail(const std::vector<double>& xs, const std::vector<double>& phats,
                             const std::vector<double>& trials, int min_points = 2);

// Normal CI for a ratio-of-indicators estimate a/b (delta method; with nested
// Bernoulli events the variance collapses to g(1-g)/b).  b = 0 is a contract
// error; callers report that case as undefined instead.
BinomialCi conditional_ratio_ci(std::int64_t a, std::int64_t b, double conf = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

// Two-sample Kolmogorov-Smirnov with a permutation p-value (same-seed reruns
// give identical output).
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       int permutations = 2000, std::uint64_t seed = 1);

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

MeanCi mean_ci_normal(const std::vector<double>& samples, double conf = 0.95);

}  // namespace operc
