#include "operc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

namespace operc {

namespace {

void check_counts(std::int64_t successes, std::int64_t trials, double conf) {
  if (trials <= 0) throw std::invalid_argument("stats: trials must be positive");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("stats: successes outside [0, trials]");
  if (!(conf > 0.0 && conf < 1.0)) throw std::invalid_argument("stats: conf outside (0, 1)");
}

}  // namespace

BinomialCi clopper_pearson(std::int64_t successes, std::int64_t trials, double conf) {
  check_counts(successes, trials, conf);
  double alpha = 1.0 - conf;
  double k = static_cast<double>(successes);
  double n = static_cast<double>(trials);
  BinomialCi ci;
  if (successes == 0) {
    ci.lo = 0.0;
  } else {
    boost::math::beta_distribution<double> lo_d(k, n - k + 1.0);
    ci.lo = boost::math::quantile(lo_d, alpha / 2.0);
  }
  if (successes == trials) {
    ci.hi = 1.0;
  } else {
    boost::math::beta_distribution<double> hi_d(k + 1.0, n - k);
    ci.hi = boost::math::quantile(hi_d, 1.0 - alpha / 2.0);
  }
  return ci;
}

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("stats: quantile arg outside (0, 1)");
  boost::math::normal_distribution<double> nd(0.0, 1.0);
  return boost::math::quantile(nd, q);
}

BinomialCi wilson(std::int64_t successes, std::int64_t trials, double conf) {
  check_counts(successes, trials, conf);
  double z = normal_quantile(1.0 - (1.0 - conf) / 2.0);
  double n = static_cast<double>(trials);
  double phat = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  BinomialCi ci;
  // hard bounds: an all-or-nothing count pins the matching endpoint exactly
  ci.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  ci.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return ci;
}

TailFit fit_exponential_tail(const std::vector<double>& xs, const std::vector<double>& phats,
                             const std::vector<double>& trials, int min_points) {
  if (xs.size() != phats.size() || xs.size() != trials.size())
    throw std::invalid_argument("stats: tail fit input lengths differ");
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(phats[i] > 0.0 && phats[i] < 1.0) || !(trials[i] > 0.0)) continue;
    x.push_back(xs[i]);
    y.push_back(std::log(phats[i]));
    w.push_back(trials[i] * phats[i] * (1.0 - phats[i]));
  }
  TailFit fit;
  fit.points_used = static_cast<int>(x.size());
  if (fit.points_used < min_points) return fit;

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.fitted = true;
  double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double pred = fit.intercept + slope * x[i];
    ss_res += w[i] * (y[i] - pred) * (y[i] - pred);
    ss_tot += w[i] * (y[i] - my) * (y[i] - my);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

// statistic from per-value counts over the shared sorted support
double ks_from_counts(const std::vector<std::int64_t>& ca, const std::vector<std::int64_t>& cb,
                      double na, double nb) {
  double d = 0.0;
  std::int64_t cum_a = 0, cum_b = 0;
  for (std::size_t v = 0; v < ca.size(); ++v) {
    cum_a += ca[v];
    cum_b += cb[v];
    d = std::max(d, std::abs(static_cast<double>(cum_a) / na - static_cast<double>(cum_b) / nb));
  }
  return d;
}

}  // namespace

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       int permutations, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("stats: empty sample");

  // compress to a shared support so ties cost nothing; samples here are
  // heavily tied integers, so permutations reduce to recounting labels
  std::vector<double> support;
  support.reserve(a.size() + b.size());
  support.insert(support.end(), a.begin(), a.end());
  support.insert(support.end(), b.begin(), b.end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  auto value_index = [&](double x) {
    return static_cast<std::uint32_t>(
        std::lower_bound(support.begin(), support.end(), x) - support.begin());
  };
  std::size_t u = support.size();
  std::vector<std::int64_t> ca(u, 0), cb(u, 0);
  for (double x : a) ++ca[value_index(x)];
  for (double x : b) ++cb[value_index(x)];
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());

  KsResult res;
  res.statistic = ks_from_counts(ca, cb, na, nb);
  res.permutations = permutations;
  if (permutations <= 0) {
    res.p_value = 1.0;
    return res;
  }

  // p-value is symmetric in the two samples: the pool starts sorted and the
  // smaller group is always dealt first
  std::size_t n_small = std::min(a.size(), b.size());
  std::vector<std::uint32_t> pool;
  pool.reserve(a.size() + b.size());
  for (std::uint32_t v = 0; v < u; ++v)
    pool.insert(pool.end(), static_cast<std::size_t>(ca[v] + cb[v]), v);

  std::mt19937_64 rng(seed);
  int at_least = 0;
  std::vector<std::int64_t> c1(u), c2(u);
  for (int t = 0; t < permutations; ++t) {
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(pool[i], pool[j]);
    }
    std::fill(c1.begin(), c1.end(), 0);
    std::fill(c2.begin(), c2.end(), 0);
    for (std::size_t i = 0; i < n_small; ++i) ++c1[pool[i]];
    for (std::size_t i = n_small; i < pool.size(); ++i) ++c2[pool[i]];
    double d = ks_from_counts(c1, c2, static_cast<double>(n_small),
                              static_cast<double>(pool.size() - n_small));
    if (d >= res.statistic - 1e-12) ++at_least;
  }
  res.p_value = (1.0 + at_least) / (1.0 + permutations);
  return res;
}

BinomialCi conditional_ratio_ci(std::int64_t a, std::int64_t b, double conf) {
  if (b <= 0) throw std::invalid_argument("stats: conditioning count must be positive");
  if (a < 0 || a > b) throw std::invalid_argument("stats: numerator outside [0, denominator]");
  // Wilson score on the conditional count: a Wald interval collapses to a
  // point at all-or-nothing counts, which misreports rare-event resolution.
  return wilson(a, b, conf);
}

MeanCi mean_ci_normal(const std::vector<double>& samples, double conf) {
  if (samples.empty()) throw std::invalid_argument("stats: empty sample");
  MeanCi ci;
  double n = static_cast<double>(samples.size());
  double s = 0;
  for (double v : samples) s += v;
  ci.mean = s / n;
  if (samples.size() == 1) {
    ci.lo = ci.hi = ci.mean;
    return ci;
  }
  double ss = 0;
  for (double v : samples) ss += (v - ci.mean) * (v - ci.mean);
  double sd = std::sqrt(ss / (n - 1.0));
  double z = normal_quantile(1.0 - (1.0 - conf) / 2.0);
  ci.lo = ci.mean - z * sd / std::sqrt(n);
  ci.hi = ci.mean + z * sd / std::sqrt(n);
  return ci;
}

}  // namespace operc
