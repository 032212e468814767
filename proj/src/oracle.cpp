#include "operc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "operc/oracle_exactq.hpp"

namespace operc {

long double StateDistribution::prob_empty() const {
  for (const auto& [m, p] : states) {
    if (m == 0) return p;
  }
  return 0.0L;
}

long double StateDistribution::total() const {
  long double t = 0;
  for (const auto& [m, p] : states) t += p;
  return t;
}

std::vector<long double> joint_open_pmf(const SiteKernel& kernel, const std::vector<int>& sites) {
  int m = static_cast<int>(sites.size());
  if (m > 20) throw std::length_error("joint_open_pmf: too many sites");
  std::vector<long double> pmf(std::size_t{1} << m, 0.0L);

  if (const auto* ik = std::get_if<IndependentKernel>(&kernel)) {
    long double s = 1.0L - static_cast<long double>(ik->eps);
    long double e = static_cast<long double>(ik->eps);
    std::vector<long double> sp(m + 1, 1.0L), ep(m + 1, 1.0L);
    for (int i = 1; i <= m; ++i) {
      sp[i] = sp[i - 1] * s;
      ep[i] = ep[i - 1] * e;
    }
    for (std::uint32_t c = 0; c < pmf.size(); ++c) {
      int o = std::popcount(c);
      pmf[c] = sp[o] * ep[m - o];
    }
    return pmf;
  }

  if (const auto* dk = std::get_if<DependentPairKernel>(&kernel)) {
    // underlying columns: site y is open iff neither U(y) nor U(y+2) is high
    std::vector<int> cols;
    for (int y : sites) {
      cols.push_back(y);
      cols.push_back(y + 2);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    int nc = static_cast<int>(cols.size());
    if (nc > 24) throw std::length_error("joint_open_pmf: dependent kernel window too wide");
    auto col_index = [&](int y) {
      return static_cast<int>(std::lower_bound(cols.begin(), cols.end(), y) - cols.begin());
    };
    long double d = static_cast<long double>(dk->delta);
    std::vector<long double> dp(nc + 1, 1.0L), qp(nc + 1, 1.0L);
    for (int i = 1; i <= nc; ++i) {
      dp[i] = dp[i - 1] * d;
      qp[i] = qp[i - 1] * (1.0L - d);
    }
    for (std::uint64_t h = 0; h < (std::uint64_t{1} << nc); ++h) {
      int nh = std::popcount(h);
      long double pr = dp[nh] * qp[nc - nh];
      std::uint32_t c = 0;
      for (int j = 0; j < m; ++j) {
        bool h0 = (h >> col_index(sites[j])) & 1;
        bool h2 = (h >> col_index(sites[j] + 2)) & 1;
        if (!h0 && !h2) c |= std::uint32_t{1} << j;
      }
      pmf[c] += pr;
    }
    return pmf;
  }

  throw std::invalid_argument("joint_open_pmf: kernel has no exact pattern law");
}

namespace {

using Dist = std::unordered_map<std::uint32_t, long double>;

int width_after(int w, EdgePolicy left, EdgePolicy right) {
  return w + (left == EdgePolicy::grow ? 1 : 0) + (right == EdgePolicy::grow ? 1 : 0) - 1;
}

std::uint32_t spread_mask(std::uint32_t T, int wout, EdgePolicy left) {
  std::uint32_t out = left == EdgePolicy::grow ? ((T << 1) | T) : (T | (T >> 1));
  if (wout < 32) out &= (std::uint32_t{1} << wout) - 1;
  return out;
}

std::vector<int> mask_positions(std::uint32_t m) {
  std::vector<int> pos;
  while (m) {
    pos.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return pos;
}

// Open-pattern pmf per occupied-set mask, cached on the translation-invariant
// shape (the kernels are homogeneous in y and n).
struct PmfCache {
  const SiteKernel* kernel;
  std::unordered_map<std::uint32_t, std::vector<long double>> map;

  const std::vector<long double>& get(std::uint32_t mask) {
    std::uint32_t key = mask >> std::countr_zero(mask);
    auto it = map.find(key);
    if (it == map.end()) {
      std::vector<int> ys;
      for (int p : mask_positions(key)) ys.push_back(2 * p);
      it = map.emplace(key, joint_open_pmf(*kernel, ys)).first;
    }
    return it->second;
  }
};

void check_states(const Dist& d, const OracleLimits& lim) {
  if (d.size() > lim.max_states) throw std::length_error("oracle: state space too large");
}

// One DP level.  `level` is the level the distribution currently lives on.
void dp_step(Dist& d, int level, int width, EdgePolicy left, EdgePolicy right,
             const SiteKernel& kernel, PmfCache& cache, const OracleLimits& lim) {
  int wout = width_after(width, left, right);
  if (wout < 1) throw std::invalid_argument("oracle: window exhausted");
  const auto* ik = std::get_if<IndependentKernel>(&kernel);
  std::vector<long double> sp, ep;
  if (ik) {
    long double s = 1.0L - static_cast<long double>(ik->eps);
    long double e = static_cast<long double>(ik->eps);
    sp.assign(width + 1, 1.0L);
    ep.assign(width + 1, 1.0L);
    for (int i = 1; i <= width; ++i) {
      sp[i] = sp[i - 1] * s;
      ep[i] = ep[i - 1] * e;
    }
  }

  Dist nd;
  nd.reserve(d.size() * 2);
  for (const auto& [mask, pr] : d) {
    if (mask == 0) {
      nd[0] += pr;
      continue;
    }
    if (level == 0) {
      nd[spread_mask(mask, wout, left)] += pr;
      continue;
    }
    if (ik) {
      int cnt = std::popcount(mask);
      std::uint32_t T = mask;
      while (true) {
        int o = std::popcount(T);
        nd[spread_mask(T, wout, left)] += pr * sp[o] * ep[cnt - o];
        if (T == 0) break;
        T = (T - 1) & mask;
      }
    } else {
      auto pos = mask_positions(mask);
      const auto& pmf = cache.get(mask);
      for (std::uint32_t c = 0; c < pmf.size(); ++c) {
        if (pmf[c] == 0.0L) continue;
        std::uint32_t T = 0;
        for (std::size_t j = 0; j < pos.size(); ++j) {
          if ((c >> j) & 1) T |= std::uint32_t{1} << pos[j];
        }
        nd[spread_mask(T, wout, left)] += pr * pmf[c];
      }
    }
  }
  d.swap(nd);
  check_states(d, lim);
}

void check_total(long double t, const char* what) {
  if (std::abs(static_cast<double>(t) - 1.0) > 1e-12)
    throw std::logic_error(std::string(what) + ": distribution lost mass");
}

StateDistribution pack(const Dist& d, int level, int y_lo, int width) {
  StateDistribution out;
  out.level = level;
  out.y_lo = y_lo;
  out.y_hi = y_lo + 2 * (width - 1);
  out.states.assign(d.begin(), d.end());
  std::sort(out.states.begin(), out.states.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  check_total(out.total(), "oracle");
  return out;
}

int interval_k(const InitialKind& init) {
  if (std::holds_alternative<Singleton>(init)) return 0;
  if (const auto* iv = std::get_if<IntervalInit>(&init)) {
    if (iv->k < 0) throw std::invalid_argument("oracle: interval needs k >= 0");
    return iv->k;
  }
  throw std::invalid_argument("oracle: interval-type start required");
}

}  // namespace

StateDistribution exact_evolve(const SiteKernel& kernel, const InitialKind& init, int n,
                               const OracleLimits& lim) {
  if (n < 0) throw std::invalid_argument("oracle: n >= 0 required");
  int k = interval_k(init);
  int width = 2 * k + 1;
  if (width + n > lim.max_width) throw std::length_error("oracle: window wider than the limit");
  Dist d;
  d[(std::uint32_t{1} << width) - 1] = 1.0L;
  PmfCache cache{&kernel, {}};
  int y_lo = -2 * k;
  for (int lvl = 0; lvl < n; ++lvl) {
    dp_step(d, lvl, width, EdgePolicy::grow, EdgePolicy::grow, kernel, cache, lim);
    ++width;
    --y_lo;
  }
  return pack(d, n, y_lo, width);
}

double exact_survival(const SiteKernel& kernel, const InitialKind& init, int n,
                      const OracleLimits& lim) {
  StateDistribution d = exact_evolve(kernel, init, n, lim);
  return static_cast<double>(1.0L - d.prob_empty());
}

namespace {

std::vector<double> pmf_of_counts(const StateDistribution& d, const std::vector<int>& S) {
  std::uint32_t sel = 0;
  for (int y : S) {
    if (((y ^ d.level) & 1)) throw std::invalid_argument("oracle: target site off the level's parity");
    if (y >= d.y_lo && y <= d.y_hi) sel |= std::uint32_t{1} << ((y - d.y_lo) / 2);
  }
  std::vector<long double> acc(S.size() + 1, 0.0L);
  for (const auto& [mask, pr] : d.states) acc[std::popcount(mask & sel)] += pr;
  long double t = 0;
  for (auto v : acc) t += v;
  check_total(t, "oracle intersection");
  return std::vector<double>(acc.begin(), acc.end());
}

}  // namespace

std::vector<double> exact_intersection_pmf(const SiteKernel& kernel, const InitialKind& init,
                                           int n, const std::vector<int>& S,
                                           const OracleLimits& lim) {
  if (S.empty()) throw std::invalid_argument("oracle: empty target set");
  return pmf_of_counts(exact_evolve(kernel, init, n, lim), S);
}

std::vector<double> exact_intersection_pmf_product(const SiteKernel& kernel, double p, int n,
                                                   const std::vector<int>& S,
                                                   const OracleLimits& lim) {
  if (S.empty()) throw std::invalid_argument("oracle: empty target set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("oracle: p outside [0, 1]");
  auto [mn, mx] = std::minmax_element(S.begin(), S.end());
  for (int y : S) {
    if (((y ^ n) & 1)) throw std::invalid_argument("oracle: target site off the level's parity");
  }
  // backward light cone of S
  int y_lo = *mn - n;
  int width = (*mx - *mn) / 2 + n + 1;
  if (width > lim.max_width) throw std::length_error("oracle: window wider than the limit");

  long double pp = static_cast<long double>(p);
  Dist d;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << width); ++mask) {
    int o = std::popcount(mask);
    long double pr = 1.0L;
    for (int i = 0; i < o; ++i) pr *= pp;
    for (int i = 0; i < width - o; ++i) pr *= (1.0L - pp);
    if (pr != 0.0L) d[mask] += pr;
  }
  PmfCache cache{&kernel, {}};
  for (int lvl = 0; lvl < n; ++lvl) {
    dp_step(d, lvl, width, EdgePolicy::shrink, EdgePolicy::shrink, kernel, cache, lim);
    --width;
    ++y_lo;
  }
  return pmf_of_counts(pack(d, n, y_lo, width), S);
}

namespace {

// Second route for the exchange identity: propagate, per source site of K,
// the set of sources reaching each site (color masks), one designation level
// at a time, then thin the final level by the product set.  Shares nothing
// with dp_step; only the kernel pattern law is common.
std::vector<double> interval_side_pmf(const SiteKernel& kernel, double p, int k, int n2,
                                      const OracleLimits& lim) {
  int ncol = 2 * k + 1;
  if (ncol > 8) throw std::length_error("oracle duality: interval too wide (k <= 3)");
  using State = std::vector<std::uint8_t>;
  std::map<State, long double> dist;
  State s0(ncol);
  for (int j = 0; j < ncol; ++j) s0[j] = static_cast<std::uint8_t>(1u << j);
  dist[s0] = 1.0L;

  PmfCache cache{&kernel, {}};
  for (int m = 0; m < n2; ++m) {
    std::map<State, long double> nd;
    int w = ncol + m;
    for (const auto& [st, pr] : dist) {
      std::vector<int> active;
      for (int i = 0; i < w; ++i) {
        if (st[i]) active.push_back(i);
      }
      auto propagate = [&](std::uint64_t transmit_bits) {
        State nx(w + 1, 0);
        for (std::size_t j = 0; j < active.size(); ++j) {
          if (!((transmit_bits >> j) & 1)) continue;
          int i = active[j];
          nx[i] |= st[i];      // child y - 1 sits at the same index after the left edge grows
          nx[i + 1] |= st[i];  // child y + 1
        }
        return nx;
      };
      if (active.empty()) {
        nd[State(w + 1, 0)] += pr;
      } else if (m == 0) {
        nd[propagate(~std::uint64_t{0})] += pr;
      } else {
        std::uint32_t shape = 0;
        for (int i : active) shape |= std::uint32_t{1} << i;
        const auto& pmf = cache.get(shape);
        for (std::uint32_t c = 0; c < pmf.size(); ++c) {
          if (pmf[c] == 0.0L) continue;
          nd[propagate(c)] += pr * pmf[c];
        }
      }
    }
    dist.swap(nd);
    if (dist.size() > lim.max_states) throw std::length_error("oracle duality: state space too large");
  }

  // thin by the product set and count which sources were reached
  long double pp = static_cast<long double>(p);
  std::vector<long double> out(ncol + 1, 0.0L);
  std::vector<long double> h, h2;
  for (const auto& [st, pr] : dist) {
    h.assign(std::size_t{1} << ncol, 0.0L);
    h[0] = 1.0L;
    for (std::uint8_t mm : st) {
      if (!mm) continue;
      h2.assign(h.size(), 0.0L);
      for (std::size_t hm = 0; hm < h.size(); ++hm) {
        if (h[hm] == 0.0L) continue;
        h2[hm | mm] += h[hm] * pp;
        h2[hm] += h[hm] * (1.0L - pp);
      }
      h.swap(h2);
    }
    for (std::size_t hm = 0; hm < h.size(); ++hm)
      out[std::popcount(hm)] += pr * h[hm];
  }
  long double t = 0;
  for (auto v : out) t += v;
  check_total(t, "oracle duality");
  return std::vector<double>(out.begin(), out.end());
}

}  // namespace

DualityResult exact_duality_check(const SiteKernel& kernel, double p, int k, int n,
                                  const OracleLimits& lim) {
  if (k < 0 || n < 0) throw std::invalid_argument("oracle duality: k, n >= 0 required");
  std::vector<int> K;
  for (int y = -2 * k; y <= 2 * k; y += 2) K.push_back(y);
  DualityResult res;
  res.count_from_product = exact_intersection_pmf_product(kernel, p, 2 * n, K, lim);
  res.count_from_interval = interval_side_pmf(kernel, p, k, 2 * n, lim);
  res.sup_distance = 0.0;
  for (std::size_t i = 0; i < res.count_from_product.size(); ++i)
    res.sup_distance = std::max(res.sup_distance,
                                std::abs(res.count_from_product[i] - res.count_from_interval[i]));
  return res;
}

boost::multiprecision::cpp_rational exact_survival_exactq(double eps, const InitialKind& init,
                                                          int n, const OracleLimits& lim) {
  using Q = boost::multiprecision::cpp_rational;
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("oracle: eps outside [0, 1]");
  int k = interval_k(init);
  int width = 2 * k + 1;
  if (width + n > lim.max_width) throw std::length_error("oracle: window wider than the limit");
  Q e(eps);
  Q s = Q(1) - e;
  std::map<std::uint32_t, Q> d;
  d[(std::uint32_t{1} << width) - 1] = Q(1);
  for (int lvl = 0; lvl < n; ++lvl) {
    int wout = width + 1;
    std::vector<Q> sp(width + 1, Q(1)), ep(width + 1, Q(1));
    for (int i = 1; i <= width; ++i) {
      sp[i] = sp[i - 1] * s;
      ep[i] = ep[i - 1] * e;
    }
    std::map<std::uint32_t, Q> nd;
    for (const auto& [mask, pr] : d) {
      if (mask == 0) {
        nd[0] += pr;
        continue;
      }
      if (lvl == 0) {
        nd[spread_mask(mask, wout, EdgePolicy::grow)] += pr;
        continue;
      }
      int cnt = std::popcount(mask);
      std::uint32_t T = mask;
      while (true) {
        int o = std::popcount(T);
        nd[spread_mask(T, wout, EdgePolicy::grow)] += pr * sp[o] * ep[cnt - o];
        if (T == 0) break;
        T = (T - 1) & mask;
      }
    }
    d.swap(nd);
    width = wout;
  }
  Q total(0), dead(0);
  for (const auto& [mask, pr] : d) {
    total += pr;
    if (mask == 0) dead += pr;
  }
  if (total != Q(1)) throw std::logic_error("oracle: rational distribution lost mass");
  return Q(1) - dead;
}

}  // namespace operc
