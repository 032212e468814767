#pragma once
// Exact small-instance computations by dynamic programming over level
// subsets.  States are bitmasks of one level's window; transitions integrate
// the designation field one level at a time.  Everything here is independent
// of the bit-parallel engine so the two can check each other.

#include <cstdint>
#include <vector>

#include "operc/engine.hpp"
#include "operc/kernels.hpp"
#include "operc/lattice.hpp"

namespace operc {

struct OracleLimits {
  int max_width = 16;              // sites per level
  std::size_t max_states = 1u << 22;
};

struct StateDistribution {
  int level = 0;
  int y_lo = 0;
  int y_hi = 0;
  // (mask, probability), mask bit i = site y_lo + 2i; sorted by mask.
  std::vector<std::pair<std::uint32_t, long double>> states;

  long double prob_empty() const;
  long double total() const;
};

// Law of A_n from a Singleton/Interval start.
StateDistribution exact_evolve(const SiteKernel& kernel, const InitialKind& init, int n,
                               const OracleLimits& lim = {});

// P(A_n nonempty) from a Singleton/Interval start.
double exact_survival(const SiteKernel& kernel, const InitialKind& init, int n,
                      const OracleLimits& lim = {});

// pmf of |A_n ∩ S| from a Singleton/Interval start; S lists sites at level n.
std::vector<double> exact_intersection_pmf(const SiteKernel& kernel, const InitialKind& init,
                                           int n, const std::vector<int>& S,
                                           const OracleLimits& lim = {});

// Same, starting from a product configuration (each even site independently
// with probability p) on the backward light cone of S.
std::vector<double> exact_intersection_pmf_product(const SiteKernel& kernel, double p, int n,
                                                   const std::vector<int>& S,
                                                   const OracleLimits& lim = {});

// Both sides of the start/target exchange at time 2n with K = {-2k, ..., 2k}:
// the law of |A_{2n}^{Pi_p} ∩ K| against the law of the number of sites of K
// whose own clusters (one shared field) reach Pi_p at level 2n.  Computed by
// two unrelated enumerations; the distributions agree exactly.
struct DualityResult {
  std::vector<double> count_from_product;
  std::vector<double> count_from_interval;
  double sup_distance = 0.0;
};

DualityResult exact_duality_check(const SiteKernel& kernel, double p, int k, int n,
                                  const OracleLimits& lim = {});

// Probabilities of the open patterns over same-level sites; pattern bit j
// refers to sites[j].  Exact for the registry kernels, throws for function
// kernels.
std::vector<long double> joint_open_pmf(const SiteKernel& kernel, const std::vector<int>& sites);

}  // namespace operc
