#pragma once
// Site designation kernels.
//
// A kernel decides open/closed for a site at level n >= 1 from the uniforms
// of the site_open channel in a finite neighbourhood.  range() is the
// dependence radius in lattice units: designations of sites further apart
// than 2 * range are independent.  Registry ids: "independent" and
// "dependent-pair".

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

#include "operc/rng.hpp"

namespace operc {

// open iff U(y, n) < 1 - eps; each site on its own uniform.
struct IndependentKernel {
  double eps = 0.0;
  std::uint64_t open_thr = 0;

  explicit IndependentKernel(double e) : eps(e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("kernel: eps outside [0, 1]");
    open_thr = threshold53(1.0 - e);
  }
  static constexpr int range() { return 0; }
  bool open(const RandomSource& src, int y, int n) const {
    return src.raw53(y, n, Channel::site_open) < open_thr;
  }
};

// closed iff U(y, n) > 1 - delta or U(y + 2, n) > 1 - delta, with delta
// solving the marginal P(closed) = eps: delta = 1 - sqrt(1 - eps).  A
// 1-dependent field (adjacent parity sites share one uniform) whose joint
// pattern probabilities stay exactly computable for the oracle.
struct DependentPairKernel {
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t keep_thr = 0;  // raw53 < keep_thr  <=>  U <= ... < 1 - delta

  explicit DependentPairKernel(double e) : eps(e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("kernel: eps outside [0, 1]");
    delta = 1.0 - std::sqrt(1.0 - e);
    keep_thr = threshold53(1.0 - delta);
  }
  static constexpr int range() { return 1; }
  bool open(const RandomSource& src, int y, int n) const {
    return src.raw53(y, n, Channel::site_open) < keep_thr &&
           src.raw53(y + 2, n, Channel::site_open) < keep_thr;
  }
};

// Arbitrary rule, mainly for tests (forced designations, fault injection).
// Not supported by the exact oracle.
struct FunctionKernel {
  int radius = 0;
  std::function<bool(const RandomSource&, int, int)> rule;

  int range() const { return radius; }
  bool open(const RandomSource& src, int y, int n) const { return rule(src, y, n); }
};

using SiteKernel = std::variant<IndependentKernel, DependentPairKernel, FunctionKernel>;

inline SiteKernel make_kernel(const std::string& id, double eps) {
  if (id == "independent") return IndependentKernel(eps);
  if (id == "dependent-pair") return DependentPairKernel(eps);
  throw std::invalid_argument("unknown kernel id: " + id);
}

inline double kernel_eps(const SiteKernel& k) {
  if (auto* i = std::get_if<IndependentKernel>(&k)) return i->eps;
  if (auto* d = std::get_if<DependentPairKernel>(&k)) return d->eps;
  throw std::invalid_argument("kernel has no closed-probability parameter");
}

}  // namespace operc
