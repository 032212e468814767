#pragma once
// Process evolution: site and bond stepping, full runs, and the monotone
// site/bond coupling.
//
// Site process: y is in A_{n+1} iff some neighbour z in {y-1, y+1} lies in
// A_n and transmits.  Level-0 sites always transmit; a site at level n >= 1
// transmits iff it is open.  Closed sites are therefore reachable (they stay
// in A_n) but never pass the cluster on.
//
// Bond process: each bond (z, n) -> (z +- 1, n + 1) is open independently
// with probability p; y is in B_{n+1} iff an open bond leads to it from B_n.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "operc/kernels.hpp"
#include "operc/lattice.hpp"
#include "operc/rng.hpp"

namespace operc {

enum class ProcessMode { site, bond };

struct ProcessParams {
  ProcessMode mode = ProcessMode::site;
  SiteKernel kernel = IndependentKernel(0.0);  // site mode
  double bond_p = 1.0;                         // bond mode
  InitialKind init = Singleton{};
  int horizon = 0;
  int observe_halfwidth = 0;        // window kept observable for infinite starts
  std::vector<int> checkpoints;     // levels whose sets are snapshotted
  bool include_reached_closed = true;  // false: drop closed sites from each level
};

inline constexpr std::int32_t kNoEdge = INT32_MIN;

struct TrajectoryStats {
  int horizon = 0;
  // Last level whose (windowed) set was nonempty; -1 when level 0 is empty.
  // Meaningful as survival only when the initial condition is untruncated.
  int survived_to = -1;
  std::vector<std::int32_t> r, l;     // per-level edges, kNoEdge when empty
  std::vector<std::uint8_t> edge_censored;  // per-level: edges may be wrong (truncation)
  std::map<int, LevelSet> snapshots;

  bool alive_at(int n) const { return survived_to >= n; }
};

// One step of the site process.  `in` is the level-n set; the result lives at
// level n+1 with the window moved per the edge policies.  Level-0 sites
// transmit unconditionally.
LevelSet site_step(const LevelSet& in, const SiteKernel& kernel, const RandomSource& src,
                   EdgePolicy left, EdgePolicy right);

// One step of the bond process at bond-open probability p.
LevelSet bond_step(const LevelSet& in, double p, const RandomSource& src,
                   EdgePolicy left, EdgePolicy right);

// Full trajectory.  Deterministic given (params, seed, stream).
TrajectoryStats run_process(const ProcessParams& params, std::uint64_t seed, std::uint64_t stream);

// Monotone coupling: both processes read the same designation field, and a
// bond (z, n) -> (y, n+1) is open iff the site (y, n+1) is open, so the bond
// marginal is p = 1 - eps.  Containment B_n subset of A_n is checked at every
// level; the first violation, if any, is reported.
struct CoupledResult {
  TrajectoryStats site;
  TrajectoryStats bond;
  bool contained = true;
  std::optional<SiteCoord> first_violation;
};

CoupledResult run_coupled(const SiteKernel& kernel, const InitialKind& init_site,
                          const InitialKind& init_bond, int horizon,
                          std::uint64_t seed, std::uint64_t stream,
                          const std::vector<int>& checkpoints = {});

// Right edge of a trajectory at one level, censored to nullopt when the
// window set was empty or truncation could have hidden the true edge.
std::optional<int> edge_right(const TrajectoryStats& t, int n);

}  // namespace operc
