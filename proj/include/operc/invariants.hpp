#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "operc/engine.hpp"

namespace operc {

struct InvariantReport {
  std::string name;
  bool pass = true;
  std::int64_t checked = 0;   // individual comparisons performed
  std::string first_failure;  // empty when pass
};

struct SelftestOpts {
  std::uint64_t seed = 1;
  std::int64_t trials = 200;  // per eps value, per check
  int horizon = 64;
  std::vector<double> eps_grid = {0.01, 0.1, 0.3, 0.6};
  std::int64_t oracle_trials = 20000;
  int workers = 0;
  bool inject_fault = false;  // test hook: skews one transmission rule
};

// A_n from a point equals the full-line process cut to [l_n, r_n], while the
// point process survives.  The fault hook lives here.
InvariantReport check_interval_identity(const SelftestOpts&);

// sup A_n from a point equals sup of the half-line process, while the point
// process survives.
InvariantReport check_halfline_edge(const SelftestOpts&);

// larger initial interval, larger cluster, level by level.
InvariantReport check_initial_monotone(const SelftestOpts&);

// coupled bond process stays inside the site process.
InvariantReport check_coupling_containment(const SelftestOpts&);

// Monte Carlo survival against exact enumeration on a small grid, plus the
// closed-form checks the enumeration must reproduce.
InvariantReport check_oracle_grid(const SelftestOpts&);

// frozen designation draws; catches accidental reseeding or mixing changes.
InvariantReport check_rng_frozen();

// one small experiment, run twice and at two worker counts, byte-compared.
InvariantReport check_determinism(const SelftestOpts&);

std::vector<InvariantReport> run_selftest(const SelftestOpts&);
bool all_pass(const std::vector<InvariantReport>&);

}  // namespace operc
