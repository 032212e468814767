#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "operc/engine.hpp"
#include "operc/report.hpp"

namespace operc {

int resolve_workers(int requested);  // see parallel.hpp

struct CommonOpts {
  std::int64_t trials = 10000;
  double conf = 0.95;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: env var, then hardware
};

// Generic trajectory runner: per-checkpoint survival rows plus edge summaries.
struct SimulateOpts : CommonOpts {
  ProcessParams params;
};
ExperimentResult run_simulate(const SimulateOpts&);

// Survival curve theta_hat_n over a checkpoint grid, one shared-randomness
// run per trial, so the curve is non-increasing by construction.
struct SurvivalOpts : CommonOpts {
  std::string kernel_id = "independent";
  double eps = 0.1;
  InitialKind init = Singleton{};
  std::vector<int> levels;  // default: doubling grid up to horizon
  int horizon = 128;
  bool include_reached_closed = true;
};
ExperimentResult estimate_survival_curve(const SurvivalOpts&);

// theta proxy at a truncation level N, with the empirical truncation-bias
// diagnostic P(alive at N/2, dead by N).
struct ThetaOpts : CommonOpts {
  std::string kernel_id = "independent";
  double eps = 0.1;
  int k = 0;  // interval radius of the initial set, 0 = singleton
  int n_trunc = 128;
};
ExperimentResult estimate_theta(const ThetaOpts&);

// Failure probability 1 - theta_hat per initial radius k, with an exponential
// tail fit in k.  All k share one designation field per trial, so the
// estimates are non-increasing in k pathwise and the per-trial scan can stop
// at the first surviving k.
struct Eq2Opts : CommonOpts {
  std::string kernel_id = "independent";
  double eps = 0.05;
  std::vector<int> k_list = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  int n_trunc = 256;
  std::int64_t min_failures_for_fit = 10;
};
ExperimentResult experiment_eq2(const Eq2Opts&);

// Cardinality lower bound from a product start: fraction of trials where
// |A_{2n} cut to the growing interval| clears rho * p * (floor_even(2(k+beta*n)) + 1),
// against the survival probability of the interval-started process, per n.
struct EqStrOpts : CommonOpts {
  double eps = 0.01;
  double p = 0.5;
  int k = 2;
  double beta = 0.8;
  double rho = 0.8;
  std::vector<int> n_list = {8, 16, 32, 64};
};
ExperimentResult experiment_eq_str(const EqStrOpts&);

// Hit probability P(A_{2 n_eval} from a p-product start meets the radius-k
// interval), swept over eps.  One designation field per trial shared by every
// eps, so the sweep is monotone pathwise.
struct Corollary2Opts : CommonOpts {
  std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.01};
  int k = 2;
  double p = 0.5;
  int n_eval = 128;
};
ExperimentResult corollary2_sweep(const Corollary2Opts&);

struct SubsetSpec {
  enum class Kind { cone, random, centered };
  Kind kind = Kind::cone;
  double q = 0.5;  // random: keep probability inside the cone
  int m = 16;      // centered: subinterval site count
};
SubsetSpec parse_subset_spec(const std::string& text);  // cone | random:q | centered:m
std::string subset_spec_name(const SubsetSpec&);

// Conditional probability, given survival, that the density of A_n over the
// chosen subset of the beta-cone falls below rho; tail fits in n and in the
// centered-subinterval size m.
struct Prop3Opts : CommonOpts {
  double eps = 0.01;
  double beta = 0.9;
  double rho = 0.9;
  std::vector<int> n_list = {32, 64, 128};
  SubsetSpec subset;
  std::vector<int> m_list = {8, 16, 32};
  int n_fix = 64;
};
ExperimentResult experiment_prop3(const Prop3Opts&);

// Right-edge speed of the half-line process: alpha_hat = mean edge/n at the
// deepest level, per-a tails P(edge_n < a n) over the n grid.  Bond mode
// sweeps a p list on one shared field (alpha_hat monotone in p pathwise);
// site mode takes one eps.
struct EdgeSpeedOpts : CommonOpts {
  ProcessMode mode = ProcessMode::bond;
  double eps = 0.1;                              // site mode
  std::vector<double> p_list = {0.99};           // bond mode
  std::vector<double> a_list = {0.8};
  std::vector<int> n_list = {64, 128, 256};
};
ExperimentResult experiment_edge_speed(const EdgeSpeedOpts&);

// Full-line bond process density: tails P(|B_n over centered S| < p' |S|)
// across |S| at level n, repeated at a second level to exhibit uniformity.
struct Prop4fOpts : CommonOpts {
  double p = 0.9;
  double p_prime = 0.6;
  int n = 64;
  int n_second = 128;
  std::vector<int> s_sizes = {8, 16, 32, 64};
};
ExperimentResult experiment_prop4f(const Prop4fOpts&);

// Exchange identity, sampled: counts |A_{2n} from the p-product start, cut to
// the radius-k interval| against counts of interval sites whose singleton
// cluster (all on one shared field) meets an independent p-product at level
// 2n.  Two-sample KS plus exact enumeration when the instance is small.
struct DualityMcOpts : CommonOpts {
  double eps = 0.1;
  double p = 0.5;
  int k = 2;
  int n = 32;
  int permutations = 2000;
};
ExperimentResult duality_check_mc(const DualityMcOpts&);

}  // namespace operc
