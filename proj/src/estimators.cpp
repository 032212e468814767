#include "operc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "operc/kernels.hpp"
#include "operc/oracle.hpp"
#include "operc/parallel.hpp"
#include "operc/stats.hpp"

namespace operc {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OPERC_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

constexpr std::uint64_t kSubsetStream = (std::uint64_t{1} << 40) + 3;
constexpr double kEventSlack = 1e-9;  // threshold comparisons: near-ties count as "not below"

std::string key_val(const char* k, double v) { return std::string(k) + "=" + format_double(v); }
std::string key_val(const char* k, int v) { return std::string(k) + "=" + std::to_string(v); }
std::string key_val(const char* k, const std::string& v) { return std::string(k) + "=" + v; }

std::string join_params(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ';';
    out += p;
  }
  return out;
}

std::vector<int> doubling_grid(int horizon) {
  std::vector<int> g;
  for (int n = 1; n < horizon; n *= 2) g.push_back(n);
  g.push_back(horizon);
  return g;
}

nlohmann::ordered_json base_summary(const char* experiment, const CommonOpts& o) {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["version"] = kVersion;
  j["seed"] = o.seed;
  j["trials"] = o.trials;
  j["conf"] = o.conf;
  return j;
}

void require_trials(const CommonOpts& o) {
  if (o.trials < 1) throw std::invalid_argument("experiment: trials >= 1 required");
}

Row make_row(std::string experiment, std::string params, double x, double est,
             const BinomialCi& ci, std::int64_t trials, std::int64_t censored) {
  Row r;
  r.experiment = std::move(experiment);
  r.params = std::move(params);
  r.x = x;
  r.estimate = est;
  r.ci_lo = ci.lo;
  r.ci_hi = ci.hi;
  r.trials = trials;
  r.censored_count = censored;
  return r;
}

const LevelSet* snap(const TrajectoryStats& t, int n) {
  auto it = t.snapshots.find(n);
  return it == t.snapshots.end() ? nullptr : &it->second;
}

// sites of S present in the trajectory's level-n set; dead level = 0
int count_on(const TrajectoryStats& t, int n, const std::vector<int>& S) {
  const LevelSet* s = snap(t, n);
  if (!s) return 0;
  int c = 0;
  for (int y : S) {
    if (s->test(y)) ++c;
  }
  return c;
}

}  // namespace

ExperimentResult run_simulate(const SimulateOpts& opts) {
  require_trials(opts);
  ProcessParams P = opts.params;
  if (P.checkpoints.empty()) P.checkpoints = doubling_grid(P.horizon);
  std::sort(P.checkpoints.begin(), P.checkpoints.end());
  P.checkpoints.erase(std::unique(P.checkpoints.begin(), P.checkpoints.end()),
                      P.checkpoints.end());
  const std::int64_t T = opts.trials;
  const std::size_t L = P.checkpoints.size();

  struct Slot {
    std::uint8_t alive, censored;
    std::int32_t r, l;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(T) * L);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < L; ++i) {
      int n = P.checkpoints[i];
      Slot& s = slots[static_cast<std::size_t>(t) * L + i];
      s.alive = traj.alive_at(n) ? 1 : 0;
      s.censored = n < static_cast<int>(traj.edge_censored.size()) ? traj.edge_censored[n] : 1;
      s.r = n < static_cast<int>(traj.r.size()) ? traj.r[n] : kNoEdge;
      s.l = n < static_cast<int>(traj.l.size()) ? traj.l[n] : kNoEdge;
    }
  });

  std::string mode = P.mode == ProcessMode::bond ? "bond" : "site";
  std::string params = join_params({key_val("mode", mode), key_val("init", initial_name(P.init)),
                                    key_val("eps", kernel_eps(P.kernel)), key_val("p", P.bond_p),
                                    key_val("horizon", P.horizon)});
  ExperimentResult out;
  out.summary = base_summary("simulate", opts);
  out.summary["parameters"]["mode"] = mode;
  out.summary["parameters"]["init"] = initial_name(P.init);
  out.summary["parameters"]["eps"] = kernel_eps(P.kernel);
  out.summary["parameters"]["bond_p"] = P.bond_p;
  out.summary["parameters"]["horizon"] = P.horizon;
  auto levels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < L; ++i) {
    int n = P.checkpoints[i];
    std::int64_t alive = 0, censored = 0, edge_n = 0;
    double edge_sum = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      const Slot& s = slots[static_cast<std::size_t>(t) * L + i];
      alive += s.alive;
      censored += s.censored;
      if (s.alive && !s.censored && s.r != kNoEdge) {
        edge_sum += s.r;
        ++edge_n;
      }
    }
    double est = static_cast<double>(alive) / static_cast<double>(T);
    out.rows.push_back(make_row("simulate", params, n, est, clopper_pearson(alive, T, opts.conf),
                                T, censored));
    nlohmann::ordered_json lv;
    lv["n"] = n;
    lv["alive_fraction"] = est;
    lv["mean_right_edge"] = edge_n > 0 ? edge_sum / static_cast<double>(edge_n) : 0.0;
    lv["edge_samples"] = edge_n;
    levels.push_back(lv);
  }
  out.summary["levels"] = levels;
  return out;
}

ExperimentResult estimate_survival_curve(const SurvivalOpts& opts) {
  require_trials(opts);
  if (opts.horizon < 1) throw std::invalid_argument("survival: horizon >= 1 required");
  std::vector<int> levels = opts.levels.empty() ? doubling_grid(opts.horizon) : opts.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.back() > opts.horizon) throw std::invalid_argument("survival: level beyond horizon");

  ProcessParams P;
  P.kernel = make_kernel(opts.kernel_id, opts.eps);
  P.init = opts.init;
  P.horizon = opts.horizon;
  P.include_reached_closed = opts.include_reached_closed;
  const std::int64_t T = opts.trials;
  const std::size_t L = levels.size();

  std::vector<std::uint8_t> alive(static_cast<std::size_t>(T) * L, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < L; ++i)
      alive[static_cast<std::size_t>(t) * L + i] = traj.alive_at(levels[i]) ? 1 : 0;
  });

  std::string params = join_params({key_val("kernel", opts.kernel_id), key_val("eps", opts.eps),
                                    key_val("init", initial_name(opts.init))});
  ExperimentResult out;
  out.summary = base_summary("survival", opts);
  out.summary["parameters"]["kernel"] = opts.kernel_id;
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["init"] = initial_name(opts.init);
  out.summary["parameters"]["horizon"] = opts.horizon;
  out.summary["parameters"]["include_reached_closed"] = opts.include_reached_closed;
  auto curve = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < L; ++i) {
    std::int64_t a = 0;
    for (std::int64_t t = 0; t < T; ++t) a += alive[static_cast<std::size_t>(t) * L + i];
    double est = static_cast<double>(a) / static_cast<double>(T);
    BinomialCi ci = clopper_pearson(a, T, opts.conf);
    out.rows.push_back(make_row("survival", params, levels[i], est, ci, T, 0));
    curve.push_back(ci_json(est, ci, T, "clopper_pearson"));
    curve.back()["n"] = levels[i];
  }
  out.summary["curve"] = curve;
  return out;
}

ExperimentResult estimate_theta(const ThetaOpts& opts) {
  require_trials(opts);
  if (opts.n_trunc < 1) throw std::invalid_argument("theta: n_trunc >= 1 required");
  if (opts.k < 0) throw std::invalid_argument("theta: k >= 0 required");
  ProcessParams P;
  P.kernel = make_kernel(opts.kernel_id, opts.eps);
  P.init = opts.k == 0 ? InitialKind{Singleton{}} : InitialKind{IntervalInit{opts.k}};
  P.horizon = opts.n_trunc;
  const int half = std::max(1, opts.n_trunc / 2);
  const std::int64_t T = opts.trials;

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(T) * 2, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
    flags[static_cast<std::size_t>(t) * 2] = traj.alive_at(opts.n_trunc) ? 1 : 0;
    flags[static_cast<std::size_t>(t) * 2 + 1] = traj.alive_at(half) ? 1 : 0;
  });

  std::int64_t alive_full = 0, died_between = 0;
  for (std::int64_t t = 0; t < T; ++t) {
    bool a = flags[static_cast<std::size_t>(t) * 2];
    bool h = flags[static_cast<std::size_t>(t) * 2 + 1];
    alive_full += a;
    died_between += (h && !a) ? 1 : 0;
  }
  double theta_hat = static_cast<double>(alive_full) / static_cast<double>(T);
  double diag = static_cast<double>(died_between) / static_cast<double>(T);
  BinomialCi theta_ci = clopper_pearson(alive_full, T, opts.conf);
  BinomialCi diag_ci = clopper_pearson(died_between, T, opts.conf);

  std::string params = join_params({key_val("kernel", opts.kernel_id), key_val("eps", opts.eps),
                                    key_val("k", opts.k), key_val("n_trunc", opts.n_trunc)});
  ExperimentResult out;
  out.rows.push_back(make_row("theta", params, opts.n_trunc, theta_hat, theta_ci, T, 0));
  out.rows.push_back(make_row("theta_trunc_diag", params, half, diag, diag_ci, T, 0));
  out.summary = base_summary("theta", opts);
  out.summary["parameters"]["kernel"] = opts.kernel_id;
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["k"] = opts.k;
  out.summary["parameters"]["n_trunc"] = opts.n_trunc;
  out.summary["theta"] = ci_json(theta_hat, theta_ci, T, "clopper_pearson");
  out.summary["trunc_diag"] = ci_json(diag, diag_ci, T, "clopper_pearson");
  out.summary["trunc_diag"]["half_level"] = half;
  return out;
}

ExperimentResult experiment_eq2(const Eq2Opts& opts) {
  require_trials(opts);
  if (opts.k_list.empty()) throw std::invalid_argument("eq2: k list empty");
  for (std::size_t i = 1; i < opts.k_list.size(); ++i) {
    if (opts.k_list[i] <= opts.k_list[i - 1])
      throw std::invalid_argument("eq2: k list must increase");
  }
  if (opts.k_list.front() < 0) throw std::invalid_argument("eq2: k >= 0 required");
  const std::int64_t T = opts.trials;
  const std::size_t K = opts.k_list.size();
  const SiteKernel kernel = make_kernel(opts.kernel_id, opts.eps);

  // first k index whose interval start survives; every designation is shared
  // across k, so survival is monotone in k within a trial and the scan can
  // stop at the first survivor
  std::vector<std::uint16_t> first_alive(static_cast<std::size_t>(T), 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    std::uint16_t idx = static_cast<std::uint16_t>(K);
    for (std::size_t i = 0; i < K; ++i) {
      ProcessParams P;
      P.kernel = kernel;
      P.init = IntervalInit{opts.k_list[i]};
      P.horizon = opts.n_trunc;
      TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
      if (traj.alive_at(opts.n_trunc)) {
        idx = static_cast<std::uint16_t>(i);
        break;
      }
    }
    first_alive[static_cast<std::size_t>(t)] = idx;
  });

  std::string params = join_params({key_val("kernel", opts.kernel_id), key_val("eps", opts.eps),
                                    key_val("n_trunc", opts.n_trunc)});
  ExperimentResult out;
  out.summary = base_summary("eq2", opts);
  out.summary["parameters"]["kernel"] = opts.kernel_id;
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["n_trunc"] = opts.n_trunc;
  std::vector<double> xs, phats, trials_v;
  auto points = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < K; ++i) {
    std::int64_t deaths = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      if (first_alive[static_cast<std::size_t>(t)] > i) ++deaths;
    }
    double est = static_cast<double>(deaths) / static_cast<double>(T);
    BinomialCi ci = clopper_pearson(deaths, T, opts.conf);
    out.rows.push_back(make_row("eq2", params, opts.k_list[i], est, ci, T, 0));
    nlohmann::ordered_json pt = ci_json(est, ci, T, "clopper_pearson");
    pt["k"] = opts.k_list[i];
    pt["failures"] = deaths;
    points.push_back(pt);
    if (deaths >= opts.min_failures_for_fit) {
      xs.push_back(opts.k_list[i]);
      phats.push_back(est);
      trials_v.push_back(static_cast<double>(T));
    }
  }
  out.summary["failure_points"] = points;
  out.summary["fit_min_failures"] = opts.min_failures_for_fit;
  out.summary["tail_fit_in_k"] = tail_fit_json(fit_exponential_tail(xs, phats, trials_v));
  return out;
}

namespace {

// even sites with |y| <= bound, as a plain list
std::vector<int> even_interval(int bound) {
  std::vector<int> v;
  for (int y = -bound; y <= bound; y += 2) v.push_back(y);
  return v;
}

}  // namespace

ExperimentResult experiment_eq_str(const EqStrOpts& opts) {
  require_trials(opts);
  if (!(opts.beta > 0.0 && opts.beta <= 1.0) || !(opts.rho > 0.0 && opts.rho <= 1.0) ||
      !(opts.p > 0.0 && opts.p <= 1.0))
    throw std::invalid_argument("eqstr: beta, rho, p in (0, 1] required");
  if (opts.k < 0) throw std::invalid_argument("eqstr: k >= 0 required");
  if (opts.n_list.empty()) throw std::invalid_argument("eqstr: n list empty");
  if (!(opts.eps >= 0.0 && opts.eps <= 1.0)) throw std::invalid_argument("eqstr: eps outside [0, 1]");

  std::vector<int> n_list = opts.n_list;
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.front() < 1) throw std::invalid_argument("eqstr: n >= 1 required");
  const int n_max = n_list.back();
  const std::int64_t T = opts.trials;
  const std::size_t NL = n_list.size();

  // per n: reach of the growing interval, in lattice units, both conventions
  std::vector<double> f_of_n(NL), thr_card(NL), thr_chern(NL);
  std::vector<std::vector<int>> target_strict(NL), target_le(NL);
  for (std::size_t i = 0; i < NL; ++i) {
    double f = 2.0 * (opts.k + opts.beta * n_list[i]);
    f_of_n[i] = f;
    long long fe = floor_even(f);
    if (fe < 0) fe = 0;
    target_strict[i] = even_interval(static_cast<int>(fe));
    target_le[i] = even_interval(static_cast<int>(floor_even_le(f)));
    thr_card[i] = opts.rho * opts.p * (static_cast<double>(fe) + 1.0);
    thr_chern[i] = opts.p * (static_cast<double>(fe) + 1.0);
  }

  SiteKernel kernel = make_kernel("independent", opts.eps);
  ProcessParams PA;  // product start, observed out to the widest target
  PA.kernel = kernel;
  PA.init = ProductInit{opts.p};
  PA.horizon = 2 * n_max;
  PA.observe_halfwidth = static_cast<int>(std::ceil(f_of_n[NL - 1])) + 2;
  PA.checkpoints.push_back(0);
  for (int n : n_list) PA.checkpoints.push_back(2 * n);

  ProcessParams PK;  // interval start for the survival reference
  PK.kernel = kernel;
  PK.init = opts.k == 0 ? InitialKind{Singleton{}} : InitialKind{IntervalInit{opts.k}};
  PK.horizon = 2 * n_max;

  std::vector<int> K_sites = even_interval(2 * opts.k);
  enum Flag { f_card = 0, f_card_le, f_hit, f_chern, f_theta, kFlagCount };
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(T) * NL * kFlagCount, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats A = run_process(PA, opts.seed, static_cast<std::uint64_t>(t));
    // independent trials for the survival reference
    TrajectoryStats Kj = run_process(PK, opts.seed, static_cast<std::uint64_t>(T + t));
    for (std::size_t i = 0; i < NL; ++i) {
      auto* slot = &flags[(static_cast<std::size_t>(t) * NL + i) * kFlagCount];
      int n2 = 2 * n_list[i];
      slot[f_card] = count_on(A, n2, target_strict[i]) >= thr_card[i] - kEventSlack ? 1 : 0;
      slot[f_card_le] = count_on(A, n2, target_le[i]) >= thr_card[i] - kEventSlack ? 1 : 0;
      slot[f_hit] = count_on(A, n2, K_sites) > 0 ? 1 : 0;
      slot[f_chern] = count_on(A, 0, target_strict[i]) < thr_chern[i] - kEventSlack ? 1 : 0;
      slot[f_theta] = Kj.alive_at(n2) ? 1 : 0;
    }
  });

  std::string params = join_params({key_val("eps", opts.eps), key_val("p", opts.p),
                                    key_val("k", opts.k), key_val("beta", opts.beta),
                                    key_val("rho", opts.rho)});
  ExperimentResult out;
  out.summary = base_summary("eqstr", opts);
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["p"] = opts.p;
  out.summary["parameters"]["k"] = opts.k;
  out.summary["parameters"]["beta"] = opts.beta;
  out.summary["parameters"]["rho"] = opts.rho;
  auto records = nlohmann::ordered_json::array();
  std::vector<double> fit_x, fit_d, fit_t;
  for (std::size_t i = 0; i < NL; ++i) {
    std::int64_t c_card = 0, c_le = 0, c_hit = 0, c_ch = 0, c_th = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      auto* slot = &flags[(static_cast<std::size_t>(t) * NL + i) * kFlagCount];
      c_card += slot[f_card];
      c_le += slot[f_card_le];
      c_hit += slot[f_hit];
      c_ch += slot[f_chern];
      c_th += slot[f_theta];
    }
    auto frac = [&](std::int64_t c) { return static_cast<double>(c) / static_cast<double>(T); };
    double lhs = frac(c_card), theta_hat = frac(c_th);
    double deficit = std::max(0.0, theta_hat - lhs);
    int n = n_list[i];
    out.rows.push_back(make_row("eqstr_lhs", params, n, lhs, clopper_pearson(c_card, T, opts.conf), T, 0));
    out.rows.push_back(make_row("eqstr_theta", params, n, theta_hat, clopper_pearson(c_th, T, opts.conf), T, 0));
    out.rows.push_back(make_row("eqstr_hit", params, n, frac(c_hit), clopper_pearson(c_hit, T, opts.conf), T, 0));
    out.rows.push_back(make_row("eqstr_chernoff", params, n, frac(c_ch), clopper_pearson(c_ch, T, opts.conf), T, 0));
    nlohmann::ordered_json rec;
    rec["n"] = n;
    rec["level"] = 2 * n;
    rec["threshold"] = thr_card[i];
    rec["target_reach_strict"] = target_strict[i].empty() ? 0 : target_strict[i].back();
    rec["target_reach_le"] = target_le[i].empty() ? 0 : target_le[i].back();
    rec["lhs_hat"] = lhs;
    rec["lhs_hat_le"] = frac(c_le);
    rec["theta_hat"] = theta_hat;
    rec["deficit"] = deficit;
    rec["hit_hat"] = frac(c_hit);
    rec["chernoff_hat"] = frac(c_ch);
    records.push_back(rec);
    if (deficit > 0.0) {
      fit_x.push_back(n);
      fit_d.push_back(deficit);
      fit_t.push_back(static_cast<double>(T));
    }
  }
  out.summary["records"] = records;
  // heuristic weights: the deficit is a difference of estimates, treated here
  // like a probability of the same order for weighting purposes
  out.summary["deficit_tail_fit_in_n"] = tail_fit_json(fit_exponential_tail(fit_x, fit_d, fit_t));
  return out;
}

ExperimentResult corollary2_sweep(const Corollary2Opts& opts) {
  require_trials(opts);
  if (opts.eps_list.empty()) throw std::invalid_argument("corollary2: eps list empty");
  for (std::size_t i = 1; i < opts.eps_list.size(); ++i) {
    if (opts.eps_list[i] >= opts.eps_list[i - 1])
      throw std::invalid_argument("corollary2: eps list must decrease");
  }
  if (!(opts.p > 0.0 && opts.p <= 1.0)) throw std::invalid_argument("corollary2: p in (0, 1] required");
  if (opts.k < 0 || opts.n_eval < 1) throw std::invalid_argument("corollary2: k >= 0, n_eval >= 1");

  const std::int64_t T = opts.trials;
  const std::size_t E = opts.eps_list.size();
  const int level = 2 * opts.n_eval;
  std::vector<int> K_sites = even_interval(2 * opts.k);

  // shared designations across eps: a hit at some eps implies a hit at every
  // smaller eps, so scan from the largest
  std::vector<std::uint8_t> hits(static_cast<std::size_t>(T) * E, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    for (std::size_t i = 0; i < E; ++i) {
      ProcessParams P;
      P.kernel = make_kernel("independent", opts.eps_list[i]);
      P.init = ProductInit{opts.p};
      P.horizon = level;
      P.observe_halfwidth = 2 * opts.k + 2;
      P.checkpoints = {level};
      TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
      if (count_on(traj, level, K_sites) > 0) {
        for (std::size_t j = i; j < E; ++j)
          hits[static_cast<std::size_t>(t) * E + j] = 1;
        break;
      }
    }
  });

  ExperimentResult out;
  out.summary = base_summary("corollary2", opts);
  out.summary["parameters"]["k"] = opts.k;
  out.summary["parameters"]["p"] = opts.p;
  out.summary["parameters"]["n_eval"] = opts.n_eval;
  out.summary["parameters"]["level"] = level;
  auto pts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < E; ++i) {
    std::int64_t h = 0;
    for (std::int64_t t = 0; t < T; ++t) h += hits[static_cast<std::size_t>(t) * E + i];
    double est = static_cast<double>(h) / static_cast<double>(T);
    BinomialCi ci = clopper_pearson(h, T, opts.conf);
    std::string params = join_params({key_val("k", opts.k), key_val("p", opts.p),
                                      key_val("n_eval", opts.n_eval)});
    out.rows.push_back(make_row("corollary2", params, opts.eps_list[i], est, ci, T, 0));
    nlohmann::ordered_json pt = ci_json(est, ci, T, "clopper_pearson");
    pt["eps"] = opts.eps_list[i];
    pts.push_back(pt);
  }
  out.summary["sweep"] = pts;
  return out;
}

SubsetSpec parse_subset_spec(const std::string& text) {
  SubsetSpec s;
  if (text == "cone") {
    s.kind = SubsetSpec::Kind::cone;
    return s;
  }
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "random") {
    s.kind = SubsetSpec::Kind::random;
    s.q = std::stod(arg);
    if (!(s.q > 0.0 && s.q <= 1.0)) throw std::invalid_argument("subset: q in (0, 1] required");
    return s;
  }
  if (head == "centered") {
    s.kind = SubsetSpec::Kind::centered;
    s.m = std::stoi(arg);
    if (s.m < 1) throw std::invalid_argument("subset: m >= 1 required");
    return s;
  }
  throw std::invalid_argument("subset: expected cone, random:q, or centered:m");
}

std::string subset_spec_name(const SubsetSpec& s) {
  switch (s.kind) {
    case SubsetSpec::Kind::cone:
      return "cone";
    case SubsetSpec::Kind::random:
      return "random:" + format_double(s.q);
    case SubsetSpec::Kind::centered:
      return "centered:" + std::to_string(s.m);
  }
  return "cone";
}

ExperimentResult experiment_prop3(const Prop3Opts& opts) {
  require_trials(opts);
  if (!(opts.beta > 0.0 && opts.beta < 1.0) || !(opts.rho > 0.0 && opts.rho < 1.0))
    throw std::invalid_argument("prop3: beta, rho in (0, 1) required");
  if (opts.n_list.empty()) throw std::invalid_argument("prop3: n list empty");

  std::vector<int> n_list = opts.n_list;
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.front() < 2) throw std::invalid_argument("prop3: n >= 2 required");
  const int horizon = std::max(n_list.back(), opts.n_fix);
  const std::int64_t T = opts.trials;
  const std::size_t NL = n_list.size();
  const std::size_t ML = opts.m_list.size();

  // subsets are fixed before any trial runs; the random family draws from a
  // dedicated stream so "any subset" is probed reproducibly
  RandomSource subset_src(opts.seed, kSubsetStream);
  auto subset_at = [&](int n) {
    LevelSet cone = cone_sites(n, opts.beta);
    std::vector<int> S;
    switch (opts.subset.kind) {
      case SubsetSpec::Kind::cone:
        S = cone.sites();
        break;
      case SubsetSpec::Kind::random:
        for (int y : cone.sites()) {
          if (subset_src.uniform_at({y, n}, Channel::subset) < opts.subset.q) S.push_back(y);
        }
        break;
      case SubsetSpec::Kind::centered:
        S = centered_sites(n, std::min(opts.subset.m, cone.count())).sites();
        break;
    }
    return S;
  };
  std::vector<std::vector<int>> S_n(NL);
  for (std::size_t i = 0; i < NL; ++i) {
    S_n[i] = subset_at(n_list[i]);
    if (S_n[i].empty()) throw std::invalid_argument("prop3: empty subset at n=" + std::to_string(n_list[i]));
  }
  std::vector<std::vector<int>> S_m(ML);
  for (std::size_t j = 0; j < ML; ++j) {
    if (opts.m_list[j] < 1) throw std::invalid_argument("prop3: m >= 1 required");
    S_m[j] = centered_sites(opts.n_fix, opts.m_list[j]).sites();
  }

  ProcessParams P;
  P.kernel = make_kernel("independent", opts.eps);
  P.init = Singleton{};
  P.horizon = horizon;
  P.checkpoints = n_list;
  P.checkpoints.push_back(opts.n_fix);

  // flags per trial: [alive_n, fail_n] per n then [alive_fix, fail_m...]
  const std::size_t W = NL * 2 + 1 + ML;
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(T) * W, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
    auto* slot = &flags[static_cast<std::size_t>(t) * W];
    for (std::size_t i = 0; i < NL; ++i) {
      bool alive = traj.alive_at(n_list[i]);
      slot[2 * i] = alive ? 1 : 0;
      if (alive) {
        double density = static_cast<double>(count_on(traj, n_list[i], S_n[i])) /
                         static_cast<double>(S_n[i].size());
        slot[2 * i + 1] = density < opts.rho - kEventSlack ? 1 : 0;
      }
    }
    bool alive_fix = traj.alive_at(opts.n_fix);
    slot[2 * NL] = alive_fix ? 1 : 0;
    if (alive_fix) {
      for (std::size_t j = 0; j < ML; ++j) {
        double density = static_cast<double>(count_on(traj, opts.n_fix, S_m[j])) /
                         static_cast<double>(S_m[j].size());
        slot[2 * NL + 1 + j] = density < opts.rho - kEventSlack ? 1 : 0;
      }
    }
  });

  std::string base_params =
      join_params({key_val("eps", opts.eps), key_val("beta", opts.beta), key_val("rho", opts.rho),
                   key_val("subset", subset_spec_name(opts.subset))});
  ExperimentResult out;
  out.summary = base_summary("prop3", opts);
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["beta"] = opts.beta;
  out.summary["parameters"]["rho"] = opts.rho;
  out.summary["parameters"]["subset"] = subset_spec_name(opts.subset);
  out.summary["parameters"]["n_fix"] = opts.n_fix;

  auto emit = [&](const char* tag, const std::string& params, double x, std::int64_t fail,
                  std::int64_t surv, std::int64_t total, nlohmann::ordered_json& arr,
                  std::vector<double>& fx, std::vector<double>& fp, std::vector<double>& ft) {
    nlohmann::ordered_json rec;
    rec["x"] = x;
    rec["survivors"] = surv;
    if (surv == 0) {
      double nan = std::numeric_limits<double>::quiet_NaN();
      out.rows.push_back(make_row(tag, params, x, nan, BinomialCi{nan, nan}, 0, total));
      rec["status"] = "undefined";
    } else {
      double est = static_cast<double>(fail) / static_cast<double>(surv);
      BinomialCi ci = conditional_ratio_ci(fail, surv, opts.conf);
      out.rows.push_back(make_row(tag, params, x, est, ci, surv, total - surv));
      rec["status"] = "ok";
      rec["estimate"] = est;
      rec["ci_lo"] = ci.lo;
      rec["ci_hi"] = ci.hi;
      rec["method"] = "delta";
      if (est > 0.0 && est < 1.0) {
        fx.push_back(x);
        fp.push_back(est);
        ft.push_back(static_cast<double>(surv));
      }
    }
    arr.push_back(rec);
  };

  auto by_n = nlohmann::ordered_json::array();
  std::vector<double> nx, np, nt;
  for (std::size_t i = 0; i < NL; ++i) {
    std::int64_t surv = 0, fail = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      auto* slot = &flags[static_cast<std::size_t>(t) * W];
      surv += slot[2 * i];
      fail += slot[2 * i + 1];
    }
    std::string params = base_params + ";" + key_val("size", static_cast<int>(S_n[i].size()));
    emit("prop3_n", params, n_list[i], fail, surv, T, by_n, nx, np, nt);
  }
  auto by_m = nlohmann::ordered_json::array();
  std::vector<double> mx, mp, mt;
  for (std::size_t j = 0; j < ML; ++j) {
    std::int64_t surv = 0, fail = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      auto* slot = &flags[static_cast<std::size_t>(t) * W];
      surv += slot[2 * NL];
      fail += slot[2 * NL + 1 + j];
    }
    std::string params = base_params + ";" + key_val("n_fix", opts.n_fix);
    emit("prop3_size", params, opts.m_list[j], fail, surv, T, by_m, mx, mp, mt);
  }
  out.summary["by_n"] = by_n;
  out.summary["by_size"] = by_m;
  out.summary["tail_fit_in_n"] = tail_fit_json(fit_exponential_tail(nx, np, nt));
  out.summary["tail_fit_in_size"] = tail_fit_json(fit_exponential_tail(mx, mp, mt));
  return out;
}

ExperimentResult experiment_edge_speed(const EdgeSpeedOpts& opts) {
  require_trials(opts);
  if (opts.n_list.empty()) throw std::invalid_argument("edgespeed: n list empty");
  for (double a : opts.a_list) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("edgespeed: a in (0, 1) required");
  }
  std::vector<int> n_list = opts.n_list;
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.front() < 1) throw std::invalid_argument("edgespeed: n >= 1 required");
  const int horizon = n_list.back();
  const bool bond = opts.mode == ProcessMode::bond;
  std::vector<double> sweep = bond ? opts.p_list : std::vector<double>{opts.eps};
  if (sweep.empty()) throw std::invalid_argument("edgespeed: p list empty");
  const std::int64_t T = opts.trials;
  const std::size_t PN = sweep.size();
  const std::size_t NL = n_list.size();

  struct Edge {
    std::int32_t r;
    std::uint8_t censored;
  };
  std::vector<Edge> edges(static_cast<std::size_t>(T) * PN * NL);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    for (std::size_t pi = 0; pi < PN; ++pi) {
      ProcessParams P;
      P.mode = opts.mode;
      if (bond) {
        P.bond_p = sweep[pi];
      } else {
        P.kernel = make_kernel("independent", sweep[pi]);
      }
      P.init = HalfLineInit{};
      P.horizon = horizon;
      TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
      for (std::size_t i = 0; i < NL; ++i) {
        Edge& e = edges[(static_cast<std::size_t>(t) * PN + pi) * NL + i];
        e.r = traj.r[n_list[i]];
        e.censored = traj.edge_censored[n_list[i]] || traj.r[n_list[i]] == kNoEdge ? 1 : 0;
      }
    }
  });

  const char* sweep_key = bond ? "p" : "eps";
  ExperimentResult out;
  out.summary = base_summary("edgespeed", opts);
  out.summary["parameters"]["mode"] = bond ? "bond" : "site";
  out.summary["parameters"]["n_ref"] = horizon;
  auto alphas = nlohmann::ordered_json::array();
  auto fits = nlohmann::ordered_json::array();
  for (std::size_t pi = 0; pi < PN; ++pi) {
    std::string params = join_params(
        {key_val("mode", std::string(bond ? "bond" : "site")), key_val(sweep_key, sweep[pi])});
    // speed at the deepest level
    std::vector<double> ratios;
    std::int64_t censored_ref = 0;
    for (std::int64_t t = 0; t < T; ++t) {
      const Edge& e = edges[(static_cast<std::size_t>(t) * PN + pi) * NL + (NL - 1)];
      if (e.censored) {
        ++censored_ref;
      } else {
        ratios.push_back(static_cast<double>(e.r) / static_cast<double>(horizon));
      }
    }
    if (ratios.empty())
      throw std::runtime_error("edgespeed: every trial censored at " + key_val(sweep_key, sweep[pi]));
    MeanCi alpha = mean_ci_normal(ratios, opts.conf);
    out.rows.push_back(make_row("edgespeed_alpha", params, sweep[pi], alpha.mean,
                                BinomialCi{alpha.lo, alpha.hi},
                                static_cast<std::int64_t>(ratios.size()), censored_ref));
    nlohmann::ordered_json aj;
    aj[sweep_key] = sweep[pi];
    aj["alpha_hat"] = alpha.mean;
    aj["ci_lo"] = alpha.lo;
    aj["ci_hi"] = alpha.hi;
    aj["samples"] = ratios.size();
    aj["censored"] = censored_ref;
    alphas.push_back(aj);

    for (double a : opts.a_list) {
      std::vector<double> fx, fp, ft;
      for (std::size_t i = 0; i < NL; ++i) {
        std::int64_t below = 0, used = 0, cens = 0;
        for (std::int64_t t = 0; t < T; ++t) {
          const Edge& e = edges[(static_cast<std::size_t>(t) * PN + pi) * NL + i];
          if (e.censored) {
            ++cens;
            continue;
          }
          ++used;
          if (static_cast<double>(e.r) < a * n_list[i] - kEventSlack) ++below;
        }
        std::string tp = params + ";" + key_val("a", a);
        if (used == 0) throw std::runtime_error("edgespeed: every trial censored in tail at n=" +
                                                std::to_string(n_list[i]));
        double est = static_cast<double>(below) / static_cast<double>(used);
        out.rows.push_back(make_row("edgespeed_tail", tp, n_list[i], est,
                                    clopper_pearson(below, used, opts.conf), used, cens));
        if (est > 0.0 && est < 1.0) {
          fx.push_back(n_list[i]);
          fp.push_back(est);
          ft.push_back(static_cast<double>(used));
        }
      }
      nlohmann::ordered_json fj;
      fj[sweep_key] = sweep[pi];
      fj["a"] = a;
      fj["tail_fit_in_n"] = tail_fit_json(fit_exponential_tail(fx, fp, ft));
      fits.push_back(fj);
    }
  }
  out.summary["alpha"] = alphas;
  out.summary["tail_fits"] = fits;
  return out;
}

ExperimentResult experiment_prop4f(const Prop4fOpts& opts) {
  require_trials(opts);
  if (!(opts.p > 0.0 && opts.p <= 1.0)) throw std::invalid_argument("prop4f: p in (0, 1] required");
  if (!(opts.p_prime >= 0.0 && opts.p_prime < opts.p))
    throw std::invalid_argument("prop4f: p_prime in [0, p) required");
  if (opts.n < 1 || opts.n_second < 1) throw std::invalid_argument("prop4f: n >= 1 required");
  if (opts.s_sizes.empty()) throw std::invalid_argument("prop4f: size list empty");
  for (int m : opts.s_sizes) {
    if (m < 1) throw std::invalid_argument("prop4f: sizes >= 1 required");
  }

  std::vector<int> levels = {opts.n, opts.n_second};
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const int horizon = levels.back();
  const std::int64_t T = opts.trials;
  const std::size_t LN = levels.size();
  const std::size_t MS = opts.s_sizes.size();
  const int m_max = *std::max_element(opts.s_sizes.begin(), opts.s_sizes.end());

  std::vector<std::vector<std::vector<int>>> S(LN, std::vector<std::vector<int>>(MS));
  for (std::size_t li = 0; li < LN; ++li) {
    for (std::size_t mi = 0; mi < MS; ++mi)
      S[li][mi] = centered_sites(levels[li], opts.s_sizes[mi]).sites();
  }

  ProcessParams P;
  P.mode = ProcessMode::bond;
  P.bond_p = opts.p;
  P.init = FullLineInit{};
  P.horizon = horizon;
  P.observe_halfwidth = m_max + 2;
  P.checkpoints = levels;

  std::vector<std::uint8_t> below(static_cast<std::size_t>(T) * LN * MS, 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(P, opts.seed, static_cast<std::uint64_t>(t));
    for (std::size_t li = 0; li < LN; ++li) {
      for (std::size_t mi = 0; mi < MS; ++mi) {
        int c = count_on(traj, levels[li], S[li][mi]);
        double thr = opts.p_prime * static_cast<double>(opts.s_sizes[mi]);
        below[(static_cast<std::size_t>(t) * LN + li) * MS + mi] =
            static_cast<double>(c) < thr - kEventSlack ? 1 : 0;
      }
    }
  });

  ExperimentResult out;
  out.summary = base_summary("prop4f", opts);
  out.summary["parameters"]["p"] = opts.p;
  out.summary["parameters"]["p_prime"] = opts.p_prime;
  out.summary["parameters"]["n"] = opts.n;
  out.summary["parameters"]["n_second"] = opts.n_second;
  auto fits = nlohmann::ordered_json::array();
  auto table = nlohmann::ordered_json::array();
  for (std::size_t li = 0; li < LN; ++li) {
    std::string params = join_params({key_val("p", opts.p), key_val("p_prime", opts.p_prime),
                                      key_val("n", levels[li])});
    std::vector<double> fx, fp, ft;
    for (std::size_t mi = 0; mi < MS; ++mi) {
      std::int64_t b = 0;
      for (std::int64_t t = 0; t < T; ++t)
        b += below[(static_cast<std::size_t>(t) * LN + li) * MS + mi];
      double est = static_cast<double>(b) / static_cast<double>(T);
      BinomialCi ci = clopper_pearson(b, T, opts.conf);
      out.rows.push_back(make_row("prop4f", params, opts.s_sizes[mi], est, ci, T, 0));
      nlohmann::ordered_json rec = ci_json(est, ci, T, "clopper_pearson");
      rec["n"] = levels[li];
      rec["size"] = opts.s_sizes[mi];
      table.push_back(rec);
      if (est > 0.0 && est < 1.0) {
        fx.push_back(opts.s_sizes[mi]);
        fp.push_back(est);
        ft.push_back(static_cast<double>(T));
      }
    }
    nlohmann::ordered_json fj;
    fj["n"] = levels[li];
    fj["tail_fit_in_size"] = tail_fit_json(fit_exponential_tail(fx, fp, ft));
    fits.push_back(fj);
  }
  out.summary["table"] = table;
  out.summary["tail_fits"] = fits;
  return out;
}

ExperimentResult duality_check_mc(const DualityMcOpts& opts) {
  require_trials(opts);
  if (!(opts.eps >= 0.0 && opts.eps <= 1.0) || !(opts.p >= 0.0 && opts.p <= 1.0))
    throw std::invalid_argument("duality: eps, p in [0, 1] required");
  if (opts.k < 0 || opts.n < 0) throw std::invalid_argument("duality: k, n >= 0 required");

  const std::int64_t T = opts.trials;
  const int level = 2 * opts.n;
  const int ncol = 2 * opts.k + 1;
  std::vector<int> K_sites = even_interval(2 * opts.k);
  SiteKernel kernel = make_kernel("independent", opts.eps);

  // side one: product start, count the survivors inside the interval
  ProcessParams PA;
  PA.kernel = kernel;
  PA.init = ProductInit{opts.p};
  PA.horizon = level;
  PA.observe_halfwidth = 2 * opts.k + 2;
  PA.checkpoints = {level};

  std::vector<std::uint8_t> side_a(static_cast<std::size_t>(T), 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    TrajectoryStats traj = run_process(PA, opts.seed, static_cast<std::uint64_t>(t));
    side_a[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(count_on(traj, level, K_sites));
  });

  // side two: every interval site grows its own cluster on one shared field
  // (disjoint streams from side one), thinned by an independent product at
  // the top level
  const std::uint64_t thr_p = threshold53(opts.p);
  std::vector<std::uint8_t> side_b(static_cast<std::size_t>(T), 0);
  parallel_trials(T, opts.workers, [&](std::int64_t t) {
    RandomSource src(opts.seed, static_cast<std::uint64_t>(T + t));
    int reached = 0;
    for (int y0 : K_sites) {
      LevelSet cur(0, y0, y0);
      cur.set(y0);
      for (int n = 0; n < level && cur.any(); ++n)
        cur = site_step(cur, kernel, src, EdgePolicy::grow, EdgePolicy::grow);
      if (level == 0 || cur.any()) {
        for (int z : cur.sites()) {
          if (src.raw53(z, level, Channel::init_occupancy) < thr_p) {
            ++reached;
            break;
          }
        }
      }
    }
    side_b[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(reached);
  });

  std::vector<double> sa(side_a.begin(), side_a.end());
  std::vector<double> sb(side_b.begin(), side_b.end());
  KsResult ks = ks_two_sample(sa, sb, opts.permutations, opts.seed ^ 0x6b73u);

  std::string params = join_params({key_val("eps", opts.eps), key_val("p", opts.p),
                                    key_val("k", opts.k), key_val("n", opts.n)});
  ExperimentResult out;
  out.summary = base_summary("duality", opts);
  out.summary["parameters"]["eps"] = opts.eps;
  out.summary["parameters"]["p"] = opts.p;
  out.summary["parameters"]["k"] = opts.k;
  out.summary["parameters"]["n"] = opts.n;
  out.summary["parameters"]["level"] = level;
  for (int side = 0; side < 2; ++side) {
    const auto& counts = side == 0 ? side_a : side_b;
    const char* tag = side == 0 ? "duality_product_start" : "duality_interval_start";
    for (int c = 0; c <= ncol; ++c) {
      std::int64_t hits = 0;
      for (std::int64_t t = 0; t < T; ++t) {
        if (counts[static_cast<std::size_t>(t)] == c) ++hits;
      }
      double est = static_cast<double>(hits) / static_cast<double>(T);
      out.rows.push_back(
          make_row(tag, params, c, est, clopper_pearson(hits, T, opts.conf), T, 0));
    }
  }
  out.summary["ks"]["statistic"] = ks.statistic;
  out.summary["ks"]["p_value"] = ks.p_value;
  out.summary["ks"]["permutations"] = ks.permutations;

  OracleLimits lim;
  bool oracle_feasible = 2 * opts.k + level + 1 <= lim.max_width && ncol <= 8;
  if (oracle_feasible) {
    DualityResult ex = exact_duality_check(kernel, opts.p, opts.k, opts.n, lim);
    out.summary["oracle"]["sup_distance"] = ex.sup_distance;
    out.summary["oracle"]["pmf_product_start"] = ex.count_from_product;
    out.summary["oracle"]["pmf_interval_start"] = ex.count_from_interval;
  } else {
    out.summary["oracle"] = nullptr;
  }
  return out;
}

}  // namespace operc
