// operc: oriented percolation simulation laboratory.
//
// One subcommand per studied claim; every run is deterministic given the
// config and seed, and CSV/JSON outputs are byte-stable across reruns and
// worker counts.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "operc/estimators.hpp"
#include "operc/invariants.hpp"
#include "operc/kernels.hpp"
#include "operc/oracle.hpp"
#include "operc/oracle_exactq.hpp"
#include "operc/report.hpp"

namespace {

using operc::ExperimentResult;

struct CommonFlags {
  std::int64_t trials = 10000;
  double conf = 0.95;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out_csv;
  std::string out_json;
  bool print_config = false;
};

void add_common(CLI::App* sub, CommonFlags& c, const std::string& name) {
  c.out_csv = name + ".csv";
  c.out_json = name + ".json";
  sub->add_option("--trials", c.trials, "Monte Carlo trials")->capture_default_str();
  sub->add_option("--conf", c.conf, "confidence level")->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--workers", c.workers,
                  "worker threads (0: OPERC_WORKERS env, then hardware)")
      ->capture_default_str();
  sub->add_option("--out-csv", c.out_csv, "row records path")->capture_default_str();
  sub->add_option("--out-json", c.out_json, "summary path")->capture_default_str();
  sub->add_flag("--print-config", c.print_config, "print the resolved config and exit")
      ->configurable(false);
  sub->fallthrough();  // lets --config reach the top-level app
}

void apply_common(const CommonFlags& c, operc::CommonOpts& o) {
  o.trials = c.trials;
  o.conf = c.conf;
  o.seed = c.seed;
  o.workers = c.workers;
}

// Emits the deliverables; the summary also goes to stdout so runs are easy to
// inspect and diff.
int finish(const CommonFlags& c, const ExperimentResult& res) {
  {
    std::ofstream csv(c.out_csv, std::ios::binary);
    if (!csv) {
      std::cerr << "error: cannot write " << c.out_csv << "\n";
      return 3;
    }
    operc::write_csv(csv, res.rows);
  }
  std::string summary = res.summary.dump(2);
  summary += "\n";
  {
    std::ofstream js(c.out_json, std::ios::binary);
    if (!js) {
      std::cerr << "error: cannot write " << c.out_json << "\n";
      return 3;
    }
    js << summary;
  }
  std::cout << summary;
  return 0;
}

// true when the subcommand should stop after printing its resolved config
bool maybe_print_config(CLI::App* sub, const CommonFlags& c) {
  if (!c.print_config) return false;
  std::cout << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
  return true;
}

operc::InitialKind parse_init(const std::string& text) {
  try {
    return operc::parse_initial(text);
  } catch (const std::invalid_argument&) {
    throw CLI::ValidationError(
        "--init", "expected singleton, interval:k, halfline, fullline, or product:p");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oriented percolation simulation laboratory"};
  app.set_version_flag("--version", operc::kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file ([subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  int exit_code = 0;
  auto run_guarded = [&](auto&& fn) {
    try {
      exit_code = fn();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = 2;
    }
  };

  // simulate: generic trajectory runner
  {
    auto* sub = app.add_subcommand("simulate", "run trajectories, report per-level survival");
    auto flags = std::make_shared<CommonFlags>();
    auto mode = std::make_shared<std::string>("site");
    auto kernel = std::make_shared<std::string>("independent");
    auto eps = std::make_shared<double>(0.1);
    auto bond_p = std::make_shared<double>(1.0);
    auto init = std::make_shared<std::string>("singleton");
    auto horizon = std::make_shared<int>(128);
    auto checkpoints = std::make_shared<std::vector<int>>();
    auto halfwidth = std::make_shared<int>(0);
    auto drop_closed = std::make_shared<bool>(false);
    sub->add_option("--mode", *mode, "site or bond")->check(CLI::IsMember({"site", "bond"}))
        ->capture_default_str();
    sub->add_option("--kernel", *kernel, "site kernel id")
        ->check(CLI::IsMember({"independent", "dependent-pair"}))
        ->capture_default_str();
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--bond-p", *bond_p, "bond-open probability")->capture_default_str();
    sub->add_option("--init", *init, "singleton | interval:k | halfline | fullline | product:p")
        ->capture_default_str();
    sub->add_option("--horizon", *horizon, "levels to run")->capture_default_str();
    sub->add_option("--checkpoints", *checkpoints, "levels to report (default: doubling grid)")->delimiter(',');
    sub->add_option("--observe-halfwidth", *halfwidth,
                    "|y| range kept observable at the horizon for infinite starts")
        ->capture_default_str();
    sub->add_flag("--drop-reached-closed", *drop_closed,
                  "report per-level sets with closed sites removed");
    add_common(sub, *flags, "simulate");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::SimulateOpts o;
        apply_common(*flags, o);
        o.params.mode = *mode == "bond" ? operc::ProcessMode::bond : operc::ProcessMode::site;
        o.params.kernel = operc::make_kernel(*kernel, *eps);
        o.params.bond_p = *bond_p;
        o.params.init = parse_init(*init);
        o.params.horizon = *horizon;
        o.params.observe_halfwidth = *halfwidth;
        o.params.checkpoints = *checkpoints;
        o.params.include_reached_closed = !*drop_closed;
        return finish(*flags, operc::run_simulate(o));
      });
    });
  }

  // theta: survival proxy at a truncation level
  {
    auto* sub = app.add_subcommand("theta", "survival probability at a truncation level");
    auto flags = std::make_shared<CommonFlags>();
    auto kernel = std::make_shared<std::string>("independent");
    auto eps = std::make_shared<double>(0.1);
    auto k = std::make_shared<int>(0);
    auto n_trunc = std::make_shared<int>(128);
    sub->add_option("--kernel", *kernel, "site kernel id")
        ->check(CLI::IsMember({"independent", "dependent-pair"}))
        ->capture_default_str();
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--k", *k, "initial interval radius (0: singleton)")->capture_default_str();
    sub->add_option("--n-trunc", *n_trunc, "truncation level")->capture_default_str();
    add_common(sub, *flags, "theta");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::ThetaOpts o;
        apply_common(*flags, o);
        o.kernel_id = *kernel;
        o.eps = *eps;
        o.k = *k;
        o.n_trunc = *n_trunc;
        return finish(*flags, operc::estimate_theta(o));
      });
    });
  }

  // eq2: failure tail in the initial radius
  {
    auto* sub = app.add_subcommand("eq2", "failure probability tail over initial radii");
    auto flags = std::make_shared<CommonFlags>();
    auto kernel = std::make_shared<std::string>("independent");
    auto eps = std::make_shared<double>(0.05);
    auto k_list = std::make_shared<std::vector<int>>(std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    auto n_trunc = std::make_shared<int>(256);
    auto min_failures = std::make_shared<std::int64_t>(10);
    sub->add_option("--kernel", *kernel, "site kernel id")
        ->check(CLI::IsMember({"independent", "dependent-pair"}))
        ->capture_default_str();
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--k-list", *k_list, "increasing initial radii")->delimiter(',');
    sub->add_option("--n-trunc", *n_trunc, "truncation level")->capture_default_str();
    sub->add_option("--min-failures", *min_failures, "fit uses radii with at least this many failures")
        ->capture_default_str();
    add_common(sub, *flags, "eq2");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::Eq2Opts o;
        apply_common(*flags, o);
        o.kernel_id = *kernel;
        o.eps = *eps;
        o.k_list = *k_list;
        o.n_trunc = *n_trunc;
        o.min_failures_for_fit = *min_failures;
        return finish(*flags, operc::experiment_eq2(o));
      });
    });
  }

  // eqstr: cardinality lower bound from a product start
  {
    auto* sub = app.add_subcommand("eqstr", "cardinality bound from a product start");
    auto flags = std::make_shared<CommonFlags>();
    auto eps = std::make_shared<double>(0.01);
    auto p = std::make_shared<double>(0.5);
    auto k = std::make_shared<int>(2);
    auto beta = std::make_shared<double>(0.8);
    auto rho = std::make_shared<double>(0.8);
    auto n_list = std::make_shared<std::vector<int>>(std::vector<int>{8, 16, 32, 64});
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--p", *p, "product density")->capture_default_str();
    sub->add_option("--k", *k, "interval radius")->capture_default_str();
    sub->add_option("--beta", *beta, "target growth rate")->capture_default_str();
    sub->add_option("--rho", *rho, "density factor in the threshold")->capture_default_str();
    sub->add_option("--n-list", *n_list, "evaluation depths (level 2n)")->delimiter(',');
    add_common(sub, *flags, "eqstr");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::EqStrOpts o;
        apply_common(*flags, o);
        o.eps = *eps;
        o.p = *p;
        o.k = *k;
        o.beta = *beta;
        o.rho = *rho;
        o.n_list = *n_list;
        return finish(*flags, operc::experiment_eq_str(o));
      });
    });
  }

  // corollary2: hit probability sweep in eps
  {
    auto* sub = app.add_subcommand("corollary2", "interval hit probability as eps decreases");
    auto flags = std::make_shared<CommonFlags>();
    auto eps_list =
        std::make_shared<std::vector<double>>(std::vector<double>{0.2, 0.1, 0.05, 0.01});
    auto k = std::make_shared<int>(2);
    auto p = std::make_shared<double>(0.5);
    auto n_eval = std::make_shared<int>(128);
    sub->add_option("--eps-list", *eps_list, "decreasing closed-site probabilities")->delimiter(',');
    sub->add_option("--k", *k, "interval radius")->capture_default_str();
    sub->add_option("--p", *p, "product density")->capture_default_str();
    sub->add_option("--n-eval", *n_eval, "evaluation depth (level 2n)")->capture_default_str();
    add_common(sub, *flags, "corollary2");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::Corollary2Opts o;
        apply_common(*flags, o);
        o.eps_list = *eps_list;
        o.k = *k;
        o.p = *p;
        o.n_eval = *n_eval;
        return finish(*flags, operc::corollary2_sweep(o));
      });
    });
  }

  // prop3: conditional density tails
  {
    auto* sub = app.add_subcommand("prop3", "conditional density shortfall over cone subsets");
    auto flags = std::make_shared<CommonFlags>();
    auto eps = std::make_shared<double>(0.01);
    auto beta = std::make_shared<double>(0.9);
    auto rho = std::make_shared<double>(0.9);
    auto n_list = std::make_shared<std::vector<int>>(std::vector<int>{32, 64, 128});
    auto subset = std::make_shared<std::string>("cone");
    auto m_list = std::make_shared<std::vector<int>>(std::vector<int>{8, 16, 32});
    auto n_fix = std::make_shared<int>(64);
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--beta", *beta, "cone slope")->capture_default_str();
    sub->add_option("--rho", *rho, "density threshold")->capture_default_str();
    sub->add_option("--n-list", *n_list, "levels for the depth tail")->delimiter(',');
    sub->add_option("--subset", *subset, "cone | random:q | centered:m")->capture_default_str();
    sub->add_option("--m-list", *m_list, "centered subinterval sizes at the fixed level")->delimiter(',');
    sub->add_option("--n-fix", *n_fix, "level for the size tail")->capture_default_str();
    add_common(sub, *flags, "prop3");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::Prop3Opts o;
        apply_common(*flags, o);
        o.eps = *eps;
        o.beta = *beta;
        o.rho = *rho;
        o.n_list = *n_list;
        o.subset = operc::parse_subset_spec(*subset);
        o.m_list = *m_list;
        o.n_fix = *n_fix;
        return finish(*flags, operc::experiment_prop3(o));
      });
    });
  }

  // edgespeed: right-edge speed of the half-line process
  {
    auto* sub = app.add_subcommand("edgespeed", "right-edge speed from a half-line start");
    auto flags = std::make_shared<CommonFlags>();
    auto mode = std::make_shared<std::string>("bond");
    auto eps = std::make_shared<double>(0.1);
    auto p_list = std::make_shared<std::vector<double>>(std::vector<double>{0.99});
    auto a_list = std::make_shared<std::vector<double>>(std::vector<double>{0.8});
    auto n_list = std::make_shared<std::vector<int>>(std::vector<int>{64, 128, 256});
    sub->add_option("--mode", *mode, "site or bond")->check(CLI::IsMember({"site", "bond"}))
        ->capture_default_str();
    sub->add_option("--epsilon", *eps, "closed-site probability (site mode)")
        ->capture_default_str();
    sub->add_option("--p-list", *p_list, "bond-open probabilities (bond mode)")->delimiter(',');
    sub->add_option("--a-list", *a_list, "speed fractions for the tail events")->delimiter(',');
    sub->add_option("--n-list", *n_list, "levels; the deepest anchors alpha_hat")->delimiter(',');
    add_common(sub, *flags, "edgespeed");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::EdgeSpeedOpts o;
        apply_common(*flags, o);
        o.mode = *mode == "bond" ? operc::ProcessMode::bond : operc::ProcessMode::site;
        o.eps = *eps;
        o.p_list = *p_list;
        o.a_list = *a_list;
        o.n_list = *n_list;
        return finish(*flags, operc::experiment_edge_speed(o));
      });
    });
  }

  // prop4f: full-line bond density tails
  {
    auto* sub = app.add_subcommand("prop4f", "full-line bond process density tails");
    auto flags = std::make_shared<CommonFlags>();
    auto p = std::make_shared<double>(0.9);
    auto p_prime = std::make_shared<double>(0.6);
    auto n = std::make_shared<int>(64);
    auto n_second = std::make_shared<int>(128);
    auto s_sizes = std::make_shared<std::vector<int>>(std::vector<int>{8, 16, 32, 64});
    sub->add_option("--p", *p, "bond-open probability")->capture_default_str();
    sub->add_option("--p-prime", *p_prime, "density threshold factor")->capture_default_str();
    sub->add_option("--n", *n, "evaluation level")->capture_default_str();
    sub->add_option("--n-second", *n_second, "second level for the uniformity check")
        ->capture_default_str();
    sub->add_option("--s-sizes", *s_sizes, "consecutive-site set sizes")->delimiter(',');
    add_common(sub, *flags, "prop4f");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::Prop4fOpts o;
        apply_common(*flags, o);
        o.p = *p;
        o.p_prime = *p_prime;
        o.n = *n;
        o.n_second = *n_second;
        o.s_sizes = *s_sizes;
        return finish(*flags, operc::experiment_prop4f(o));
      });
    });
  }

  // duality: distributional exchange check
  {
    auto* sub = app.add_subcommand("duality", "distributional exchange of start and target");
    auto flags = std::make_shared<CommonFlags>();
    auto eps = std::make_shared<double>(0.1);
    auto p = std::make_shared<double>(0.5);
    auto k = std::make_shared<int>(2);
    auto n = std::make_shared<int>(32);
    auto permutations = std::make_shared<int>(2000);
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--p", *p, "product density")->capture_default_str();
    sub->add_option("--k", *k, "interval radius")->capture_default_str();
    sub->add_option("--n", *n, "depth (level 2n)")->capture_default_str();
    sub->add_option("--permutations", *permutations, "permutations for the KS p-value")
        ->capture_default_str();
    add_common(sub, *flags, "duality");
    sub->callback([=, &exit_code, &run_guarded] {
      if (maybe_print_config(sub, *flags)) return;
      run_guarded([&] {
        operc::DualityMcOpts o;
        apply_common(*flags, o);
        o.eps = *eps;
        o.p = *p;
        o.k = *k;
        o.n = *n;
        o.permutations = *permutations;
        return finish(*flags, operc::duality_check_mc(o));
      });
    });
  }

  // oracle: exact small-instance values
  {
    auto* sub = app.add_subcommand("oracle", "exact small-instance probabilities");
    auto what = std::make_shared<std::string>();
    auto kernel = std::make_shared<std::string>("independent");
    auto eps = std::make_shared<double>(0.5);
    auto p = std::make_shared<double>(0.5);
    auto k = std::make_shared<int>(0);
    auto n = std::make_shared<int>(2);
    auto sites = std::make_shared<std::vector<int>>();
    auto rational = std::make_shared<bool>(false);
    auto print_config = std::make_shared<bool>(false);
    sub->fallthrough();
    sub->add_flag("--print-config", *print_config, "print the resolved config and exit")
        ->configurable(false);
    sub->add_option("what", *what, "survival | pmf | duality")
        ->required()
        ->check(CLI::IsMember({"survival", "pmf", "duality"}));
    sub->add_option("--kernel", *kernel, "site kernel id")
        ->check(CLI::IsMember({"independent", "dependent-pair"}))
        ->capture_default_str();
    sub->add_option("--epsilon", *eps, "closed-site probability")->capture_default_str();
    sub->add_option("--p", *p, "product density (duality)")->capture_default_str();
    sub->add_option("--k", *k, "interval radius")->capture_default_str();
    sub->add_option("--n", *n, "level (survival, pmf) or depth with level 2n (duality)")
        ->capture_default_str();
    sub->add_option("--sites", *sites, "target sites (pmf; default: the level-n centered site)");
    sub->add_flag("--rational", *rational, "survival only: print the exact fraction as well");
    sub->callback([=, &exit_code, &run_guarded] {
      if (*print_config) {
        std::cout << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
        return;
      }
      run_guarded([&]() -> int {
        operc::OracleLimits lim;
        operc::SiteKernel kn = operc::make_kernel(*kernel, *eps);
        operc::InitialKind init =
            *k == 0 ? operc::InitialKind{operc::Singleton{}} : operc::InitialKind{operc::IntervalInit{*k}};
        if (*what == "survival") {
          double v = operc::exact_survival(kn, init, *n, lim);
          std::cout << operc::format_fixed15(v) << "\n";
          if (*rational) {
            if (*kernel != "independent")
              throw std::invalid_argument("rational mode supports the independent kernel only");
            auto q = operc::exact_survival_exactq(*eps, init, *n, lim);
            std::cout << q << "\n";
          }
          return 0;
        }
        if (*what == "pmf") {
          std::vector<int> S = *sites;
          if (S.empty()) S.push_back(*n % 2 == 0 ? 0 : 1);
          auto pmf = operc::exact_intersection_pmf(kn, init, *n, S, lim);
          for (double v : pmf) std::cout << operc::format_fixed15(v) << "\n";
          return 0;
        }
        auto res = operc::exact_duality_check(kn, *p, *k, *n, lim);
        std::cout << "sup_distance " << operc::format_double(res.sup_distance) << "\n";
        for (std::size_t i = 0; i < res.count_from_product.size(); ++i) {
          std::cout << i << " " << operc::format_fixed15(res.count_from_product[i]) << " "
                    << operc::format_fixed15(res.count_from_interval[i]) << "\n";
        }
        return 0;
      });
    });
  }

  // selftest: pathwise invariants and oracle agreement
  {
    auto* sub = app.add_subcommand("selftest", "pathwise invariant and oracle agreement suite");
    auto opts = std::make_shared<operc::SelftestOpts>();
    auto print_config = std::make_shared<bool>(false);
    sub->fallthrough();
    sub->add_flag("--print-config", *print_config, "print the resolved config and exit")
        ->configurable(false);
    sub->add_option("--seed", opts->seed, "master seed")->capture_default_str();
    sub->add_option("--trials", opts->trials, "trials per eps per check")->capture_default_str();
    sub->add_option("--horizon", opts->horizon, "levels per trial")->capture_default_str();
    sub->add_option("--eps-grid", opts->eps_grid, "closed-site probabilities to sweep");
    sub->add_option("--oracle-trials", opts->oracle_trials, "trials per oracle grid point")
        ->capture_default_str();
    sub->add_option("--workers", opts->workers, "worker threads")->capture_default_str();
    sub->add_flag("--inject-fault", opts->inject_fault,
                  "skew one transmission rule (expected to fail; test hook)")
        ->group("");
    sub->callback([=, &exit_code] {
      if (*print_config) {
        std::cout << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
        return;
      }
      auto reports = operc::run_selftest(*opts);
      for (const auto& r : reports) {
        if (r.pass) {
          std::cout << "PASS " << r.name << " (checked " << r.checked << ")\n";
        } else {
          std::cout << "FAIL " << r.name << ": " << r.first_failure << "\n";
        }
      }
      exit_code = operc::all_pass(reports) ? 0 : 1;
    });
  }

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
