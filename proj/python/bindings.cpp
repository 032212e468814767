// Python bindings: exact oracles, single trajectories, the experiment
// drivers, and the invariant self-test.  Option dictionaries mirror the CLI
// flags (snake_case keys); unknown keys are rejected so typos cannot pass
// silently, matching the command-line config behaviour.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "operc/engine.hpp"
#include "operc/estimators.hpp"
#include "operc/invariants.hpp"
#include "operc/kernels.hpp"
#include "operc/lattice.hpp"
#include "operc/oracle.hpp"
#include "operc/report.hpp"

namespace py = pybind11;

namespace {

py::object json_to_py(const nlohmann::ordered_json& j) {
  using value_t = nlohmann::ordered_json::value_t;
  switch (j.type()) {
    case value_t::null:
      return py::none();
    case value_t::boolean:
      return py::bool_(j.get<bool>());
    case value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case value_t::number_float:
      return py::float_(j.get<double>());
    case value_t::string:
      return py::str(j.get<std::string>());
    case value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it)
        out[py::str(it.key())] = json_to_py(it.value());
      return out;
    }
    default:
      return py::none();
  }
}

py::dict row_to_py(const operc::Row& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["params"] = r.params;
  d["x"] = r.x;
  d["estimate"] = r.estimate;
  d["ci_lo"] = r.ci_lo;
  d["ci_hi"] = r.ci_hi;
  d["trials"] = r.trials;
  d["censored_count"] = r.censored_count;
  return d;
}

py::dict result_to_py(const operc::ExperimentResult& res) {
  py::list rows;
  for (const operc::Row& r : res.rows) rows.append(row_to_py(r));
  py::dict out;
  out["rows"] = rows;
  out["summary"] = json_to_py(res.summary);
  return out;
}

// Reads typed values out of an options dict and rejects leftovers.
class OptReader {
 public:
  explicit OptReader(const py::dict& d) : d_(d) {}

  template <class T>
  void opt(const char* key, T& slot) {
    if (!d_.contains(key)) return;
    slot = d_[key].cast<T>();
    used_.insert(key);
  }

  void opt_init(const char* key, operc::InitialKind& slot) {
    if (!d_.contains(key)) return;
    slot = operc::parse_initial(d_[key].cast<std::string>());
    used_.insert(key);
  }

  void opt_subset(const char* key, operc::SubsetSpec& slot) {
    if (!d_.contains(key)) return;
    slot = operc::parse_subset_spec(d_[key].cast<std::string>());
    used_.insert(key);
  }

  void opt_mode(const char* key, operc::ProcessMode& slot) {
    if (!d_.contains(key)) return;
    std::string text = d_[key].cast<std::string>();
    if (text == "site")
      slot = operc::ProcessMode::site;
    else if (text == "bond")
      slot = operc::ProcessMode::bond;
    else
      throw std::invalid_argument("mode: expected 'site' or 'bond'");
    used_.insert(key);
  }

  void finish(const char* what) const {
    std::vector<std::string> unknown;
    for (const auto& item : d_) {
      std::string key = py::str(item.first).cast<std::string>();
      if (used_.find(key) == used_.end()) unknown.push_back(key);
    }
    if (unknown.empty()) return;
    std::string msg = std::string(what) + ": unknown option(s):";
    std::sort(unknown.begin(), unknown.end());
    for (const std::string& k : unknown) msg += " " + k;
    throw std::invalid_argument(msg);
  }

 private:
  const py::dict& d_;
  std::set<std::string> used_;
};

void read_common(OptReader& r, operc::CommonOpts& o) {
  r.opt("trials", o.trials);
  r.opt("conf", o.conf);
  r.opt("seed", o.seed);
  r.opt("workers", o.workers);
}

operc::ProcessParams read_process_params(OptReader& r) {
  operc::ProcessParams P;
  double eps = 0.1;
  std::string kernel = "independent";
  r.opt_mode("mode", P.mode);
  r.opt("eps", eps);
  r.opt("kernel", kernel);
  P.kernel = operc::make_kernel(kernel, eps);
  r.opt("bond_p", P.bond_p);
  r.opt_init("init", P.init);
  r.opt("horizon", P.horizon);
  r.opt("observe_halfwidth", P.observe_halfwidth);
  r.opt("checkpoints", P.checkpoints);
  r.opt("include_reached_closed", P.include_reached_closed);
  return P;
}

py::dict run_experiment(const std::string& name, const py::dict& options) {
  OptReader r(options);
  operc::ExperimentResult res;
  if (name == "simulate") {
    operc::SimulateOpts o;
    read_common(r, o);
    o.params = read_process_params(r);
    r.finish("simulate");
    res = operc::run_simulate(o);
  } else if (name == "survival") {
    operc::SurvivalOpts o;
    read_common(r, o);
    r.opt("kernel", o.kernel_id);
    r.opt("eps", o.eps);
    r.opt_init("init", o.init);
    r.opt("levels", o.levels);
    r.opt("horizon", o.horizon);
    r.opt("include_reached_closed", o.include_reached_closed);
    r.finish("survival");
    res = operc::estimate_survival_curve(o);
  } else if (name == "theta") {
    operc::ThetaOpts o;
    read_common(r, o);
    r.opt("kernel", o.kernel_id);
    r.opt("eps", o.eps);
    r.opt("k", o.k);
    r.opt("n_trunc", o.n_trunc);
    r.finish("theta");
    res = operc::estimate_theta(o);
  } else if (name == "eq2") {
    operc::Eq2Opts o;
    read_common(r, o);
    r.opt("kernel", o.kernel_id);
    r.opt("eps", o.eps);
    r.opt("k_list", o.k_list);
    r.opt("n_trunc", o.n_trunc);
    r.opt("min_failures", o.min_failures_for_fit);
    r.finish("eq2");
    res = operc::experiment_eq2(o);
  } else if (name == "eqstr") {
    operc::EqStrOpts o;
    read_common(r, o);
    r.opt("eps", o.eps);
    r.opt("p", o.p);
    r.opt("k", o.k);
    r.opt("beta", o.beta);
    r.opt("rho", o.rho);
    r.opt("n_list", o.n_list);
    r.finish("eqstr");
    res = operc::experiment_eq_str(o);
  } else if (name == "corollary2") {
    operc::Corollary2Opts o;
    read_common(r, o);
    r.opt("eps_list", o.eps_list);
    r.opt("k", o.k);
    r.opt("p", o.p);
    r.opt("n_eval", o.n_eval);
    r.finish("corollary2");
    res = operc::corollary2_sweep(o);
  } else if (name == "prop3") {
    operc::Prop3Opts o;
    read_common(r, o);
    r.opt("eps", o.eps);
    r.opt("beta", o.beta);
    r.opt("rho", o.rho);
    r.opt("n_list", o.n_list);
    r.opt_subset("subset", o.subset);
    r.opt("m_list", o.m_list);
    r.opt("n_fix", o.n_fix);
    r.finish("prop3");
    res = operc::experiment_prop3(o);
  } else if (name == "edgespeed") {
    operc::EdgeSpeedOpts o;
    read_common(r, o);
    r.opt_mode("mode", o.mode);
    r.opt("eps", o.eps);
    r.opt("p_list", o.p_list);
    r.opt("a_list", o.a_list);
    r.opt("n_list", o.n_list);
    r.finish("edgespeed");
    res = operc::experiment_edge_speed(o);
  } else if (name == "prop4f") {
    operc::Prop4fOpts o;
    read_common(r, o);
    r.opt("p", o.p);
    r.opt("p_prime", o.p_prime);
    r.opt("n", o.n);
    r.opt("n_second", o.n_second);
    r.opt("s_sizes", o.s_sizes);
    r.finish("prop4f");
    res = operc::experiment_prop4f(o);
  } else if (name == "duality") {
    operc::DualityMcOpts o;
    read_common(r, o);
    r.opt("eps", o.eps);
    r.opt("p", o.p);
    r.opt("k", o.k);
    r.opt("n", o.n);
    r.opt("permutations", o.permutations);
    r.finish("duality");
    res = operc::duality_check_mc(o);
  } else {
    throw std::invalid_argument("unknown experiment: " + name);
  }
  return result_to_py(res);
}

py::dict run_trial(const py::dict& options) {
  OptReader r(options);
  operc::ProcessParams P = read_process_params(r);
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  r.opt("seed", seed);
  r.opt("stream", stream);
  r.finish("run_trial");

  operc::TrajectoryStats t = operc::run_process(P, seed, stream);
  py::dict out;
  out["horizon"] = t.horizon;
  out["survived_to"] = t.survived_to;
  py::list rs, ls, censored;
  for (std::size_t i = 0; i < t.r.size(); ++i) {
    rs.append(t.r[i] == operc::kNoEdge ? py::object(py::none()) : py::object(py::int_(t.r[i])));
    ls.append(t.l[i] == operc::kNoEdge ? py::object(py::none()) : py::object(py::int_(t.l[i])));
    censored.append(py::bool_(t.edge_censored[i] != 0));
  }
  out["r"] = rs;
  out["l"] = ls;
  out["edge_censored"] = censored;
  py::dict snaps;
  for (const auto& [level, set] : t.snapshots)
    snaps[py::int_(level)] = py::cast(set.sites());
  out["snapshots"] = snaps;
  return out;
}

operc::InitialKind init_from_radius(int k) {
  if (k < 0) throw std::invalid_argument("interval radius must be >= 0");
  if (k == 0) return operc::Singleton{};
  return operc::IntervalInit{k};
}

double py_exact_survival(double eps, int n, int k, const std::string& kernel) {
  return operc::exact_survival(operc::make_kernel(kernel, eps), init_from_radius(k), n);
}

std::vector<double> py_exact_intersection_pmf(double eps, int n, const std::vector<int>& sites,
                                              int k, const std::string& kernel) {
  return operc::exact_intersection_pmf(operc::make_kernel(kernel, eps), init_from_radius(k), n,
                                       sites);
}

py::dict py_exact_duality(double eps, double p, int k, int n, const std::string& kernel) {
  operc::DualityResult d = operc::exact_duality_check(operc::make_kernel(kernel, eps), p, k, n);
  py::dict out;
  out["count_from_product"] = py::cast(d.count_from_product);
  out["count_from_interval"] = py::cast(d.count_from_interval);
  out["sup_distance"] = d.sup_distance;
  return out;
}

py::list py_run_selftest(const py::dict& options) {
  OptReader r(options);
  operc::SelftestOpts o;
  r.opt("seed", o.seed);
  r.opt("trials", o.trials);
  r.opt("horizon", o.horizon);
  r.opt("eps_grid", o.eps_grid);
  r.opt("oracle_trials", o.oracle_trials);
  r.opt("workers", o.workers);
  r.finish("run_selftest");

  py::list out;
  for (const operc::InvariantReport& rep : operc::run_selftest(o)) {
    py::dict d;
    d["name"] = rep.name;
    d["pass"] = rep.pass;
    d["checked"] = rep.checked;
    d["first_failure"] = rep.first_failure;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-dimensional oriented percolation: processes, estimators, exact oracles.";

  m.def("version", [] { return std::string(operc::kVersion); }, "Library version string.");

  m.def("exact_survival", &py_exact_survival, py::arg("eps"), py::arg("n"), py::arg("k") = 0,
        py::arg("kernel") = "independent",
        "Exact survival probability to level n from a radius-k interval "
        "(k=0: single site), by transfer-matrix enumeration.");

  m.def("exact_intersection_pmf", &py_exact_intersection_pmf, py::arg("eps"), py::arg("n"),
        py::arg("sites"), py::arg("k") = 0, py::arg("kernel") = "independent",
        "Exact pmf of |A_n ∩ S| for the listed level-n sites.");

  m.def("exact_duality", &py_exact_duality, py::arg("eps"), py::arg("p"), py::arg("k"),
        py::arg("n"), py::arg("kernel") = "independent",
        "Both count laws of the start/target exchange at level 2n, with their "
        "sup distance (exactly zero up to rounding).");

  m.def("run_trial", &run_trial, py::arg("options") = py::dict(),
        "One trajectory; options: mode, eps, kernel, bond_p, init, horizon, "
        "observe_halfwidth, checkpoints, include_reached_closed, seed, stream.");

  m.def("run_experiment", &run_experiment, py::arg("name"), py::arg("options") = py::dict(),
        "Run a named experiment (simulate, survival, theta, eq2, eqstr, corollary2, "
        "prop3, edgespeed, prop4f, duality) and return {'rows': [...], 'summary': {...}}.");

  m.def("run_selftest", &py_run_selftest, py::arg("options") = py::dict(),
        "Invariant self-test; returns one report dict per check.");
}
