// End-to-end checks of the command-line tool, driving the real binary.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the tool with a scratch working directory so output files never clash.
CliResult run_cli(const std::string& args, const std::string& tag) {
  std::string dir = std::string("cli_scratch_") + tag;
  std::string mk = "mkdir -p " + dir;
  REQUIRE(std::system(mk.c_str()) == 0);
  std::string outfile = dir + "/stdout.txt";
  std::string cmd = "cd " + dir + " && " + OPERC_CLI_PATH + " " + args + " > stdout.txt 2>&1";
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(outfile);
  return r;
}

}  // namespace

TEST_CASE("exact values print as fixed 15-digit decimals") {
  auto r = run_cli("oracle survival --epsilon 0.5 --n 2", "oracle_a");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "0.750000000000000\n");
  auto q = run_cli("oracle survival --epsilon 0.5 --n 3 --rational", "oracle_b");
  CHECK(q.exit_code == 0);
  CHECK(q.out == "0.593750000000000\n19/32\n");
}

TEST_CASE("the exchange check reports a zero sup distance") {
  auto r = run_cli("oracle duality --epsilon 0.4 --p 0.6 --k 1 --n 1", "oracle_c");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("sup_distance 0\n", 0) == 0);
}

TEST_CASE("oversized oracle requests fail with a capacity message") {
  auto r = run_cli("oracle survival --epsilon 0.5 --n 40", "oracle_d");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("error:") != std::string::npos);
}

TEST_CASE("two identical runs produce byte-identical files and stdout") {
  const std::string args = "theta --epsilon 0.3 --n-trunc 16 --trials 2000 --seed 5";
  auto a = run_cli(args, "rerun_a");
  auto b = run_cli(args, "rerun_b");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp("cli_scratch_rerun_a/theta.csv") == slurp("cli_scratch_rerun_b/theta.csv"));
  CHECK(slurp("cli_scratch_rerun_a/theta.json") == slurp("cli_scratch_rerun_b/theta.json"));
  CHECK(!slurp("cli_scratch_rerun_a/theta.csv").empty());
}

TEST_CASE("worker counts never leak into the outputs") {
  const std::string args = "eq2 --epsilon 0.3 --k-list 0 1 --n-trunc 16 --trials 1500 --workers 1";
  const std::string args4 =
      "eq2 --epsilon 0.3 --k-list 0 1 --n-trunc 16 --trials 1500 --workers 4";
  auto a = run_cli(args, "w1");
  auto b = run_cli(args4, "w4");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp("cli_scratch_w1/eq2.csv") == slurp("cli_scratch_w4/eq2.csv"));
}

TEST_CASE("the CSV header names the eight record fields") {
  auto r = run_cli("theta --epsilon 0.2 --n-trunc 8 --trials 500", "csvhdr");
  CHECK(r.exit_code == 0);
  std::string csv = slurp("cli_scratch_csvhdr/theta.csv");
  CHECK(csv.rfind("experiment,params,x,estimate,ci_lo,ci_hi,trials,censored_count\n", 0) == 0);
}

TEST_CASE("a printed config reproduces the run byte for byte") {
  auto p = run_cli(
      "eqstr --epsilon 0.05 --n-list 4 8 --k 1 --beta 0.6 --rho 0.7 --trials 800 --seed 3 "
      "--print-config",
      "cfg_print");
  REQUIRE(p.exit_code == 0);
  REQUIRE(std::system("mkdir -p cli_scratch_cfg_run2") == 0);
  std::ofstream ini("cli_scratch_cfg_run2/run.ini", std::ios::binary);
  ini << p.out;
  ini.close();
  auto direct = run_cli(
      "eqstr --epsilon 0.05 --n-list 4 8 --k 1 --beta 0.6 --rho 0.7 --trials 800 --seed 3",
      "cfg_direct");
  auto via = run_cli("eqstr --config run.ini", "cfg_run2");
  CHECK(direct.exit_code == 0);
  CHECK(via.exit_code == 0);
  CHECK(direct.out == via.out);
  CHECK(slurp("cli_scratch_cfg_direct/eqstr.csv") == slurp("cli_scratch_cfg_run2/eqstr.csv"));
  CHECK(slurp("cli_scratch_cfg_direct/eqstr.json") == slurp("cli_scratch_cfg_run2/eqstr.json"));
}

TEST_CASE("unknown config keys are rejected loudly") {
  REQUIRE(std::system("mkdir -p cli_scratch_badcfg") == 0);
  std::ofstream ini("cli_scratch_badcfg/bad.ini", std::ios::binary);
  ini << "[theta]\nepsilon=0.2\nmystery-knob=7\n";
  ini.close();
  auto r = run_cli("theta --config bad.ini", "badcfg");
  CHECK(r.exit_code != 0);
}

TEST_CASE("command-line flags override config values") {
  REQUIRE(std::system("mkdir -p cli_scratch_override") == 0);
  std::ofstream ini("cli_scratch_override/s.ini", std::ios::binary);
  ini << "[theta]\nepsilon=0.2\nn-trunc=8\ntrials=700\nseed=11\n";
  ini.close();
  auto r = run_cli("theta --config s.ini --trials 900", "override");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"trials\": 900") != std::string::npos);
  CHECK(r.out.find("\"seed\": 11") != std::string::npos);
}

TEST_CASE("the invariant suite is wired through the tool") {
  auto r = run_cli("selftest --trials 20 --horizon 12 --oracle-trials 1500", "selftest");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("PASS rng_frozen") != std::string::npos);
  CHECK(r.out.find("PASS determinism") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  auto f = run_cli("selftest --trials 20 --horizon 12 --oracle-trials 1500 --inject-fault",
                   "selftest_fault");
  CHECK(f.exit_code == 1);
  CHECK(f.out.find("FAIL interval_identity") != std::string::npos);
}

TEST_CASE("bad arguments exit nonzero with a complaint") {
  auto r = run_cli("theta --epsilon 1.5 --n-trunc 8 --trials 100", "badeps");
  CHECK(r.exit_code != 0);
  auto s = run_cli("frobnicate", "badsub");
  CHECK(s.exit_code != 0);
}
