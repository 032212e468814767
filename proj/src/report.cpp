#include "operc/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace operc {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_fixed15(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.15f", v);
  return std::string(buf);
}

void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  os << "experiment,params,x,estimate,ci_lo,ci_hi,trials,censored_count\n";
  for (const Row& r : rows) {
    os << r.experiment << ',' << r.params << ',' << format_double(r.x) << ','
       << format_double(r.estimate) << ',' << format_double(r.ci_lo) << ','
       << format_double(r.ci_hi) << ',' << r.trials << ',' << r.censored_count << '\n';
  }
}

std::string csv_string(const std::vector<Row>& rows) {
  std::ostringstream ss;
  write_csv(ss, rows);
  return ss.str();
}

nlohmann::ordered_json tail_fit_json(const TailFit& fit) {
  nlohmann::ordered_json j;
  j["status"] = fit.fitted ? "ok" : "below_resolution";
  j["points_used"] = fit.points_used;
  if (fit.fitted) {
    j["C"] = std::exp(fit.intercept);
    j["gamma"] = fit.rate;
    j["r_squared"] = fit.r2;
    j["decaying"] = fit.rate > 0.0;
  }
  return j;
}

nlohmann::ordered_json ci_json(double estimate, const BinomialCi& ci, std::int64_t trials,
                               const char* method) {
  nlohmann::ordered_json j;
  j["estimate"] = estimate;
  j["ci_lo"] = ci.lo;
  j["ci_hi"] = ci.hi;
  j["trials"] = trials;
  j["method"] = method;
  return j;
}

}  // namespace operc
