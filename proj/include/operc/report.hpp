#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "operc/stats.hpp"

namespace operc {

inline constexpr const char* kVersion = "0.1.0";

// One CSV record.  The column set is fixed; `params` is a semicolon-joined
// key=value string so rows stay self-describing when files are concatenated.
struct Row {
  std::string experiment;
  std::string params;
  double x = 0.0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t trials = 0;
  std::int64_t censored_count = 0;
};

// Shortest decimal form that round-trips the exact double ('.' separator,
// locale-independent).
std::string format_double(double v);

// 15 decimal places, fixed, for exact-oracle printing.
std::string format_fixed15(double v);

void write_csv(std::ostream& os, const std::vector<Row>& rows);
std::string csv_string(const std::vector<Row>& rows);

// Serialization of a tail fit for the JSON summary.  status is "ok" or
// "below_resolution" (fewer usable points than the fit needs).
nlohmann::ordered_json tail_fit_json(const TailFit& fit);

nlohmann::ordered_json ci_json(double estimate, const BinomialCi& ci, std::int64_t trials,
                               const char* method);

struct ExperimentResult {
  std::vector<Row> rows;
  nlohmann::ordered_json summary;
};

}  // namespace operc
