#pragma once
// Exact-rational survival for the independent kernel, for small widths where
// one wants bit-for-bit certainty instead of long-double error accounting.
// eps is taken at its exact binary value.

#include <boost/multiprecision/cpp_int.hpp>

#include "operc/lattice.hpp"
#include "operc/oracle.hpp"

namespace operc {

boost::multiprecision::cpp_rational exact_survival_exactq(double eps, const InitialKind& init,
                                                          int n, const OracleLimits& lim = {});

}  // namespace operc
