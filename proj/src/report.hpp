#pragma once

// Outcome of one numerical inequality check lhs <= rhs.

#include <cstdint>
#include <string>

#include "cuculescu.hpp"

namespace ncgl {

/// How the hypotheses of the checked inequality were established.
enum class HypothesisFlag {
  StrongPass,    // strong testing conditions hold (certificate for all P)
  SampledPass,   // weak testing conditions hold on the sampled projections
  Unverified,    // a hypothesis check failed
  DualityOnly,   // only a duality consistency check is available
  NotApplicable, // the inequality has no hypothesis beyond its construction
};

const char* to_string(HypothesisFlag f);

struct VerifyReport {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  double constant = 0;
  double margin = 0;  // rhs - lhs
  bool pass = true;
  HypothesisFlag flag = HypothesisFlag::NotApplicable;
  std::string meta;
  std::uint64_t seed = 0;
  /// Merged structural defects of every Cuculescu sequence built on the way.
  CuculescuDefects defects;
};

/// 1e-8 (1 + |rhs|).
inline double report_tolerance(double rhs) { return 1e-8 * (1.0 + (rhs < 0 ? -rhs : rhs)); }

/// Report with margin = rhs - lhs and pass iff margin >= -report_tolerance(rhs).
VerifyReport make_report(std::string name, double lhs, double rhs, double constant,
                         std::string meta = {}, std::uint64_t seed = 0);

}  // namespace ncgl
