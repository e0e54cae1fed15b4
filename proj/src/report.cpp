#include "report.hpp"

namespace ncgl {

const char* to_string(HypothesisFlag f) {
  switch (f) {
    case HypothesisFlag::StrongPass: return "strong-pass";
    case HypothesisFlag::SampledPass: return "sampled-pass";
    case HypothesisFlag::Unverified: return "hypothesis-unverified";
    case HypothesisFlag::DualityOnly: return "duality-only";
    case HypothesisFlag::NotApplicable: return "n/a";
  }
  return "?";
}

VerifyReport make_report(std::string name, double lhs, double rhs, double constant,
                         std::string meta, std::uint64_t seed) {
  VerifyReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant = constant;
  r.margin = rhs - lhs;
  r.pass = r.margin >= -report_tolerance(rhs);
  r.meta = std::move(meta);
  r.seed = seed;
  return r;
}

}  // namespace ncgl
