#include "bcq/bound_report.hpp"

namespace bcq {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kHolds:
      return "holds";
    case Verdict::kViolated:
      return "violated";
    case Verdict::kInapplicable:
      return "inapplicable";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

Verdict BoundReport::overall() const {
  bool any_inconclusive = false;
  bool any_holds = false;
  for (const BoundRow& r : rows) {
    switch (r.verdict) {
      case Verdict::kViolated:
        return Verdict::kViolated;
      case Verdict::kInconclusive:
        any_inconclusive = true;
        break;
      case Verdict::kHolds:
        any_holds = true;
        break;
      case Verdict::kInapplicable:
        break;
    }
  }
  if (any_inconclusive) return Verdict::kInconclusive;
  if (any_holds) return Verdict::kHolds;
  return Verdict::kInapplicable;
}

}  // namespace bcq
