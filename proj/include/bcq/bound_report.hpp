#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcq/enclosure.hpp"

namespace bcq {

enum class Verdict { kHolds, kViolated, kInapplicable, kInconclusive };

const char* verdict_name(Verdict v);

// One conditioning block's outcome for one check. lhs/rhs are point
// enclosures when the quantity is an exact rational; genuine intervals when a
// transcendental bound was involved. Everything needed to re-derive the
// verdict is recorded.
struct BoundRow {
  std::size_t block = 0;
  std::string block_label;
  Verdict verdict = Verdict::kInapplicable;
  std::optional<Enclosure> lhs;
  std::optional<Enclosure> rhs;
  std::optional<Rational> margin;   // certified worst-case gap, when separated
  std::optional<bool> premise_ok;   // present when the check has a premise
  std::string note;
};

struct BoundReport {
  std::string check_id;
  std::string relation;  // human-readable statement of the comparison
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<BoundRow> rows;

  void add_param(std::string name, std::string value) {
    params.emplace_back(std::move(name), std::move(value));
  }

  // violated > inconclusive > holds > inapplicable
  Verdict overall() const;
};

}  // namespace bcq
