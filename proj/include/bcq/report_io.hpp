#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bcq/bound_report.hpp"
#include "bcq/montecarlo.hpp"
#include "bcq/rates.hpp"
#include "json.hpp"

namespace bcq {

using ParamList = std::vector<std::pair<std::string, std::string>>;

// Structured serialization. All rationals and enclosure endpoints are exact
// strings; verdict data survives a round trip unchanged.
nlohmann::json enclosure_to_json(const Enclosure& e);
Enclosure enclosure_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const BoundReport& rep);
BoundReport report_from_json(const nlohmann::json& j);
nlohmann::json rates_to_json(const RateFunction& rf, const std::string& which,
                             const std::vector<std::string>& block_labels,
                             const ParamList& params = {});
nlohmann::json estimate_to_json(const Estimate& est,
                                const std::vector<std::string>& block_labels,
                                const ParamList& params = {});

// Field-by-field equality of everything a report records.
bool reports_equal(const BoundReport& a, const BoundReport& b);

// Canonical byte form used wherever output must be reproducible bit-exactly.
std::string canonical_json(const nlohmann::json& j);

// Human-readable TSV: one data row per block (reports, estimates) or per
// table entry (rates), preceded by `#`-prefixed context lines.
std::string report_to_tsv(const BoundReport& rep);
std::string rates_to_tsv(const RateFunction& rf, const std::string& which,
                         const std::vector<std::string>& block_labels,
                         const ParamList& params = {});
std::string estimate_to_tsv(const Estimate& est,
                            const std::vector<std::string>& block_labels,
                            const ParamList& params = {});

}  // namespace bcq
