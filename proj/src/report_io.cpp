#include "bcq/report_io.hpp"

#include <cstdio>
#include <sstream>
#include <string>

#include "bcq/error.hpp"

namespace bcq {
namespace {

using nlohmann::json;

Verdict verdict_from_name(const std::string& name) {
  if (name == "holds") return Verdict::kHolds;
  if (name == "violated") return Verdict::kViolated;
  if (name == "inapplicable") return Verdict::kInapplicable;
  if (name == "inconclusive") return Verdict::kInconclusive;
  throw InvalidInput("unknown verdict \"" + name + "\"");
}

Rational rational_from_json(const json& j) {
  if (!j.is_string()) throw InvalidInput("expected an exact rational string, got " + j.dump());
  std::optional<Rational> r = Rational::try_parse(j.get<std::string>());
  if (!r) throw InvalidInput("malformed rational \"" + j.get<std::string>() + "\"");
  return *r;
}

json params_to_json(const ParamList& params) {
  json out = json::array();
  for (const auto& [k, v] : params) out.push_back(json::array({k, v}));
  return out;
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::string enclosure_cell(const std::optional<Enclosure>& e) {
  if (!e) return "-";
  if (e->is_point()) return e->lower().str();
  return "[" + e->lower().str() + ", " + e->upper().str() + "]";
}

void tsv_params(std::ostringstream& out, const ParamList& params) {
  for (const auto& [k, v] : params) out << "# param\t" << k << "\t" << v << "\n";
}

}  // namespace

json enclosure_to_json(const Enclosure& e) {
  return json{{"lower", e.lower().str()}, {"upper", e.upper().str()}};
}

Enclosure enclosure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    throw InvalidInput("enclosure must be an object with lower/upper");
  }
  return Enclosure(rational_from_json(j.at("lower")), rational_from_json(j.at("upper")));
}

json report_to_json(const BoundReport& rep) {
  json rows = json::array();
  for (const BoundRow& r : rep.rows) {
    json row{{"block", r.block},
             {"label", r.block_label},
             {"verdict", verdict_name(r.verdict)},
             {"lhs", r.lhs ? enclosure_to_json(*r.lhs) : json(nullptr)},
             {"rhs", r.rhs ? enclosure_to_json(*r.rhs) : json(nullptr)},
             {"margin", r.margin ? json(r.margin->str()) : json(nullptr)},
             {"premise_ok", r.premise_ok ? json(*r.premise_ok) : json(nullptr)},
             {"note", r.note}};
    rows.push_back(std::move(row));
  }
  return json{{"check", rep.check_id},
              {"relation", rep.relation},
              {"params", params_to_json(rep.params)},
              {"overall", verdict_name(rep.overall())},
              {"rows", std::move(rows)}};
}

BoundReport report_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("report must be a JSON object");
  BoundReport rep;
  rep.check_id = j.at("check").get<std::string>();
  rep.relation = j.at("relation").get<std::string>();
  for (const json& p : j.at("params")) {
    if (!p.is_array() || p.size() != 2) throw InvalidInput("each param must be a [name, value] pair");
    rep.add_param(p[0].get<std::string>(), p[1].get<std::string>());
  }
  for (const json& r : j.at("rows")) {
    BoundRow row;
    row.block = r.at("block").get<std::size_t>();
    row.block_label = r.at("label").get<std::string>();
    row.verdict = verdict_from_name(r.at("verdict").get<std::string>());
    if (!r.at("lhs").is_null()) row.lhs = enclosure_from_json(r.at("lhs"));
    if (!r.at("rhs").is_null()) row.rhs = enclosure_from_json(r.at("rhs"));
    if (!r.at("margin").is_null()) row.margin = rational_from_json(r.at("margin"));
    if (!r.at("premise_ok").is_null()) row.premise_ok = r.at("premise_ok").get<bool>();
    row.note = r.at("note").get<std::string>();
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

json rates_to_json(const RateFunction& rf, const std::string& which,
                   const std::vector<std::string>& block_labels, const ParamList& params) {
  json tables = json::array();
  for (std::size_t b = 0; b < rf.block_count(); ++b) {
    const RateTable& t = rf.table(b);
    tables.push_back(json{{"block", b},
                          {"label", b < block_labels.size() ? block_labels[b] : ""},
                          {"status", rate_status_name(t.status)},
                          {"provenance", t.provenance},
                          {"level_min", t.level_min},
                          {"entries", t.entries}});
  }
  return json{{"rate", which}, {"params", params_to_json(params)}, {"tables", std::move(tables)}};
}

json estimate_to_json(const Estimate& est, const std::vector<std::string>& block_labels,
                      const ParamList& params) {
  json blocks = json::array();
  for (std::size_t b = 0; b < est.points.size(); ++b) {
    json row{{"block", b},
             {"label", b < block_labels.size() ? block_labels[b] : ""},
             {"estimate", est.points[b] ? json(est.points[b]->str()) : json(nullptr)},
             {"decimal", est.points[b] ? json(est.points[b]->to_double()) : json(nullptr)}};
    blocks.push_back(std::move(row));
  }
  return json{{"query", est.query},
              {"trials", est.trials},
              {"delta", est.delta},
              {"epsilon", est.epsilon},
              {"params", params_to_json(params)},
              {"blocks", std::move(blocks)}};
}

bool reports_equal(const BoundReport& a, const BoundReport& b) {
  if (a.check_id != b.check_id || a.relation != b.relation || a.params != b.params ||
      a.rows.size() != b.rows.size()) {
    return false;
  }
  auto same_enclosure = [](const std::optional<Enclosure>& x, const std::optional<Enclosure>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->lower() == y->lower() && x->upper() == y->upper());
  };
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const BoundRow& r = a.rows[i];
    const BoundRow& s = b.rows[i];
    if (r.block != s.block || r.block_label != s.block_label || r.verdict != s.verdict ||
        !same_enclosure(r.lhs, s.lhs) || !same_enclosure(r.rhs, s.rhs) ||
        r.margin != s.margin || r.premise_ok != s.premise_ok || r.note != s.note) {
      return false;
    }
  }
  return true;
}

std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

std::string report_to_tsv(const BoundReport& rep) {
  std::ostringstream out;
  out << "# check\t" << rep.check_id << "\n";
  out << "# relation\t" << rep.relation << "\n";
  tsv_params(out, rep.params);
  out << "# overall\t" << verdict_name(rep.overall()) << "\n";
  out << "block\tlabel\tverdict\tlhs\trhs\tmargin\tpremise\tnote\n";
  for (const BoundRow& r : rep.rows) {
    out << r.block << "\t" << r.block_label << "\t" << verdict_name(r.verdict) << "\t"
        << enclosure_cell(r.lhs) << "\t" << enclosure_cell(r.rhs) << "\t"
        << (r.margin ? r.margin->str() : "-") << "\t"
        << (r.premise_ok ? (*r.premise_ok ? "yes" : "no") : "-") << "\t" << r.note << "\n";
  }
  return out.str();
}

std::string rates_to_tsv(const RateFunction& rf, const std::string& which,
                         const std::vector<std::string>& block_labels, const ParamList& params) {
  std::ostringstream out;
  out << "# rate\t" << which << "\n";
  tsv_params(out, params);
  out << "block\tlabel\tstatus\tprovenance\tlevel\tvalue\n";
  for (std::size_t b = 0; b < rf.block_count(); ++b) {
    const RateTable& t = rf.table(b);
    const std::string label = b < block_labels.size() ? block_labels[b] : "";
    if (t.entries.empty()) {
      out << b << "\t" << label << "\t" << rate_status_name(t.status) << "\t" << t.provenance
          << "\t-\t-\n";
      continue;
    }
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      out << b << "\t" << label << "\t" << rate_status_name(t.status) << "\t" << t.provenance
          << "\t" << (t.level_min + static_cast<long>(i)) << "\t" << t.entries[i] << "\n";
    }
  }
  return out.str();
}

std::string estimate_to_tsv(const Estimate& est, const std::vector<std::string>& block_labels,
                            const ParamList& params) {
  std::ostringstream out;
  out << "# query\t" << est.query << "\n";
  out << "# trials\t" << est.trials << "\n";
  out << "# delta\t" << fixed6(est.delta) << "\n";
  out << "# epsilon\t" << fixed6(est.epsilon) << "\n";
  tsv_params(out, params);
  out << "block\tlabel\testimate\tdecimal\n";
  for (std::size_t b = 0; b < est.points.size(); ++b) {
    const std::string label = b < block_labels.size() ? block_labels[b] : "";
    if (!est.points[b]) {
      out << b << "\t" << label << "\t-\t-\n";
      continue;
    }
    out << b << "\t" << label << "\t" << est.points[b]->str() << "\t"
        << fixed6(est.points[b]->to_double()) << "\n";
  }
  return out.str();
}

}  // namespace bcq
