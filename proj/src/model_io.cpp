#include "bcq/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcq/error.hpp"
#include "bcq/space.hpp"
#include "json.hpp"

namespace bcq {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw InvalidInput(origin + ": " + message);
}

// Rejects keys outside `allowed` so typos never silently change a model.
void check_fields(const std::string& origin, const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      fail(origin, "unknown field \"" + item.key() + "\" at " + where);
    }
  }
}

const json& require(const std::string& origin, const json& obj, const std::string& where,
                    const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(origin, "missing field \"" + key + "\" at " + where);
  return *it;
}

std::string require_string(const std::string& origin, const json& obj, const std::string& where,
                           const std::string& key) {
  const json& v = require(origin, obj, where, key);
  if (!v.is_string()) fail(origin, "field \"" + key + "\" at " + where + " must be a string");
  return v.get<std::string>();
}

Rational parse_rational(const std::string& origin, const json& v, const std::string& where) {
  if (!v.is_string()) {
    fail(origin, "probabilities must be exact \"p/q\" strings, got " + v.dump() + " at " + where);
  }
  const std::string text = v.get<std::string>();
  std::optional<Rational> r = Rational::try_parse(text);
  if (!r) fail(origin, "malformed rational \"" + text + "\" at " + where);
  return *r;
}

long require_integer(const std::string& origin, const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(origin, "field at " + where + " must be an integer");
  return v.get<long>();
}

std::uint32_t require_outcome(const std::string& origin, const json& v, const std::string& where,
                              std::size_t outcome_count) {
  long n = require_integer(origin, v, where);
  if (n < 0 || static_cast<std::size_t>(n) >= outcome_count) {
    fail(origin, "outcome " + std::to_string(n) + " at " + where + " is outside 0.." +
                     std::to_string(outcome_count - 1));
  }
  return static_cast<std::uint32_t>(n);
}

const json& require_array(const std::string& origin, const json& obj, const std::string& where,
                          const std::string& key) {
  const json& v = require(origin, obj, where, key);
  if (!v.is_array() || v.empty()) {
    fail(origin, "field \"" + key + "\" at " + where + " must be a non-empty array");
  }
  return v;
}

void check_weights_sum(const std::string& origin, const std::vector<Rational>& weights) {
  Rational sum;
  for (const Rational& w : weights) sum += w;
  if (!sum.is_one()) fail(origin, "weights sum " + sum.str() + " ≠ 1");
}

SequenceModel parse_explicit(const std::string& origin, const json& m) {
  check_fields(origin, m, "model", {"kind", "weights", "partition", "events"});

  std::vector<Rational> weights;
  const json& jw = require_array(origin, m, "model", "weights");
  for (std::size_t i = 0; i < jw.size(); ++i) {
    weights.push_back(
        parse_rational(origin, jw[i], "model.weights[" + std::to_string(i) + "]"));
  }
  check_weights_sum(origin, weights);
  const std::size_t outcomes = weights.size();

  const json& jp = require_array(origin, m, "model", "partition");
  std::vector<Event> blocks;
  std::set<std::uint32_t> seen;
  for (std::size_t b = 0; b < jp.size(); ++b) {
    const std::string where = "model.partition[" + std::to_string(b) + "]";
    if (!jp[b].is_array()) fail(origin, where + " must be an array of outcomes");
    std::vector<std::uint32_t> members;
    for (std::size_t j = 0; j < jp[b].size(); ++j) {
      std::uint32_t o = require_outcome(origin, jp[b][j],
                                        where + "[" + std::to_string(j) + "]", outcomes);
      if (!seen.insert(o).second) {
        fail(origin, "blocks overlap at outcome " + std::to_string(o));
      }
      members.push_back(o);
    }
    blocks.emplace_back(members);
  }
  for (std::uint32_t o = 0; o < outcomes; ++o) {
    if (!seen.contains(o)) fail(origin, "partition misses outcome " + std::to_string(o));
  }

  const json& je = require_array(origin, m, "model", "events");
  std::vector<Event> events;
  for (std::size_t e = 0; e < je.size(); ++e) {
    const std::string where = "model.events[" + std::to_string(e) + "]";
    if (!je[e].is_array()) fail(origin, where + " must be an array of outcomes");
    std::vector<std::uint32_t> members;
    for (std::size_t j = 0; j < je[e].size(); ++j) {
      members.push_back(require_outcome(origin, je[e][j],
                                        where + "[" + std::to_string(j) + "]", outcomes));
    }
    events.emplace_back(members);
  }

  return SequenceModel::explicit_model(
      FiniteProbabilitySpace(std::move(weights)),
      Partition(static_cast<std::uint32_t>(outcomes), std::move(blocks)), std::move(events));
}

ProbFormula parse_formula(const std::string& origin, const json& p, const std::string& where) {
  if (!p.is_object()) fail(origin, where + " must be an object");
  const std::string family = require_string(origin, p, where, "family");
  if (family == "constant") {
    check_fields(origin, p, where, {"family", "c"});
    return ProbFormula::constant(parse_rational(origin, require(origin, p, where, "c"),
                                                where + ".c"));
  }
  if (family == "geometric") {
    check_fields(origin, p, where, {"family", "c", "r"});
    return ProbFormula::geometric(
        parse_rational(origin, require(origin, p, where, "c"), where + ".c"),
        parse_rational(origin, require(origin, p, where, "r"), where + ".r"));
  }
  if (family == "power") {
    check_fields(origin, p, where, {"family", "c", "s"});
    long s = require_integer(origin, require(origin, p, where, "s"), where + ".s");
    return ProbFormula::power(
        parse_rational(origin, require(origin, p, where, "c"), where + ".c"), s);
  }
  fail(origin, "unknown family \"" + family + "\" at " + where);
}

SequenceModel parse_mixture_bernoulli(const std::string& origin, const json& m) {
  check_fields(origin, m, "model", {"kind", "components"});
  const json& jc = require_array(origin, m, "model", "components");
  std::vector<BernoulliComponent> components;
  std::vector<Rational> weights;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = "model.components[" + std::to_string(i) + "]";
    if (!jc[i].is_object()) fail(origin, where + " must be an object");
    check_fields(origin, jc[i], where, {"weight", "p"});
    Rational w = parse_rational(origin, require(origin, jc[i], where, "weight"),
                                where + ".weight");
    ProbFormula p = parse_formula(origin, require(origin, jc[i], where, "p"), where + ".p");
    weights.push_back(w);
    components.push_back({std::move(w), std::move(p)});
  }
  check_weights_sum(origin, weights);
  return SequenceModel::mixture_bernoulli(std::move(components));
}

SequenceModel parse_mixture_markov(const std::string& origin, const json& m) {
  check_fields(origin, m, "model", {"kind", "components"});
  const json& jc = require_array(origin, m, "model", "components");
  std::vector<MarkovComponent> components;
  std::vector<Rational> weights;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = "model.components[" + std::to_string(i) + "]";
    if (!jc[i].is_object()) fail(origin, where + " must be an object");
    check_fields(origin, jc[i], where, {"weight", "pi1", "q0", "q1"});
    auto field = [&](const char* key) {
      return parse_rational(origin, require(origin, jc[i], where, key),
                            where + "." + key);
    };
    Rational w = field("weight");
    weights.push_back(w);
    components.push_back({std::move(w), field("pi1"), field("q0"), field("q1")});
  }
  check_weights_sum(origin, weights);
  return SequenceModel::mixture_markov(std::move(components));
}

}  // namespace

ModelSpecDocument parse_model_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(origin, "top level must be an object");
  check_fields(origin, doc, "top level", {"name", "description", "model"});
  std::string name = require_string(origin, doc, "top level", "name");
  std::string description;
  if (auto it = doc.find("description"); it != doc.end()) {
    if (!it->is_string()) fail(origin, "field \"description\" at top level must be a string");
    description = it->get<std::string>();
  }
  const json& m = require(origin, doc, "top level", "model");
  if (!m.is_object()) fail(origin, "field \"model\" at top level must be an object");
  const std::string kind = require_string(origin, m, "model", "kind");

  try {
    if (kind == "explicit") {
      return {std::move(name), std::move(description), kind, parse_explicit(origin, m)};
    }
    if (kind == "mixture_bernoulli") {
      return {std::move(name), std::move(description), kind,
              parse_mixture_bernoulli(origin, m)};
    }
    if (kind == "mixture_markov") {
      return {std::move(name), std::move(description), kind, parse_mixture_markov(origin, m)};
    }
  } catch (const InvalidInput& e) {
    // Engine-level validation (ranges, normalization) keeps its message but
    // gains the file context.
    std::string what = e.what();
    if (what.rfind(origin + ": ", 0) == 0) throw;
    fail(origin, what);
  }
  fail(origin, "unknown kind \"" + kind + "\"");
}

ModelSpecDocument parse_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path);
}

}  // namespace bcq
