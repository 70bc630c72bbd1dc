#include "bcq/model_io.hpp"

#include <string>

#include "bcq/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using bcq::InvalidInput;
using bcq::ModelSpecDocument;
using bcq::parse_model;
using bcq::parse_model_text;
using bcq::Rational;

namespace {

ModelSpecDocument parse(const std::string& text) { return parse_model_text(text, "test"); }

}  // namespace

TEST_CASE("well formed files of every kind resolve to engine models") {
  ModelSpecDocument bern = parse(R"({
    "name": "two-part",
    "description": "spec-shaped bernoulli mixture",
    "model": {
      "kind": "mixture_bernoulli",
      "components": [
        {"weight": "1/2", "p": {"family": "geometric", "c": "1/2", "r": "1/2"}},
        {"weight": "1/2", "p": {"family": "constant", "c": "1/3"}}
      ]
    }
  })");
  CHECK(bern.name == "two-part");
  CHECK(bern.description == "spec-shaped bernoulli mixture");
  CHECK(bern.kind == "mixture_bernoulli");
  CHECK(bern.model.block_count() == 2);
  CHECK(bern.model.cond_marginal(1).value(0) == Rational(1, 2));
  CHECK(bern.model.cond_marginal(3).value(0) == Rational(1, 8));
  CHECK(bern.model.cond_marginal(3).value(1) == Rational(1, 3));

  ModelSpecDocument expl = parse(R"({
    "name": "s4",
    "model": {
      "kind": "explicit",
      "weights": ["1/4", "1/4", "1/4", "1/4"],
      "partition": [[0, 1], [2, 3]],
      "events": [[2, 3], [1, 3]]
    }
  })");
  CHECK(expl.kind == "explicit");
  CHECK(expl.model.block_count() == 2);
  CHECK(expl.description.empty());
  CHECK(expl.model.cond_marginal(1).value(0) == Rational(0));
  CHECK(expl.model.cond_marginal(1).value(1) == Rational(1));

  ModelSpecDocument mkv = parse(R"({
    "name": "chain",
    "model": {
      "kind": "mixture_markov",
      "components": [{"weight": "1", "pi1": "1/2", "q0": "1/4", "q1": "3/4"}]
    }
  })");
  CHECK(mkv.model.block_count() == 1);
  CHECK(mkv.model.cond_marginal(1).value(0) == Rational(1, 2));

  ModelSpecDocument powr = parse(R"({
    "name": "slow",
    "model": {
      "kind": "mixture_bernoulli",
      "components": [{"weight": "1", "p": {"family": "power", "c": "1/4", "s": 2}}]
    }
  })");
  CHECK(powr.model.cond_marginal(2).value(0) == Rational(1, 16));
}

TEST_CASE("the stated parse diagnostics are produced verbatim") {
  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "bad",
    "model": {
      "kind": "mixture_bernoulli",
      "components": [
        {"weight": "1/2", "p": {"family": "constant", "c": "1/2"}},
        {"weight": "1/3", "p": {"family": "constant", "c": "1/2"}}
      ]
    }
  })"),
                       doctest::Contains("weights sum 5/6 ≠ 1"), InvalidInput);

  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "bad",
    "model": {
      "kind": "explicit",
      "weights": ["1/3", "1/3", "1/3"],
      "partition": [[0, 1], [1, 2]],
      "events": [[0]]
    }
  })"),
                       doctest::Contains("blocks overlap at outcome 1"), InvalidInput);

  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "bad",
    "model": {
      "kind": "mixture_bernoulli",
      "components": [{"weight": "1", "p": {"family": "constant", "c": "0.5"}}]
    }
  })"),
                       doctest::Contains("malformed rational \"0.5\""), InvalidInput);

  CHECK_THROWS_WITH_AS(parse(R"({"name": "bad", "model": {"kind": "markov"}})"),
                       doctest::Contains("unknown kind \"markov\""), InvalidInput);
}

TEST_CASE("explicit weights must also sum to one") {
  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "bad",
    "model": {
      "kind": "explicit",
      "weights": ["1/2", "1/3"],
      "partition": [[0, 1]],
      "events": [[0]]
    }
  })"),
                       doctest::Contains("weights sum 5/6 ≠ 1"), InvalidInput);
}

TEST_CASE("unknown and missing fields are rejected with their path") {
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "extra": 1, "model": {"kind": "explicit"}})"),
                       doctest::Contains("unknown field \"extra\" at top level"), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "x",
    "model": {"kind": "mixture_bernoulli", "weights": [],
              "components": [{"weight": "1", "p": {"family": "constant", "c": "1/2"}}]}
  })"),
                       doctest::Contains("unknown field \"weights\" at model"), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "x",
    "model": {"kind": "mixture_bernoulli",
              "components": [{"weight": "1", "prob": {"family": "constant", "c": "1/2"}}]}
  })"),
                       doctest::Contains("unknown field \"prob\" at model.components[0]"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({
    "name": "x",
    "model": {"kind": "mixture_bernoulli",
              "components": [{"weight": "1", "p": {"family": "constant", "c": "1/2", "r": "1/2"}}]}
  })"),
                       doctest::Contains("unknown field \"r\" at model.components[0].p"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"model": {"kind": "explicit"}})"),
                       doctest::Contains("missing field \"name\" at top level"), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x"})"),
                       doctest::Contains("missing field \"model\" at top level"), InvalidInput);
  CHECK_THROWS_WITH_AS(
      parse(R"({"name": "x", "model": {"kind": "mixture_markov",
               "components": [{"weight": "1", "pi1": "1/2", "q0": "1/4"}]}})"),
      doctest::Contains("missing field \"q1\" at model.components[0]"), InvalidInput);
}

TEST_CASE("schema shape errors carry a field path") {
  CHECK_THROWS_WITH_AS(parse("not json at all"), doctest::Contains("not valid JSON"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse("[1, 2]"), doctest::Contains("top level must be an object"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "explicit",
    "weights": [], "partition": [], "events": []}})"),
                       doctest::Contains("\"weights\" at model must be a non-empty array"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "explicit",
    "weights": ["1/2", "1/2"], "partition": [[0, 2]], "events": [[0]]}})"),
                       doctest::Contains("outcome 2 at model.partition[0][1] is outside 0..1"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "explicit",
    "weights": ["1/2", "1/2"], "partition": [[0]], "events": [[0]]}})"),
                       doctest::Contains("partition misses outcome 1"), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "mixture_bernoulli",
    "components": [{"weight": "1", "p": {"family": "power", "c": "1/4", "s": "2"}}]}})"),
                       doctest::Contains("model.components[0].p.s must be an integer"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "mixture_bernoulli",
    "components": [{"weight": "1", "p": {"family": "cauchy", "c": "1/4"}}]}})"),
                       doctest::Contains("unknown family \"cauchy\""), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "explicit",
    "weights": [0.25, 0.75], "partition": [[0, 1]], "events": [[0]]}})"),
                       doctest::Contains("probabilities must be exact \"p/q\" strings"),
                       InvalidInput);
}

TEST_CASE("engine range validation keeps its message and gains file context") {
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "mixture_bernoulli",
    "components": [{"weight": "1", "p": {"family": "constant", "c": "3/2"}}]}})"),
                       doctest::Contains("test: "), InvalidInput);
  CHECK_THROWS_WITH_AS(parse(R"({"name": "x", "model": {"kind": "mixture_markov",
    "components": [{"weight": "1", "pi1": "1/2", "q0": "-1/4", "q1": "1/2"}]}})"),
                       doctest::Contains("test: "), InvalidInput);
}

TEST_CASE("reading from disk reports missing files") {
  CHECK_THROWS_WITH_AS(parse_model("/nonexistent/nowhere.json"),
                       doctest::Contains("cannot open file"), InvalidInput);
}
