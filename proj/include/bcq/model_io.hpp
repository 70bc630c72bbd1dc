#pragma once

#include <string>

#include "bcq/sequence_model.hpp"

namespace bcq {

// A model file resolved into an engine-ready SequenceModel plus its metadata.
struct ModelSpecDocument {
  std::string name;
  std::string description;  // empty when the file omits it
  std::string kind;         // "explicit" | "mixture_bernoulli" | "mixture_markov"
  SequenceModel model;
};

// Strict parser for the JSON model schema: every probability is an exact
// "p/q" string, unknown fields are rejected, weights must sum to 1, and
// partition blocks must tile the outcome set. All failures throw
// InvalidInput with a field-path diagnostic prefixed by `origin`.
ModelSpecDocument parse_model_text(const std::string& text, const std::string& origin);

// Reads `path` and delegates to parse_model_text with the path as origin.
ModelSpecDocument parse_model(const std::string& path);

}  // namespace bcq
