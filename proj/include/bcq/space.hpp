#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bcq/rational.hpp"

namespace bcq {

// Sorted duplicate-free set of outcome ids. Range validity against a
// particular space is checked at the point of use.
class Event {
 public:
  Event() = default;
  explicit Event(std::vector<std::uint32_t> outcomes);

  static Event single(std::uint32_t outcome) { return Event({outcome}); }
  static Event full(std::uint32_t outcome_count);

  const std::vector<std::uint32_t>& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  bool is_empty() const { return outcomes_.empty(); }
  bool contains(std::uint32_t outcome) const;
  bool subset_of(const Event& other) const;

  friend bool operator==(const Event&, const Event&) = default;

 private:
  std::vector<std::uint32_t> outcomes_;
};

Event event_union(const Event& a, const Event& b);
Event event_intersection(const Event& a, const Event& b);
Event event_difference(const Event& a, const Event& b);
Event event_complement(const Event& a, std::uint32_t outcome_count);

// Outcome-count ceiling for enumeration; BCQ_SPACE_CAP overrides the default.
inline constexpr std::uint64_t kDefaultSpaceCap = std::uint64_t{1} << 24;
std::uint64_t effective_space_cap();

class FiniteProbabilitySpace {
 public:
  explicit FiniteProbabilitySpace(std::vector<Rational> weights,
                                  std::vector<std::string> labels = {});

  std::uint32_t size() const { return static_cast<std::uint32_t>(weights_.size()); }
  const Rational& weight(std::uint32_t outcome) const;
  const std::vector<std::string>& labels() const { return labels_; }

  // Throws InvalidInput when the event references an outcome outside the space.
  void validate(const Event& e) const;

 private:
  std::vector<Rational> weights_;
  std::vector<std::string> labels_;
};

class Partition {
 public:
  Partition(std::uint32_t outcome_count, std::vector<Event> blocks);
  static Partition trivial(std::uint32_t outcome_count);

  std::uint32_t outcome_count() const { return outcome_count_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Event& block(std::size_t b) const;
  std::size_t block_of(std::uint32_t outcome) const;

 private:
  std::uint32_t outcome_count_ = 0;
  std::vector<Event> blocks_;
  std::vector<std::uint32_t> block_index_;
};

// Block-constant random variable: one rational per partition block, with a
// mask singling out the blocks of probability zero. Values on null blocks are
// sentinels and never feed a verdict.
class BlockFunction {
 public:
  BlockFunction() = default;
  explicit BlockFunction(std::vector<Rational> values, std::vector<bool> null_mask = {});

  static BlockFunction constant(std::size_t block_count, Rational value);

  std::size_t block_count() const { return values_.size(); }
  const Rational& value(std::size_t b) const;
  bool is_null(std::size_t b) const;
  bool any_non_null() const;

  void set_value(std::size_t b, Rational v);

 private:
  std::vector<Rational> values_;
  std::vector<bool> null_mask_;
};

Rational probability(const FiniteProbabilitySpace& space, const Event& e);

BlockFunction conditional_probability(const FiniteProbabilitySpace& space,
                                      const Partition& f, const Event& e);

Rational tower_expectation(const FiniteProbabilitySpace& space,
                           const Partition& f, const Event& e);

// Exact product identity over every subset of size >= 2 of the given events,
// on every positive-probability block. Takes at least 2 and at most 12 events.
bool is_conditionally_independent(const FiniteProbabilitySpace& space,
                                  const Partition& f,
                                  const std::vector<Event>& events);

// Expression tree over events, evaluated against a space so complements know
// the outcome range.
class EventExpr {
 public:
  static EventExpr leaf(Event e);
  static EventExpr complement(EventExpr e);
  static EventExpr intersect(EventExpr a, EventExpr b);
  static EventExpr unite(EventExpr a, EventExpr b);
  static EventExpr difference(EventExpr a, EventExpr b);

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  friend Event event_algebra(const FiniteProbabilitySpace& space, const EventExpr& expr);
};

Event event_algebra(const FiniteProbabilitySpace& space, const EventExpr& expr);

}  // namespace bcq
