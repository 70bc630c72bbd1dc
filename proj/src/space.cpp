#include "bcq/space.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <iterator>
#include <limits>

#include "bcq/error.hpp"

namespace bcq {

Event::Event(std::vector<std::uint32_t> outcomes) : outcomes_(std::move(outcomes)) {
  std::sort(outcomes_.begin(), outcomes_.end());
  outcomes_.erase(std::unique(outcomes_.begin(), outcomes_.end()), outcomes_.end());
}

Event Event::full(std::uint32_t outcome_count) {
  std::vector<std::uint32_t> all(outcome_count);
  for (std::uint32_t i = 0; i < outcome_count; ++i) all[i] = i;
  return Event(std::move(all));
}

bool Event::contains(std::uint32_t outcome) const {
  return std::binary_search(outcomes_.begin(), outcomes_.end(), outcome);
}

bool Event::subset_of(const Event& other) const {
  return std::includes(other.outcomes_.begin(), other.outcomes_.end(),
                       outcomes_.begin(), outcomes_.end());
}

Event event_union(const Event& a, const Event& b) {
  std::vector<std::uint32_t> out;
  std::set_union(a.outcomes().begin(), a.outcomes().end(),
                 b.outcomes().begin(), b.outcomes().end(), std::back_inserter(out));
  return Event(std::move(out));
}

Event event_intersection(const Event& a, const Event& b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.outcomes().begin(), a.outcomes().end(),
                        b.outcomes().begin(), b.outcomes().end(), std::back_inserter(out));
  return Event(std::move(out));
}

Event event_difference(const Event& a, const Event& b) {
  std::vector<std::uint32_t> out;
  std::set_difference(a.outcomes().begin(), a.outcomes().end(),
                      b.outcomes().begin(), b.outcomes().end(), std::back_inserter(out));
  return Event(std::move(out));
}

Event event_complement(const Event& a, std::uint32_t outcome_count) {
  if (!a.is_empty() && a.outcomes().back() >= outcome_count) {
    throw InvalidInput("event references outcome " + std::to_string(a.outcomes().back()) +
                       " outside a space of size " + std::to_string(outcome_count));
  }
  std::vector<std::uint32_t> out;
  out.reserve(outcome_count - a.size());
  auto it = a.outcomes().begin();
  for (std::uint32_t i = 0; i < outcome_count; ++i) {
    if (it != a.outcomes().end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return Event(std::move(out));
}

std::uint64_t effective_space_cap() {
  const char* raw = std::getenv("BCQ_SPACE_CAP");
  if (raw == nullptr || *raw == '\0') return kDefaultSpaceCap;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) {
    throw InvalidInput(std::string("BCQ_SPACE_CAP must be a positive integer, got '") + raw + "'");
  }
  return static_cast<std::uint64_t>(v);
}

FiniteProbabilitySpace::FiniteProbabilitySpace(std::vector<Rational> weights,
                                               std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  if (weights_.empty()) throw InvalidInput("space needs at least one outcome");
  if (weights_.size() > effective_space_cap()) {
    throw ResourceLimit("space of " + std::to_string(weights_.size()) +
                        " outcomes exceeds the cap of " + std::to_string(effective_space_cap()));
  }
  if (!labels_.empty() && labels_.size() != weights_.size()) {
    throw InvalidInput("label count does not match outcome count");
  }
  Rational total(0);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].sign() < 0) {
      throw InvalidInput("negative weight at outcome " + std::to_string(i));
    }
    total += weights_[i];
  }
  if (!total.is_one()) {
    throw InvalidInput("weights sum " + total.str() + " != 1");
  }
}

const Rational& FiniteProbabilitySpace::weight(std::uint32_t outcome) const {
  if (outcome >= weights_.size()) {
    throw InvalidInput("outcome " + std::to_string(outcome) + " out of range");
  }
  return weights_[outcome];
}

void FiniteProbabilitySpace::validate(const Event& e) const {
  if (!e.is_empty() && e.outcomes().back() >= size()) {
    throw InvalidInput("event references outcome " + std::to_string(e.outcomes().back()) +
                       " outside a space of size " + std::to_string(size()));
  }
}

Partition::Partition(std::uint32_t outcome_count, std::vector<Event> blocks)
    : outcome_count_(outcome_count), blocks_(std::move(blocks)) {
  block_index_.assign(outcome_count_, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].is_empty()) {
      throw InvalidInput("partition block " + std::to_string(b) + " is empty");
    }
    for (std::uint32_t w : blocks_[b].outcomes()) {
      if (w >= outcome_count_) {
        throw InvalidInput("partition block references outcome " + std::to_string(w) +
                           " outside a space of size " + std::to_string(outcome_count_));
      }
      if (block_index_[w] != std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidInput("blocks overlap at outcome " + std::to_string(w));
      }
      block_index_[w] = static_cast<std::uint32_t>(b);
    }
  }
  for (std::uint32_t w = 0; w < outcome_count_; ++w) {
    if (block_index_[w] == std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidInput("outcome " + std::to_string(w) + " not covered by any block");
    }
  }
}

Partition Partition::trivial(std::uint32_t outcome_count) {
  return Partition(outcome_count, {Event::full(outcome_count)});
}

const Event& Partition::block(std::size_t b) const {
  if (b >= blocks_.size()) throw InvalidInput("block index out of range");
  return blocks_[b];
}

std::size_t Partition::block_of(std::uint32_t outcome) const {
  if (outcome >= outcome_count_) throw InvalidInput("outcome out of range");
  return block_index_[outcome];
}

BlockFunction::BlockFunction(std::vector<Rational> values, std::vector<bool> null_mask)
    : values_(std::move(values)), null_mask_(std::move(null_mask)) {
  if (null_mask_.empty()) null_mask_.assign(values_.size(), false);
  if (null_mask_.size() != values_.size()) {
    throw InvalidInput("null mask size does not match value count");
  }
}

BlockFunction BlockFunction::constant(std::size_t block_count, Rational value) {
  return BlockFunction(std::vector<Rational>(block_count, std::move(value)));
}

const Rational& BlockFunction::value(std::size_t b) const {
  if (b >= values_.size()) throw InvalidInput("block index out of range");
  return values_[b];
}

bool BlockFunction::is_null(std::size_t b) const {
  if (b >= values_.size()) throw InvalidInput("block index out of range");
  return null_mask_[b];
}

bool BlockFunction::any_non_null() const {
  for (std::size_t b = 0; b < values_.size(); ++b) {
    if (!null_mask_[b]) return true;
  }
  return false;
}

void BlockFunction::set_value(std::size_t b, Rational v) {
  if (b >= values_.size()) throw InvalidInput("block index out of range");
  values_[b] = std::move(v);
}

Rational probability(const FiniteProbabilitySpace& space, const Event& e) {
  space.validate(e);
  Rational total(0);
  for (std::uint32_t w : e.outcomes()) total += space.weight(w);
  return total;
}

BlockFunction conditional_probability(const FiniteProbabilitySpace& space,
                                      const Partition& f, const Event& e) {
  if (f.outcome_count() != space.size()) {
    throw InvalidInput("partition outcome count does not match the space");
  }
  space.validate(e);
  std::vector<Rational> values(f.block_count(), Rational(0));
  std::vector<bool> nulls(f.block_count(), false);
  for (std::size_t b = 0; b < f.block_count(); ++b) {
    Rational pb = probability(space, f.block(b));
    if (pb.is_zero()) {
      nulls[b] = true;
      continue;
    }
    values[b] = probability(space, event_intersection(e, f.block(b))) / pb;
  }
  return BlockFunction(std::move(values), std::move(nulls));
}

Rational tower_expectation(const FiniteProbabilitySpace& space,
                           const Partition& f, const Event& e) {
  BlockFunction cond = conditional_probability(space, f, e);
  Rational total(0);
  for (std::size_t b = 0; b < f.block_count(); ++b) {
    if (cond.is_null(b)) continue;
    total += probability(space, f.block(b)) * cond.value(b);
  }
  return total;
}

bool is_conditionally_independent(const FiniteProbabilitySpace& space,
                                  const Partition& f,
                                  const std::vector<Event>& events) {
  if (events.size() < 2) {
    throw InvalidInput("conditional independence needs at least 2 events");
  }
  if (events.size() > 12) {
    throw ResourceLimit("conditional independence check capped at 12 events, got " +
                        std::to_string(events.size()));
  }
  if (f.outcome_count() != space.size()) {
    throw InvalidInput("partition outcome count does not match the space");
  }
  for (const Event& e : events) space.validate(e);

  const std::size_t k = events.size();
  const std::size_t subsets = std::size_t{1} << k;
  for (std::size_t b = 0; b < f.block_count(); ++b) {
    Rational pb = probability(space, f.block(b));
    if (pb.is_zero()) continue;
    // mass[mask] starts as the weight landing exactly on membership
    // pattern `mask`, then a superset-sum turns it into P(all of mask, block).
    std::vector<Rational> mass(subsets, Rational(0));
    for (std::uint32_t w : f.block(b).outcomes()) {
      std::size_t mask = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (events[i].contains(w)) mask |= std::size_t{1} << i;
      }
      mass[mask] += space.weight(w);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      for (std::size_t m = 0; m < subsets; ++m) {
        if (!(m & bit)) mass[m] += mass[m | bit];
      }
    }
    std::vector<Rational> cond(k);
    for (std::size_t i = 0; i < k; ++i) {
      cond[i] = mass[std::size_t{1} << i] / pb;
    }
    for (std::size_t m = 0; m < subsets; ++m) {
      if (std::popcount(m) < 2) continue;
      Rational product(1);
      for (std::size_t i = 0; i < k; ++i) {
        if (m & (std::size_t{1} << i)) product *= cond[i];
      }
      if (mass[m] / pb != product) return false;
    }
  }
  return true;
}

struct EventExpr::Node {
  enum class Op { kLeaf, kComplement, kIntersect, kUnion, kDifference };
  Op op;
  Event leaf;
  std::shared_ptr<const Node> lhs, rhs;
};

EventExpr EventExpr::leaf(Event e) {
  EventExpr x;
  x.node_ = std::make_shared<Node>(Node{Node::Op::kLeaf, std::move(e), nullptr, nullptr});
  return x;
}

EventExpr EventExpr::complement(EventExpr e) {
  EventExpr x;
  x.node_ = std::make_shared<Node>(Node{Node::Op::kComplement, Event(), std::move(e.node_), nullptr});
  return x;
}

EventExpr EventExpr::intersect(EventExpr a, EventExpr b) {
  EventExpr x;
  x.node_ = std::make_shared<Node>(Node{Node::Op::kIntersect, Event(), std::move(a.node_), std::move(b.node_)});
  return x;
}

EventExpr EventExpr::unite(EventExpr a, EventExpr b) {
  EventExpr x;
  x.node_ = std::make_shared<Node>(Node{Node::Op::kUnion, Event(), std::move(a.node_), std::move(b.node_)});
  return x;
}

EventExpr EventExpr::difference(EventExpr a, EventExpr b) {
  EventExpr x;
  x.node_ = std::make_shared<Node>(Node{Node::Op::kDifference, Event(), std::move(a.node_), std::move(b.node_)});
  return x;
}

Event event_algebra(const FiniteProbabilitySpace& space, const EventExpr& expr) {
  using Node = EventExpr::Node;
  auto eval = [&space](auto&& self, const std::shared_ptr<const Node>& node) -> Event {
    if (!node) throw InvalidInput("malformed event expression");
    switch (node->op) {
      case Node::Op::kLeaf:
        space.validate(node->leaf);
        return node->leaf;
      case Node::Op::kComplement:
        return event_complement(self(self, node->lhs), space.size());
      case Node::Op::kIntersect:
        return event_intersection(self(self, node->lhs), self(self, node->rhs));
      case Node::Op::kUnion:
        return event_union(self(self, node->lhs), self(self, node->rhs));
      case Node::Op::kDifference:
        return event_difference(self(self, node->lhs), self(self, node->rhs));
    }
    throw InvalidInput("malformed event expression");
  };
  if (!expr.node_) throw InvalidInput("empty event expression");
  return eval(eval, expr.node_);
}

}  // namespace bcq
