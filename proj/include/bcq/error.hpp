#pragma once

#include <stdexcept>
#include <string>

namespace bcq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments, events out of range, unparsable input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Space / horizon caps exceeded; the analytic backends must be used instead.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

// A power coefficient query hit a vanishing or degenerate probability.
// The message names the offending quantity.
class UndefinedCoefficient : public Error {
 public:
  using Error::Error;
};

}  // namespace bcq
