#pragma once

#include <stdexcept>
#include <string>

namespace qspec {

// Malformed user input: bad potential specs, invalid parameters, unknown names.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// The numerics could not deliver (bracket failure, non-finite state, step underflow).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qspec
