#pragma once

#include <stdexcept>
#include <string>

namespace mvspec {

// Bad user input: malformed files, invalid parameters, inconsistent config.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical failure that valid inputs should never produce.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvspec
