#pragma once

#include <stdexcept>
#include <string>

namespace rocket {

// Bad argument, shape or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invariant-violating file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Benchmark refused because a batch would not fit the memory budget.
class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rocket
