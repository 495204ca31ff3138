#pragma once

#include <stdexcept>
#include <string>

namespace ciropt {

// Bad argument shapes, ranges or preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A policy that cannot be sampled from (e.g. zero mass everywhere).
class InvalidPolicy : public std::invalid_argument {
 public:
  explicit InvalidPolicy(const std::string& what) : std::invalid_argument(what) {}
};

// An estimator whose value is not defined for the given data (e.g. SNIPS with zero total weight).
class UndefinedEstimate : public std::domain_error {
 public:
  explicit UndefinedEstimate(const std::string& what) : std::domain_error(what) {}
};

// Input files that do not match the expected columns.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ciropt
