#pragma once

#include <stdexcept>
#include <string>

namespace walklab {

/// A violated precondition or modelling hypothesis (bad table, alpha == 1,
/// wrong dimension, ...). The CLI maps this to exit code 2.
class HypothesisError : public std::invalid_argument {
 public:
  explicit HypothesisError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation that would exceed a configured resource budget (kernel
/// window, exact-moment horizon, cube evaluation count, integer range).
/// The CLI maps this to exit code 3.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

class WindowOverflow : public BudgetError {
 public:
  explicit WindowOverflow(const std::string& what) : BudgetError(what) {}
};

}  // namespace walklab
