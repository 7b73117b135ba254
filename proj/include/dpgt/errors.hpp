#pragma once

#include <stdexcept>
#include <string>

namespace dpgt {

// Base class for every error thrown by this library. Subclasses are named
// after the violated precondition or assumption so callers can dispatch on
// the failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DPGT_ERROR(NAME)                                        \
  class NAME : public Error {                                   \
   public:                                                      \
    explicit NAME(const std::string& msg) : Error(msg) {}       \
  }

// Weight-matrix validation.
DPGT_ERROR(NegativeEntry);
DPGT_ERROR(NotSymmetric);
DPGT_ERROR(NotDoublyStochastic);
DPGT_ERROR(NonPositiveDiagonal);
DPGT_ERROR(Disconnected);
DPGT_ERROR(OutOfRange);

// Objectives.
DPGT_ERROR(EmptyTargets);
DPGT_ERROR(SingularSystem);

// Engine.
DPGT_ERROR(DimensionMismatch);

// Privacy accounting.
DPGT_ERROR(IndexError);
DPGT_ERROR(HypothesisViolated);

// Convergence bounds.
DPGT_ERROR(NoCaseMatches);
DPGT_ERROR(NotContractive);
DPGT_ERROR(StepsizeTooLarge);

// Experiment harness.
DPGT_ERROR(InsufficientData);
DPGT_ERROR(ConfigError);

#undef DPGT_ERROR

}  // namespace dpgt
