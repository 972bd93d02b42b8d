// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssaf {

// Invalid configuration or argument values.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or unsupported external data (WAV files, JSON documents).
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an adaptive filter produces a non-finite weight.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Failures of the analytical models: singular systems, non-finite recursions,
// problems too large for the vectorized path, non-convergence.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssaf
