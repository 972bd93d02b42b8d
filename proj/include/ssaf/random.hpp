// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#pragma once

#include <cstdint>
#include <random>

namespace ssaf {

using Rng = std::mt19937_64;

// Independent random streams consumed inside one trial.
enum class StreamRole : std::uint64_t {
  kSystem = 1,
  kInput = 2,
  kNoise = 3,
  kNearEnd = 4,
  kEnsemble = 5,
  kProbe = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (master seed, trial index, stream role). Each component is
// folded through splitmix64, so nearby masters and trials give unrelated
// streams and the result never depends on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, StreamRole role);

}  // namespace ssaf
