#pragma once

#include "maktd/common.hpp"
#include "maktd/rng.hpp"

#include <optional>

namespace maktd {

/// One (s, a, r, s') sample seen by a single agent.
struct Transition {
  Vec obs;
  std::size_t action = 0;
  double reward = 0.0;
  Vec next_obs;
  bool terminal = false;
  /// When set, the bootstrap term uses this next action instead of the
  /// greedy one (evaluation of a fixed policy).
  std::optional<std::size_t> next_action;
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_first(const VecRef& values);

/// Index of the largest entry; ties broken uniformly at random.
std::size_t argmax_random(const VecRef& values, Rng& rng);

}  // namespace maktd
