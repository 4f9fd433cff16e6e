#include "maktd/transition.hpp"

#include <vector>

namespace maktd {

std::size_t argmax_first(const VecRef& values) {
  require(values.size() > 0, "argmax of an empty vector");
  Eigen::Index best = 0;
  values.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

std::size_t argmax_random(const VecRef& values, Rng& rng) {
  require(values.size() > 0, "argmax of an empty vector");
  const double top = values.maxCoeff();
  std::vector<std::size_t> ties;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] == top) ties.push_back(static_cast<std::size_t>(i));
  }
  if (ties.size() == 1) return ties.front();
  return ties[uniform_index(rng, ties.size())];
}

}  // namespace maktd
