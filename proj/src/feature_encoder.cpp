#include "maktd/feature_encoder.hpp"

#include <cmath>
#include <string>

namespace maktd {

OneHotStates::OneHotStates(std::size_t n_states) : n_states_(n_states) {
  require(n_states > 0, "tabular encoder needs at least one state");
}

Vec OneHotStates::state_features(const VecRef& obs) const {
  require(obs.size() >= 1, "tabular observation must carry a state index");
  const double raw = obs[0];
  require(raw >= 0.0 && raw < static_cast<double>(n_states_) && std::floor(raw) == raw,
          "state index " + std::to_string(raw) + " out of range");
  Vec out = Vec::Zero(static_cast<Eigen::Index>(n_states_));
  out[static_cast<Eigen::Index>(raw)] = 1.0;
  return out;
}

std::size_t FeatureEncoder::block_size() const {
  return std::visit([](const auto& e) { return e.block_size(); }, impl_);
}

Vec FeatureEncoder::state_features(const VecRef& obs) const {
  return std::visit([&](const auto& e) { return e.state_features(obs); }, impl_);
}

RgdBranch FeatureEncoder::adapt(const VecRef& obs, std::size_t action, const VecRef& theta,
                                double reward) {
  if (auto* b = bank()) return b->rgd_update(obs, action, theta, reward);
  return RgdBranch::kNone;
}

}  // namespace maktd
