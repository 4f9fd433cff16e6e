#pragma once

#include "maktd/rbf_features.hpp"

#include <variant>

namespace maktd {

/// Tabular encoding: obs[0] holds a state index, the state feature vector is
/// the matching one-hot vector. Used for small discrete MDPs.
class OneHotStates {
 public:
  explicit OneHotStates(std::size_t n_states);
  std::size_t n_states() const { return n_states_; }
  std::size_t block_size() const { return n_states_; }
  Vec state_features(const VecRef& obs) const;

 private:
  std::size_t n_states_;
};

/// Owns the state feature map of one learner. Only RBF banks adapt.
class FeatureEncoder {
 public:
  FeatureEncoder(RbfBank bank) : impl_(std::move(bank)) {}  // NOLINT(google-explicit-constructor)
  FeatureEncoder(OneHotStates table) : impl_(table) {}      // NOLINT(google-explicit-constructor)

  std::size_t block_size() const;
  Vec state_features(const VecRef& obs) const;
  FeatureVector state_action_features(const VecRef& obs, std::size_t action,
                                      std::size_t n_actions) const {
    return embed_state_action(state_features(obs), action, n_actions);
  }

  /// RGD step on the bank; no-op for tabular features.
  RgdBranch adapt(const VecRef& obs, std::size_t action, const VecRef& theta, double reward);

  const RbfBank* bank() const { return std::get_if<RbfBank>(&impl_); }
  RbfBank* bank() { return std::get_if<RbfBank>(&impl_); }
  const OneHotStates* table() const { return std::get_if<OneHotStates>(&impl_); }

 private:
  std::variant<RbfBank, OneHotStates> impl_;
};

}  // namespace maktd
