#pragma once

#include "maktd/feature_encoder.hpp"
#include "maktd/kalman_mmae.hpp"
#include "maktd/transition.hpp"

namespace maktd {

struct TdParams {
  double gamma = 0.95;
  double p0_scale = 10.0;
  double q_scale = 1e-7;
  MmaeOptions mmae;
  /// Probability of taking the greedy action during training instead of
  /// the information-maximizing one. 0 keeps the pure exploration rule.
  double explore_greedy_prob = 0.0;
};

struct TdStepDiagnostics {
  double loss = 0.0;        ///< (phi^T theta - r)^2 before the update
  double innovation = 0.0;  ///< r - h^T theta_pred
  Vec weights;              ///< candidate weights after the update
  RgdBranch branch = RgdBranch::kNone;
};

/// Per-agent Kalman temporal-difference learner. The reward is treated as a
/// noisy linear measurement r = h^T theta + v of the Q-function weights with
/// h = phi(s,a) - gamma phi(s', a*), and the unknown noise variance is
/// handled by a multiple-model filter bank.
class MakTdLearner {
 public:
  MakTdLearner(FeatureEncoder encoder, std::size_t n_actions, double gamma, MmaeFilter filter,
               std::uint64_t seed, double explore_greedy_prob = 0.0);
  MakTdLearner(FeatureEncoder encoder, std::size_t n_actions, const TdParams& params,
               std::uint64_t seed);

  std::size_t n_actions() const { return n_actions_; }
  std::size_t feature_dim() const { return filter_.dim(); }
  double gamma() const { return gamma_; }
  double explore_greedy_prob() const { return explore_greedy_prob_; }
  const MmaeFilter& filter() const { return filter_; }
  MmaeFilter& filter() { return filter_; }
  const FeatureEncoder& encoder() const { return encoder_; }
  FeatureEncoder& encoder() { return encoder_; }
  const Vec& theta() const { return filter_.theta(); }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  FeatureVector features(const VecRef& obs, std::size_t action) const {
    return encoder_.state_action_features(obs, action, n_actions_);
  }
  /// Q(s, a) = phi(s,a)^T theta for every action.
  Vec action_values(const VecRef& obs) const;

  /// h = phi(s,a) - gamma phi(s', a*), a* greedy under the current weights
  /// (lowest index on ties) unless `next_action` is given; h = phi(s,a) for
  /// terminal transitions.
  Vec measurement_map(const VecRef& obs, std::size_t action, const VecRef& next_obs,
                      bool terminal = false,
                      std::optional<std::size_t> next_action = std::nullopt) const;

  void predict() { filter_.predict(); }
  MmaeStep mmae_update(const VecRef& h, double reward) { return filter_.update(h, reward); }

  /// Picks the action whose surrogate measurement map
  /// phi(s,a) - gamma phi(s, a_greedy) carries the most information.
  std::size_t select_action_explore(const VecRef& obs);

  /// argmax_a Q(s,a), ties broken with `rng`. Does not touch the learner.
  std::size_t greedy_action(const VecRef& obs, Rng& rng) const;

  /// measurement_map -> predict -> mmae_update -> RBF adaptation.
  TdStepDiagnostics train_step(const Transition& t);

  /// (phi(s,a)^T theta - r)^2 under the current weights.
  double loss(const VecRef& obs, std::size_t action, double reward) const;

 private:
  FeatureEncoder encoder_;
  std::size_t n_actions_;
  double gamma_;
  MmaeFilter filter_;
  Rng rng_;
  double explore_greedy_prob_;
};

/// Squared norms of phi(s,a) - gamma phi(s, a_greedy) for every action a,
/// given the state features of s. Shared by both learners.
Vec exploration_scores(const VecRef& state_features, std::size_t n_actions, double gamma,
                       std::size_t greedy);

}  // namespace maktd
