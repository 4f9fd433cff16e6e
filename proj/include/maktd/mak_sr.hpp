#pragma once

#include "maktd/feature_encoder.hpp"
#include "maktd/kalman_mmae.hpp"
#include "maktd/sr_filter.hpp"
#include "maktd/transition.hpp"

namespace maktd {

struct SrParams {
  double gamma = 0.95;
  /// Reward-weight filter: prior scale, process noise, R_theta candidates.
  double p0_scale = 10.0;
  double q_scale = 1e-7;
  MmaeOptions mmae;
  SrOptions sr;
  double explore_greedy_prob = 0.0;
};

struct SrStepDiagnostics {
  double loss = 0.0;             ///< reward-model loss before the update
  double innovation = 0.0;       ///< reward innovation
  double sr_innovation_norm = 0.0;
  Vec weights;                   ///< reward candidate weights
  RgdBranch branch = RgdBranch::kNone;
};

/// Per-agent successor-representation learner: Q(s,a) = theta^T M phi(s,a),
/// where theta (reward weights) is estimated by the multiple-model filter
/// bank and vec(M) by a Kalman filter on phi(s,a) = M g + n with
/// g = phi(s,a) - gamma phi(s', a').
class MakSrLearner {
 public:
  MakSrLearner(FeatureEncoder encoder, std::size_t n_actions, double gamma, MmaeFilter reward_filter,
               SrFilter sr_filter, std::uint64_t seed, double explore_greedy_prob = 0.0);
  MakSrLearner(FeatureEncoder encoder, std::size_t n_actions, const SrParams& params,
               std::uint64_t seed);

  std::size_t n_actions() const { return n_actions_; }
  std::size_t feature_dim() const { return reward_.dim(); }
  double gamma() const { return gamma_; }
  double explore_greedy_prob() const { return explore_greedy_prob_; }
  const MmaeFilter& reward_filter() const { return reward_; }
  MmaeFilter& reward_filter() { return reward_; }
  const SrFilter& sr_filter() const { return sr_; }
  SrFilter& sr_filter() { return sr_; }
  const FeatureEncoder& encoder() const { return encoder_; }
  FeatureEncoder& encoder() { return encoder_; }
  const Vec& theta() const { return reward_.theta(); }
  /// L x L view of the vectorized successor matrix.
  Eigen::Map<const Mat> sr_matrix() const { return sr_.matrix(); }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  FeatureVector features(const VecRef& obs, std::size_t action) const {
    return encoder_.state_action_features(obs, action, n_actions_);
  }

  /// theta^T M phi(s,a) for every action.
  Vec action_values(const VecRef& obs) const;
  double q_from_sr(const VecRef& obs, std::size_t action) const;

  struct SrMeasurement {
    Vec g;
    Vec target;
  };
  /// g = phi(s,a) - gamma phi(s', a'), target = phi(s,a); a' greedy under
  /// q_from_sr (lowest index on ties) unless given; g = phi(s,a) if terminal.
  SrMeasurement sr_measurement_vector(const VecRef& obs, std::size_t action, const VecRef& next_obs,
                                      bool terminal = false,
                                      std::optional<std::size_t> next_action = std::nullopt) const;

  /// Predict + multiple-model update of theta with measurement map phi.
  MmaeStep reward_update(const FeatureVector& phi, double reward);

  /// Predict + Kalman update of vec(M).
  SrStep sr_update(const VecRef& g, const VecRef& target);

  std::size_t select_action_explore(const VecRef& obs);
  std::size_t greedy_action(const VecRef& obs, Rng& rng) const;

  /// measurement vectors -> reward_update -> sr_update -> RBF adaptation.
  SrStepDiagnostics train_step(const Transition& t);

  /// Reward-model loss (phi(s,a)^T theta - r)^2.
  double loss(const VecRef& obs, std::size_t action, double reward) const;

 private:
  FeatureEncoder encoder_;
  std::size_t n_actions_;
  double gamma_;
  MmaeFilter reward_;
  SrFilter sr_;
  Rng rng_;
  double explore_greedy_prob_;
};

}  // namespace maktd
