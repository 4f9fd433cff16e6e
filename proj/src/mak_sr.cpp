#include "maktd/mak_sr.hpp"

#include "maktd/mak_td.hpp"

#include <cmath>

namespace maktd {

MakSrLearner::MakSrLearner(FeatureEncoder encoder, std::size_t n_actions, double gamma,
                           MmaeFilter reward_filter, SrFilter sr_filter, std::uint64_t seed,
                           double explore_greedy_prob)
    : encoder_(std::move(encoder)),
      n_actions_(n_actions),
      gamma_(gamma),
      reward_(std::move(reward_filter)),
      sr_(std::move(sr_filter)),
      rng_(seed),
      explore_greedy_prob_(explore_greedy_prob) {
  require(n_actions_ > 0, "learner needs at least one action");
  require(gamma_ >= 0.0 && gamma_ < 1.0, "discount factor must lie in [0, 1)");
  require(reward_.dim() == encoder_.block_size() * n_actions_,
          "reward filter dimension must equal block size times action count");
  require(sr_.feature_dim() == reward_.dim(), "SR and reward filters disagree on feature length");
  require(explore_greedy_prob_ >= 0.0 && explore_greedy_prob_ <= 1.0,
          "greedy mixing probability must lie in [0, 1]");
}

MakSrLearner::MakSrLearner(FeatureEncoder encoder, std::size_t n_actions, const SrParams& params,
                           std::uint64_t seed)
    : MakSrLearner(encoder, n_actions, params.gamma,
                   MmaeFilter::isotropic(encoder.block_size() * n_actions, params.p0_scale,
                                         params.q_scale, params.mmae),
                   SrFilter(encoder.block_size() * n_actions, params.sr), seed,
                   params.explore_greedy_prob) {}

Vec MakSrLearner::action_values(const VecRef& obs) const {
  const Vec state = encoder_.state_features(obs);
  const auto block = state.size();
  // theta^T M phi(s,a) = (M^T theta)_block(a) . phi(s)
  const Vec projected = sr_matrix().transpose() * theta();
  Vec q(static_cast<Eigen::Index>(n_actions_));
  for (std::size_t a = 0; a < n_actions_; ++a) {
    q[static_cast<Eigen::Index>(a)] =
        state.dot(projected.segment(static_cast<Eigen::Index>(a) * block, block));
  }
  return q;
}

double MakSrLearner::q_from_sr(const VecRef& obs, std::size_t action) const {
  const FeatureVector phi = features(obs, action);
  return theta().dot(sr_matrix() * phi.values);
}

MakSrLearner::SrMeasurement MakSrLearner::sr_measurement_vector(
    const VecRef& obs, std::size_t action, const VecRef& next_obs, bool terminal,
    std::optional<std::size_t> next_action) const {
  SrMeasurement out;
  out.target = features(obs, action).values;
  out.g = out.target;
  if (terminal || gamma_ == 0.0) return out;
  const std::size_t next = next_action ? *next_action : argmax_first(action_values(next_obs));
  out.g -= gamma_ * features(next_obs, next).values;
  return out;
}

MmaeStep MakSrLearner::reward_update(const FeatureVector& phi, double reward) {
  reward_.predict();
  return reward_.update(phi.values, reward);
}

SrStep MakSrLearner::sr_update(const VecRef& g, const VecRef& target) {
  sr_.predict();
  return sr_.update(g, target);
}

std::size_t MakSrLearner::select_action_explore(const VecRef& obs) {
  const std::size_t greedy = argmax_random(action_values(obs), rng_);
  if (explore_greedy_prob_ > 0.0 && uniform01(rng_) < explore_greedy_prob_) return greedy;
  return argmax_random(
      exploration_scores(encoder_.state_features(obs), n_actions_, gamma_, greedy), rng_);
}

std::size_t MakSrLearner::greedy_action(const VecRef& obs, Rng& rng) const {
  return argmax_random(action_values(obs), rng);
}

SrStepDiagnostics MakSrLearner::train_step(const Transition& t) {
  require(t.obs.size() == t.next_obs.size(), "observation and next observation differ in length");
  require(std::isfinite(t.reward), "reward must be finite");
  SrStepDiagnostics diag;
  const FeatureVector phi = features(t.obs, t.action);
  diag.loss = maktd::loss(phi, theta(), t.reward);
  const SrMeasurement meas =
      sr_measurement_vector(t.obs, t.action, t.next_obs, t.terminal, t.next_action);
  MmaeStep reward_step = reward_update(phi, t.reward);
  diag.innovation = reward_step.innovation;
  diag.weights = std::move(reward_step.weights);
  diag.sr_innovation_norm = sr_update(meas.g, meas.target).innovation.norm();
  diag.branch = encoder_.adapt(t.obs, t.action, theta(), t.reward);
  return diag;
}

double MakSrLearner::loss(const VecRef& obs, std::size_t action, double reward) const {
  return maktd::loss(features(obs, action), theta(), reward);
}

}  // namespace maktd
