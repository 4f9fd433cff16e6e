#include "maktd/mak_td.hpp"

#include <cmath>

namespace maktd {

MakTdLearner::MakTdLearner(FeatureEncoder encoder, std::size_t n_actions, double gamma,
                           MmaeFilter filter, std::uint64_t seed, double explore_greedy_prob)
    : encoder_(std::move(encoder)),
      n_actions_(n_actions),
      gamma_(gamma),
      filter_(std::move(filter)),
      rng_(seed),
      explore_greedy_prob_(explore_greedy_prob) {
  require(n_actions_ > 0, "learner needs at least one action");
  require(gamma_ >= 0.0 && gamma_ < 1.0, "discount factor must lie in [0, 1)");
  require(filter_.dim() == encoder_.block_size() * n_actions_,
          "filter dimension must equal block size times action count");
  require(explore_greedy_prob_ >= 0.0 && explore_greedy_prob_ <= 1.0,
          "greedy mixing probability must lie in [0, 1]");
}

MakTdLearner::MakTdLearner(FeatureEncoder encoder, std::size_t n_actions, const TdParams& params,
                           std::uint64_t seed)
    : MakTdLearner(encoder, n_actions, params.gamma,
                   MmaeFilter::isotropic(encoder.block_size() * n_actions, params.p0_scale,
                                         params.q_scale, params.mmae),
                   seed, params.explore_greedy_prob) {}

Vec MakTdLearner::action_values(const VecRef& obs) const {
  const Vec state = encoder_.state_features(obs);
  const auto block = state.size();
  Vec q(static_cast<Eigen::Index>(n_actions_));
  for (std::size_t a = 0; a < n_actions_; ++a) {
    q[static_cast<Eigen::Index>(a)] =
        state.dot(theta().segment(static_cast<Eigen::Index>(a) * block, block));
  }
  return q;
}

Vec MakTdLearner::measurement_map(const VecRef& obs, std::size_t action, const VecRef& next_obs,
                                  bool terminal, std::optional<std::size_t> next_action) const {
  Vec h = features(obs, action).values;
  if (terminal || gamma_ == 0.0) return h;
  const std::size_t next = next_action ? *next_action : argmax_first(action_values(next_obs));
  h -= gamma_ * features(next_obs, next).values;
  return h;
}

Vec exploration_scores(const VecRef& state_features, std::size_t n_actions, double gamma,
                       std::size_t greedy) {
  const Vec greedy_phi = embed_state_action(state_features, greedy, n_actions).values;
  Vec scores(static_cast<Eigen::Index>(n_actions));
  for (std::size_t a = 0; a < n_actions; ++a) {
    const Vec h = embed_state_action(state_features, a, n_actions).values - gamma * greedy_phi;
    scores[static_cast<Eigen::Index>(a)] = h.squaredNorm();
  }
  return scores;
}

std::size_t MakTdLearner::select_action_explore(const VecRef& obs) {
  const std::size_t greedy = argmax_random(action_values(obs), rng_);
  if (explore_greedy_prob_ > 0.0 && uniform01(rng_) < explore_greedy_prob_) return greedy;
  return argmax_random(
      exploration_scores(encoder_.state_features(obs), n_actions_, gamma_, greedy), rng_);
}

std::size_t MakTdLearner::greedy_action(const VecRef& obs, Rng& rng) const {
  return argmax_random(action_values(obs), rng);
}

TdStepDiagnostics MakTdLearner::train_step(const Transition& t) {
  require(t.obs.size() == t.next_obs.size(), "observation and next observation differ in length");
  require(std::isfinite(t.reward), "reward must be finite");
  TdStepDiagnostics diag;
  diag.loss = loss(t.obs, t.action, t.reward);
  const Vec h = measurement_map(t.obs, t.action, t.next_obs, t.terminal, t.next_action);
  predict();
  MmaeStep step = mmae_update(h, t.reward);
  diag.innovation = step.innovation;
  diag.weights = std::move(step.weights);
  diag.branch = encoder_.adapt(t.obs, t.action, theta(), t.reward);
  return diag;
}

double MakTdLearner::loss(const VecRef& obs, std::size_t action, double reward) const {
  return maktd::loss(features(obs, action), theta(), reward);
}

}  // namespace maktd
