#include "maktd/particle_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maktd {

namespace {

AgentSpec predator() { return {Role::kPredator, 1.0, 3.0, 0.075, 0}; }
AgentSpec prey() { return {Role::kPrey, 1.3, 4.0, 0.05, 0}; }
AgentSpec cooperator() { return {Role::kCooperator, 1.0, 3.0, 0.05, 0}; }
AgentSpec competitor() { return {Role::kCompetitor, 1.0, 3.0, 0.05, 0}; }

const Eigen::Vector2d kActionForce[kNumActions] = {
    {0.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};

std::size_t count_role(const std::vector<AgentSpec>& agents, Role role) {
  return static_cast<std::size_t>(
      std::count_if(agents.begin(), agents.end(), [&](const AgentSpec& a) { return a.role == role; }));
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kPredator: return "predator";
    case Role::kPrey: return "prey";
    case Role::kCooperator: return "cooperator";
    case Role::kCompetitor: return "competitor";
  }
  return "unknown";
}

std::vector<ScenarioInfo> scenario_registry() {
  std::vector<ScenarioInfo> out;
  for (const char* name :
       {"simple_cooperation", "simple_competition", "predator_prey_1v2", "predator_prey_2v1"}) {
    const ParticleWorld w = ParticleWorld::make(name, 0);
    // Group consecutive agents of the same role: "1 predator (obs 12), 2 prey (obs 10)".
    std::string summary;
    std::size_t i = 0;
    while (i < w.n_agents()) {
      std::size_t j = i;
      while (j < w.n_agents() && w.agents()[j].role == w.agents()[i].role &&
             w.agents()[j].obs_dim == w.agents()[i].obs_dim) {
        ++j;
      }
      const std::size_t n = j - i;
      std::string role(role_name(w.agents()[i].role));
      if (n > 1 && w.agents()[i].role != Role::kPrey) role += "s";
      if (!summary.empty()) summary += ", ";
      summary += std::to_string(n) + " " + role + " (obs " + std::to_string(w.agents()[i].obs_dim) + ")";
      i = j;
    }
    if (w.state().landmarks.size() == 1) summary += ", 1 landmark";
    out.push_back({name, summary});
  }
  return out;
}

ParticleWorld ParticleWorld::make(std::string_view scenario, std::uint64_t seed, WorldParams params) {
  require(params.half_width > 0.0 && params.dt > 0.0, "arena size and time step must be positive");
  require(params.damping >= 0.0 && params.damping < 1.0, "damping must lie in [0, 1)");
  require(params.step_cap > 0, "step cap must be positive");
  if (scenario == "simple_cooperation") {
    return ParticleWorld(std::string(scenario), {cooperator(), cooperator()}, 1, false, seed, params);
  }
  if (scenario == "simple_competition") {
    return ParticleWorld(std::string(scenario), {competitor(), competitor()}, 1, false, seed, params);
  }
  if (scenario == "predator_prey_1v2") {
    return ParticleWorld(std::string(scenario), {predator(), prey(), prey()}, 0, true, seed, params);
  }
  if (scenario == "predator_prey_2v1") {
    return ParticleWorld(std::string(scenario), {predator(), predator(), prey()}, 0, true, seed, params);
  }
  throw InvalidInput("unknown scenario '" + std::string(scenario) + "'");
}

ParticleWorld::ParticleWorld(std::string scenario, std::vector<AgentSpec> agents,
                             std::size_t n_landmarks, bool predator_prey, std::uint64_t seed,
                             WorldParams params)
    : scenario_(std::move(scenario)),
      agents_(std::move(agents)),
      n_landmarks_(n_landmarks),
      predator_prey_(predator_prey),
      params_(params),
      rng_(seed) {
  const std::size_t n_prey = count_role(agents_, Role::kPrey);
  for (auto& a : agents_) {
    a.obs_dim = 4 + 2 * n_landmarks_ + 2 * (agents_.size() - 1);
    if (predator_prey_) a.obs_dim += 2 * (n_prey - (a.role == Role::kPrey ? 1 : 0));
  }
  reset();
}

void ParticleWorld::reset() {
  const double hw = params_.half_width;
  auto draw = [&]() {
    const double x = -hw + 2.0 * hw * uniform01(rng_);
    const double y = -hw + 2.0 * hw * uniform01(rng_);
    return Eigen::Vector2d(x, y);
  };
  state_ = WorldState{};
  state_.bounds = hw;
  state_.dt = params_.dt;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    state_.positions.push_back(draw());
    state_.velocities.push_back(Eigen::Vector2d::Zero());
  }
  for (std::size_t l = 0; l < n_landmarks_; ++l) state_.landmarks.push_back(draw());
}

void ParticleWorld::set_state(WorldState state) {
  require(state.positions.size() == agents_.size() && state.velocities.size() == agents_.size(),
          "state must hold one position and velocity per agent");
  require(state.landmarks.size() == n_landmarks_, "state has the wrong number of landmarks");
  state_ = std::move(state);
  state_.bounds = params_.half_width;
  state_.dt = params_.dt;
}

bool ParticleWorld::out_of_bounds(const Eigen::Vector2d& p) const {
  return std::abs(p.x()) > params_.half_width || std::abs(p.y()) > params_.half_width;
}

StepOutcome ParticleWorld::step(std::span<const std::size_t> joint_action) {
  require(joint_action.size() == agents_.size(), "need exactly one action per agent");
  for (std::size_t a : joint_action) {
    require(a < kNumActions, "action index " + std::to_string(a) + " out of range [0, 5)");
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const AgentSpec& spec = agents_[i];
    Eigen::Vector2d& v = state_.velocities[i];
    v = (1.0 - params_.damping) * v + kActionForce[joint_action[i]] * spec.accel * params_.dt;
    const double speed = v.norm();
    if (speed > spec.max_speed) v *= spec.max_speed / speed;
    state_.positions[i] += v * params_.dt;
  }
  ++state_.step_count;

  StepOutcome out;
  out.rewards = shaping_rewards();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (out_of_bounds(state_.positions[i])) {
      out.rewards[i] -= params_.out_of_bounds_penalty;
      out.events.push_back({EventKind::kOutOfBounds, i, i});
      out.done = true;
    }
  }
  if (predator_prey_) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (agents_[i].role != Role::kPredator) continue;
      for (std::size_t j = 0; j < agents_.size(); ++j) {
        if (agents_[j].role != Role::kPrey) continue;
        const double d = (state_.positions[i] - state_.positions[j]).norm();
        if (d < agents_[i].radius + agents_[j].radius) {
          out.rewards[i] += params_.capture_reward;
          out.rewards[j] -= params_.capture_reward;
          out.events.push_back({EventKind::kInterception, i, j});
          out.done = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    for (std::size_t l = 0; l < state_.landmarks.size(); ++l) {
      if ((state_.positions[i] - state_.landmarks[l]).norm() < agents_[i].radius) {
        out.events.push_back({EventKind::kLandmarkReach, i, l});
      }
    }
  }
  if (state_.step_count >= params_.step_cap) out.done = true;
  out.observations = observe_all();
  return out;
}

Vec ParticleWorld::observe(std::size_t agent) const {
  require(agent < agents_.size(), "agent index out of range");
  const AgentSpec& self = agents_[agent];
  const Eigen::Vector2d& p = state_.positions[agent];
  Vec obs(static_cast<Eigen::Index>(self.obs_dim));
  Eigen::Index k = 0;
  auto put = [&](const Eigen::Vector2d& v) {
    obs[k++] = v.x();
    obs[k++] = v.y();
  };
  put(state_.velocities[agent]);
  put(p);
  for (const auto& l : state_.landmarks) put(l - p);
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j != agent) put(state_.positions[j] - p);
  }
  if (predator_prey_) {
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j != agent && agents_[j].role == Role::kPrey) put(state_.velocities[j]);
    }
  }
  return obs;
}

std::vector<Vec> ParticleWorld::observe_all() const {
  std::vector<Vec> out;
  out.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) out.push_back(observe(i));
  return out;
}

std::vector<double> ParticleWorld::shaping_rewards() const {
  const double c = params_.shaping;
  const auto& pos = state_.positions;
  std::vector<double> r(agents_.size(), 0.0);
  auto nearest = [&](std::size_t i, Role role) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (agents_[j].role == role) best = std::min(best, (pos[i] - pos[j]).norm());
    }
    return std::isfinite(best) ? best : 0.0;
  };
  if (predator_prey_) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (agents_[i].role == Role::kPredator) r[i] = -c * nearest(i, Role::kPrey);
      if (agents_[i].role == Role::kPrey) r[i] = c * nearest(i, Role::kPredator);
    }
    return r;
  }
  if (state_.landmarks.empty()) return r;
  const Eigen::Vector2d& goal = state_.landmarks.front();
  if (agents_.front().role == Role::kCooperator) {
    double mean = 0.0;
    for (const auto& p : pos) mean += (p - goal).norm();
    mean /= static_cast<double>(pos.size());
    std::fill(r.begin(), r.end(), -c * mean);
    return r;
  }
  // Competition: zero-sum in each agent's distance advantage over the others.
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const double own = (pos[i] - goal).norm();
    double others = 0.0;
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j != i) others += (pos[j] - goal).norm();
    }
    others /= static_cast<double>(agents_.size() - 1);
    r[i] = c * (others - own);
  }
  return r;
}

std::pair<Vec, Vec> ParticleWorld::observation_bounds(std::size_t agent) const {
  require(agent < agents_.size(), "agent index out of range");
  const double hw = params_.half_width;
  const AgentSpec& self = agents_[agent];
  Vec high(static_cast<Eigen::Index>(self.obs_dim));
  Eigen::Index k = 0;
  auto put = [&](double v) {
    high[k++] = v;
    high[k++] = v;
  };
  put(self.max_speed);
  put(hw);
  for (std::size_t l = 0; l < n_landmarks_; ++l) put(2.0 * hw);
  for (std::size_t j = 0; j + 1 < agents_.size(); ++j) put(2.0 * hw);
  if (predator_prey_) {
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j != agent && agents_[j].role == Role::kPrey) put(agents_[j].max_speed);
    }
  }
  return {-high, high};
}

}  // namespace maktd
