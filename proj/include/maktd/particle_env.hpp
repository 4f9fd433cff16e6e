#pragma once

#include "maktd/common.hpp"
#include "maktd/rng.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maktd {

enum class Role { kPredator, kPrey, kCooperator, kCompetitor };

std::string_view role_name(Role role);

struct AgentSpec {
  Role role = Role::kPredator;
  double max_speed = 1.0;  ///< units / s
  double accel = 3.0;      ///< units / s^2
  double radius = 0.05;
  std::size_t obs_dim = 0;
};

/// Physical and reward constants shared by every scenario.
struct WorldParams {
  double half_width = 1.0;
  double dt = 0.01;
  double damping = 0.25;
  double shaping = 0.1;  ///< c_shape
  double out_of_bounds_penalty = 50.0;
  double capture_reward = 100.0;
  std::size_t step_cap = 100;
};

struct WorldState {
  std::vector<Eigen::Vector2d> positions;
  std::vector<Eigen::Vector2d> velocities;
  std::vector<Eigen::Vector2d> landmarks;
  std::size_t step_count = 0;
  double bounds = 1.0;  ///< half-width of the square arena
  double dt = 0.01;
};

enum class EventKind { kOutOfBounds, kInterception, kLandmarkReach };

struct Event {
  EventKind kind = EventKind::kOutOfBounds;
  std::size_t agent = 0;  ///< offender, predator, or agent reaching a landmark
  std::size_t other = 0;  ///< prey for interceptions, landmark index otherwise
  bool operator==(const Event&) const = default;
};

struct StepOutcome {
  std::vector<Vec> observations;
  std::vector<double> rewards;
  bool done = false;
  std::vector<Event> events;
};

/// Discrete actions: 0 stay, 1 left, 2 right, 3 up, 4 down.
inline constexpr std::size_t kNumActions = 5;

struct ScenarioInfo {
  std::string name;
  std::string summary;  ///< e.g. "1 predator (obs 12), 2 prey (obs 10)"
};

/// The four presets, in a fixed order.
std::vector<ScenarioInfo> scenario_registry();

/// Two-dimensional world of damped point masses with discrete actions.
/// Fully determined by its seed and the joint-action sequence.
class ParticleWorld {
 public:
  /// Throws InvalidInput for an unknown scenario name.
  static ParticleWorld make(std::string_view scenario, std::uint64_t seed, WorldParams params = {});

  const std::string& scenario() const { return scenario_; }
  const WorldParams& params() const { return params_; }
  const WorldState& state() const { return state_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  std::size_t n_agents() const { return agents_.size(); }
  bool predator_prey() const { return predator_prey_; }

  /// Re-draws agent positions uniformly inside the arena, zero velocities.
  void reset();

  /// Places agents explicitly (tests and replays).
  void set_state(WorldState state);

  StepOutcome step(std::span<const std::size_t> joint_action);

  Vec observe(std::size_t agent) const;
  std::vector<Vec> observe_all() const;

  /// Per-step distance shaping for the current positions.
  std::vector<double> shaping_rewards() const;

  /// Box that contains every in-bounds observation of `agent`.
  std::pair<Vec, Vec> observation_bounds(std::size_t agent) const;

 private:
  ParticleWorld(std::string scenario, std::vector<AgentSpec> agents, std::size_t n_landmarks,
                bool predator_prey, std::uint64_t seed, WorldParams params);

  bool out_of_bounds(const Eigen::Vector2d& p) const;

  std::string scenario_;
  std::vector<AgentSpec> agents_;
  std::size_t n_landmarks_;
  bool predator_prey_;
  WorldParams params_;
  Rng rng_;
  WorldState state_;
};

}  // namespace maktd
