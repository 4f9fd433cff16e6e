#pragma once

#include "maktd/config.hpp"
#include "maktd/mak_sr.hpp"
#include "maktd/mak_td.hpp"
#include "maktd/particle_env.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace maktd {

using AgentLearner = std::variant<MakTdLearner, MakSrLearner>;

enum class Phase { kTrain, kTest };
std::string_view phase_name(Phase p);

/// Outcome of one episode for all agents.
struct EpisodeRecord {
  std::size_t episode = 0;
  Phase phase = Phase::kTrain;
  std::vector<double> returns;  ///< per agent, sum_k gamma^k r_k
  std::vector<double> losses;   ///< per agent, sum of per-step squared residuals
  std::size_t steps = 0;
  std::size_t collisions = 0;  ///< interception events
  std::size_t out_of_bounds = 0;

  double mean_return() const;
  double mean_loss() const;
  bool operator==(const EpisodeRecord&) const = default;
};

using RecordSink = std::function<void(const EpisodeRecord&)>;

/// Raised when a run produces a non-finite metric.
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seed derivations. Each is a pure function of its inputs so runs can
/// execute in any order or in parallel.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index);
std::uint64_t agent_seed(std::uint64_t run_seed, std::size_t agent_index);
std::uint64_t world_seed(std::uint64_t run_seed);
std::uint64_t test_seed(std::uint64_t run_seed);

/// Fresh learners (RBF banks drawn from each agent's observation box).
std::vector<AgentLearner> make_learners(const RunConfig& config, const ParticleWorld& world,
                                        std::uint64_t run_seed);

struct TrainingResult {
  std::vector<EpisodeRecord> records;
  std::vector<AgentLearner> learners;
};

/// Decentralized learning phase: every agent explores with its own rule and
/// learns only from its own (obs, action, reward, next_obs).
TrainingResult run_training(const RunConfig& config, std::size_t run_index = 0,
                            const RecordSink& sink = {});

/// Greedy evaluation with frozen learners.
std::vector<EpisodeRecord> run_testing(const RunConfig& config,
                                       const std::vector<AgentLearner>& learners,
                                       std::size_t run_index = 0, const RecordSink& sink = {});

/// Per-run averages over a record stream.
struct RunAggregate {
  double loss = 0.0;    ///< mean over episodes of the agent-averaged episode loss
  double reward = 0.0;  ///< mean over episodes of the agent-averaged discounted return
  double steps = 0.0;
};
RunAggregate aggregate(const std::vector<EpisodeRecord>& records);

struct SummaryRow {
  std::string scenario;
  std::string learner;
  double loss_mean = 0.0;
  double loss_std = 0.0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double steps_mean = 0.0;
  double steps_std = 0.0;
  std::vector<std::uint64_t> seeds;
};

/// Mean and population standard deviation of per-run aggregates.
SummaryRow summarize(const std::string& scenario, LearnerKind learner,
                     const std::vector<RunAggregate>& runs, std::vector<std::uint64_t> seeds);

struct MonteCarloResult {
  SummaryRow summary;
  std::vector<RunAggregate> runs;
  std::vector<std::vector<EpisodeRecord>> train_records;
  std::vector<std::vector<EpisodeRecord>> test_records;
};

/// Independent train+test repetitions with derived seeds, run on
/// `config.threads` workers. Aggregates use the test phase when it exists,
/// otherwise training. When `write_metrics` is set, per-run CSVs go to
/// config.out_dir.
MonteCarloResult monte_carlo(const RunConfig& config, bool write_metrics = false);

}  // namespace maktd
