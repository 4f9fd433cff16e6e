#include "maktd/harness.hpp"

#include "maktd/metrics_io.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <numeric>
#include <thread>

namespace maktd {

std::string_view phase_name(Phase p) { return p == Phase::kTrain ? "train" : "test"; }

double EpisodeRecord::mean_return() const {
  return returns.empty() ? 0.0
                         : std::accumulate(returns.begin(), returns.end(), 0.0) /
                               static_cast<double>(returns.size());
}

double EpisodeRecord::mean_loss() const {
  return losses.empty() ? 0.0
                        : std::accumulate(losses.begin(), losses.end(), 0.0) /
                              static_cast<double>(losses.size());
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index) {
  return hash64(master_seed, run_index);
}
std::uint64_t agent_seed(std::uint64_t run_seed, std::size_t agent_index) {
  return hash64(run_seed, agent_index);
}
std::uint64_t world_seed(std::uint64_t run_seed) { return hash64(run_seed, 0x776f726c64ULL); }
std::uint64_t test_seed(std::uint64_t run_seed) { return hash64(run_seed, 0x74657374ULL); }

namespace {

WorldParams world_params(const RunConfig& c) { return c.world; }

MmaeOptions mmae_options(const RunConfig& c) {
  MmaeOptions o;
  o.r_candidates = c.r_candidates;
  o.likelihood = c.likelihood;
  o.memory = c.weight_memory;
  o.log_weight_floor = c.log_weight_floor;
  return o;
}

SrOptions sr_options(const RunConfig& c) {
  SrOptions o;
  o.p0_scale = c.sr_p0_scale;
  o.q_scale = c.sr_q_scale;
  o.r_scale = c.sr_r_scale;
  o.covariance = c.sr_covariance;
  o.r_candidates = c.sr_r_candidates;
  o.likelihood = c.likelihood;
  o.memory = c.weight_memory;
  o.log_weight_floor = c.log_weight_floor;
  return o;
}

bool terminating(const StepOutcome& out) {
  for (const Event& e : out.events) {
    if (e.kind == EventKind::kOutOfBounds || e.kind == EventKind::kInterception) return true;
  }
  return false;
}

void count_events(const StepOutcome& out, EpisodeRecord& rec) {
  for (const Event& e : out.events) {
    if (e.kind == EventKind::kInterception) ++rec.collisions;
    if (e.kind == EventKind::kOutOfBounds) ++rec.out_of_bounds;
  }
}

void check_finite(const EpisodeRecord& rec) {
  for (std::size_t i = 0; i < rec.returns.size(); ++i) {
    if (!std::isfinite(rec.returns[i]) || !std::isfinite(rec.losses[i])) {
      throw RunAborted("non-finite metric in " + std::string(phase_name(rec.phase)) + " episode " +
                       std::to_string(rec.episode) + " for agent " + std::to_string(i) +
                       " (return " + std::to_string(rec.returns[i]) + ", loss " +
                       std::to_string(rec.losses[i]) + ")");
    }
  }
}

}  // namespace

std::vector<AgentLearner> make_learners(const RunConfig& config, const ParticleWorld& world,
                                        std::uint64_t run_seed) {
  std::vector<AgentLearner> learners;
  learners.reserve(world.n_agents());
  const RbfRates rates{config.rate_mean, config.rate_cov, config.cov_floor};
  for (std::size_t i = 0; i < world.n_agents(); ++i) {
    const std::uint64_t seed = agent_seed(run_seed, i);
    Rng init(hash64(seed, 1));
    const auto [low, high] = world.observation_bounds(i);
    RbfBank bank = RbfBank::random(config.rbf_count, low, high, init, rates);
    if (config.learner == LearnerKind::kMakTd) {
      TdParams p;
      p.gamma = config.gamma;
      p.p0_scale = config.p0_scale;
      p.q_scale = config.q_scale;
      p.mmae = mmae_options(config);
      p.explore_greedy_prob = config.explore_greedy_prob;
      learners.emplace_back(std::in_place_type<MakTdLearner>, std::move(bank), kNumActions, p, seed);
    } else {
      SrParams p;
      p.gamma = config.gamma;
      p.p0_scale = config.p0_scale;
      p.q_scale = config.q_scale;
      p.mmae = mmae_options(config);
      p.sr = sr_options(config);
      p.explore_greedy_prob = config.explore_greedy_prob;
      learners.emplace_back(std::in_place_type<MakSrLearner>, std::move(bank), kNumActions, p, seed);
    }
  }
  return learners;
}

TrainingResult run_training(const RunConfig& config, std::size_t run_index, const RecordSink& sink) {
  config.validate();
  const std::uint64_t seed = run_seed(config.master_seed, run_index);
  ParticleWorld world = ParticleWorld::make(config.scenario, world_seed(seed), world_params(config));
  TrainingResult result;
  result.learners = make_learners(config, world, seed);
  const std::size_t n = world.n_agents();
  std::vector<std::size_t> actions(n);

  for (std::size_t ep = 0; ep < config.episodes_train; ++ep) {
    world.reset();
    std::vector<Vec> obs = world.observe_all();
    EpisodeRecord rec;
    rec.episode = ep;
    rec.phase = Phase::kTrain;
    rec.returns.assign(n, 0.0);
    rec.losses.assign(n, 0.0);
    double discount = 1.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        actions[i] = std::visit([&](auto& l) { return l.select_action_explore(obs[i]); },
                                result.learners[i]);
      }
      StepOutcome out = world.step(actions);
      const bool terminal = terminating(out);
      for (std::size_t i = 0; i < n; ++i) {
        Transition t{obs[i], actions[i], out.rewards[i], out.observations[i], terminal, std::nullopt};
        rec.losses[i] += std::visit([&](auto& l) { return l.train_step(t).loss; }, result.learners[i]);
        rec.returns[i] += discount * out.rewards[i];
      }
      discount *= config.gamma;
      ++rec.steps;
      count_events(out, rec);
      obs = std::move(out.observations);
      if (out.done) break;
    }
    check_finite(rec);
    if (sink) sink(rec);
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::vector<EpisodeRecord> run_testing(const RunConfig& config,
                                       const std::vector<AgentLearner>& learners,
                                       std::size_t run_index, const RecordSink& sink) {
  config.validate();
  const std::uint64_t seed = run_seed(config.master_seed, run_index);
  // A distinct world stream from training so test episodes are fresh draws.
  ParticleWorld world =
      ParticleWorld::make(config.scenario, hash64(world_seed(seed), 1), world_params(config));
  const std::size_t n = world.n_agents();
  require(learners.size() == n, "need one learner per agent");
  Rng tie_break(test_seed(seed));
  std::vector<std::size_t> actions(n);
  std::vector<EpisodeRecord> records;
  records.reserve(config.episodes_test);

  for (std::size_t ep = 0; ep < config.episodes_test; ++ep) {
    world.reset();
    std::vector<Vec> obs = world.observe_all();
    EpisodeRecord rec;
    rec.episode = ep;
    rec.phase = Phase::kTest;
    rec.returns.assign(n, 0.0);
    rec.losses.assign(n, 0.0);
    double discount = 1.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        actions[i] =
            std::visit([&](const auto& l) { return l.greedy_action(obs[i], tie_break); }, learners[i]);
      }
      StepOutcome out = world.step(actions);
      for (std::size_t i = 0; i < n; ++i) {
        rec.losses[i] += std::visit(
            [&](const auto& l) { return l.loss(obs[i], actions[i], out.rewards[i]); }, learners[i]);
        rec.returns[i] += discount * out.rewards[i];
      }
      discount *= config.gamma;
      ++rec.steps;
      count_events(out, rec);
      obs = std::move(out.observations);
      if (out.done) break;
    }
    check_finite(rec);
    if (sink) sink(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

RunAggregate aggregate(const std::vector<EpisodeRecord>& records) {
  RunAggregate agg;
  if (records.empty()) return agg;
  for (const auto& r : records) {
    agg.loss += r.mean_loss();
    agg.reward += r.mean_return();
    agg.steps += static_cast<double>(r.steps);
  }
  const auto count = static_cast<double>(records.size());
  agg.loss /= count;
  agg.reward /= count;
  agg.steps /= count;
  return agg;
}

SummaryRow summarize(const std::string& scenario, LearnerKind learner,
                     const std::vector<RunAggregate>& runs, std::vector<std::uint64_t> seeds) {
  SummaryRow row;
  row.scenario = scenario;
  row.learner = std::string(learner_name(learner));
  row.seeds = std::move(seeds);
  if (runs.empty()) return row;
  const auto count = static_cast<double>(runs.size());
  auto stats = [&](auto field, double& mean, double& sd) {
    mean = 0.0;
    for (const auto& r : runs) mean += field(r);
    mean /= count;
    double var = 0.0;
    for (const auto& r : runs) var += (field(r) - mean) * (field(r) - mean);
    sd = std::sqrt(var / count);
  };
  stats([](const RunAggregate& r) { return r.loss; }, row.loss_mean, row.loss_std);
  stats([](const RunAggregate& r) { return r.reward; }, row.reward_mean, row.reward_std);
  stats([](const RunAggregate& r) { return r.steps; }, row.steps_mean, row.steps_std);
  return row;
}

MonteCarloResult monte_carlo(const RunConfig& config, bool write_metrics) {
  config.validate();
  const std::size_t runs = config.mc_runs;
  MonteCarloResult result;
  result.train_records.resize(runs);
  result.test_records.resize(runs);
  result.runs.resize(runs);
  std::vector<std::uint64_t> seeds(runs);
  std::vector<std::exception_ptr> errors(runs);
  const std::size_t n_agents = ParticleWorld::make(config.scenario, 0, config.world).n_agents();
  if (write_metrics) std::filesystem::create_directories(config.out_dir);

  auto work = [&](std::size_t r) {
    try {
      seeds[r] = run_seed(config.master_seed, r);
      std::unique_ptr<MetricsWriter> train_out;
      std::unique_ptr<MetricsWriter> test_out;
      RecordSink train_sink;
      RecordSink test_sink;
      if (write_metrics) {
        const auto dir = std::filesystem::path(config.out_dir);
        const std::string stem = "run_" + std::to_string(r);
        train_out = std::make_unique<MetricsWriter>(dir / (stem + "_train.csv"), n_agents);
        test_out = std::make_unique<MetricsWriter>(dir / (stem + "_test.csv"), n_agents);
        train_sink = train_out->sink();
        test_sink = test_out->sink();
      }
      TrainingResult trained = run_training(config, r, train_sink);
      result.test_records[r] = run_testing(config, trained.learners, r, test_sink);
      result.train_records[r] = std::move(trained.records);
      result.runs[r] = aggregate(result.test_records[r].empty() ? result.train_records[r]
                                                                : result.test_records[r]);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };

  std::size_t workers = config.threads;
  if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, runs);
  if (workers <= 1) {
    for (std::size_t r = 0; r < runs; ++r) work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < runs; r = next++) work(r);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.summary = summarize(config.scenario, config.learner, result.runs, seeds);
  return result;
}

}  // namespace maktd
