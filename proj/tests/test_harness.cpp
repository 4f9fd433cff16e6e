#include "maktd/checkpoint.hpp"
#include "maktd/harness.hpp"
#include "maktd/metrics_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace maktd;

namespace {

RunConfig small(LearnerKind kind = LearnerKind::kMakTd) {
  RunConfig c;
  c.learner = kind;
  c.episodes_train = 4;
  c.episodes_test = 3;
  c.rbf_count = 3;
  c.world.step_cap = 20;
  c.master_seed = 11;
  c.threads = 1;
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("one training episode gives one record") {
  RunConfig c = small();
  c.episodes_train = 1;
  const TrainingResult r = run_training(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].phase == Phase::kTrain);
  CHECK(r.records[0].episode == 0);
  CHECK(r.learners.size() == 3);
}

TEST_CASE("training and testing are deterministic") {
  for (LearnerKind kind : {LearnerKind::kMakTd, LearnerKind::kMakSr}) {
    const RunConfig c = small(kind);
    const TrainingResult a = run_training(c);
    const TrainingResult b = run_training(c);
    CHECK(a.records == b.records);
    CHECK(run_testing(c, a.learners) == run_testing(c, b.learners));
    RunConfig other = c;
    other.master_seed = 12;
    CHECK(run_training(other).records != a.records);
  }
}

TEST_CASE("records respect the step cap and count events") {
  RunConfig c = small();
  c.episodes_train = 30;
  for (const auto& r : run_training(c).records) {
    CHECK(r.steps >= 1);
    CHECK(r.steps <= 20);
    CHECK(r.returns.size() == 3);
    if (r.steps < 20) CHECK(r.collisions + r.out_of_bounds >= 1);
  }
}

TEST_CASE("recorded returns equal the environment's discounted rewards") {
  RunConfig c = small();
  c.gamma = 0.9;
  c.episodes_train = 2;
  const TrainingResult trained = run_training(c);

  // Replay the same seeds by hand and accumulate rewards independently.
  const std::uint64_t seed = run_seed(c.master_seed, 0);
  ParticleWorld world = ParticleWorld::make(c.scenario, world_seed(seed), c.world);
  std::vector<AgentLearner> learners = make_learners(c, world, seed);
  for (std::size_t ep = 0; ep < 2; ++ep) {
    world.reset();
    std::vector<std::vector<double>> rewards(3);
    double loss0 = 0.0;
    for (bool done = false; !done;) {
      std::vector<Vec> obs = world.observe_all();
      std::vector<std::size_t> act(3);
      for (std::size_t i = 0; i < 3; ++i) act[i] = std::get<MakTdLearner>(learners[i]).select_action_explore(obs[i]);
      const StepOutcome out = world.step(act);
      bool terminal = false;
      for (const auto& e : out.events) terminal |= e.kind != EventKind::kLandmarkReach;
      for (std::size_t i = 0; i < 3; ++i) {
        const double l = std::get<MakTdLearner>(learners[i])
                             .train_step({obs[i], act[i], out.rewards[i], out.observations[i], terminal, std::nullopt})
                             .loss;
        if (i == 0) loss0 += l;
        rewards[i].push_back(out.rewards[i]);
      }
      done = out.done;
    }
    const EpisodeRecord& rec = trained.records[ep];
    CHECK(rec.steps == rewards[0].size());
    CHECK(rec.losses[0] == loss0);
    for (std::size_t i = 0; i < 3; ++i) {
      double g = 0.0;
      for (std::size_t k = 0; k < rewards[i].size(); ++k) g += std::pow(0.9, static_cast<double>(k)) * rewards[i][k];
      CHECK(rec.returns[i] == doctest::Approx(g).epsilon(1e-12));
    }
  }
}

TEST_CASE("testing leaves learners untouched") {
  for (LearnerKind kind : {LearnerKind::kMakTd, LearnerKind::kMakSr}) {
    const RunConfig c = small(kind);
    TrainingResult trained = run_training(c);
    const std::string before = checkpoint_json({c, 0, trained.learners}).dump();
    const auto records = run_testing(c, trained.learners);
    CHECK(checkpoint_json({c, 0, trained.learners}).dump() == before);
    REQUIRE(records.size() == 3);
    for (const auto& r : records) CHECK(r.phase == Phase::kTest);
  }
}

TEST_CASE("test loss uses the frozen weights") {
  const RunConfig c = small();
  const TrainingResult trained = run_training(c);
  const auto records = run_testing(c, trained.learners);
  CHECK(std::isfinite(records[0].losses[0]));
  CHECK(records[0].losses[0] >= 0.0);
}

TEST_CASE("aggregation and summary match a recomputation") {
  RunConfig c = small();
  c.mc_runs = 3;
  const MonteCarloResult mc = monte_carlo(c);
  REQUIRE(mc.runs.size() == 3);
  std::vector<double> rewards;
  for (const auto& run : mc.test_records) {
    double total = 0.0;
    for (const auto& r : run) {
      double mean = 0.0;
      for (double x : r.returns) mean += x;
      total += mean / static_cast<double>(r.returns.size());
    }
    rewards.push_back(total / static_cast<double>(run.size()));
  }
  const double mean = (rewards[0] + rewards[1] + rewards[2]) / 3.0;
  double var = 0.0;
  for (double x : rewards) var += (x - mean) * (x - mean);
  CHECK(mc.summary.reward_mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(mc.summary.reward_std == doctest::Approx(std::sqrt(var / 3.0)).epsilon(1e-12));
  CHECK(mc.summary.seeds ==
        std::vector<std::uint64_t>{run_seed(11, 0), run_seed(11, 1), run_seed(11, 2)});
  CHECK(mc.summary.learner == "mak_td");
}

TEST_CASE("a single Monte-Carlo run equals that run's aggregates") {
  RunConfig c = small();
  c.mc_runs = 1;
  const MonteCarloResult mc = monte_carlo(c);
  const TrainingResult trained = run_training(c);
  const RunAggregate agg = aggregate(run_testing(c, trained.learners));
  CHECK(mc.summary.loss_mean == agg.loss);
  CHECK(mc.summary.reward_mean == agg.reward);
  CHECK(mc.summary.steps_mean == agg.steps);
  CHECK(mc.summary.loss_std == 0.0);
}

TEST_CASE("parallel Monte-Carlo runs match sequential ones") {
  RunConfig c = small(LearnerKind::kMakSr);
  c.mc_runs = 3;
  const MonteCarloResult seq = monte_carlo(c);
  c.threads = 3;
  const MonteCarloResult par = monte_carlo(c);
  CHECK(seq.train_records == par.train_records);
  CHECK(seq.test_records == par.test_records);
  CHECK(summary_csv({seq.summary}) == summary_csv({par.summary}));
}

TEST_CASE("non-finite rewards abort the run") {
  RunConfig c = small();
  c.world.out_of_bounds_penalty = 1e200;
  c.world.step_cap = 1000;
  c.episodes_train = 50;
  CHECK_THROWS(run_training(c));
}

TEST_CASE("metrics CSV layout") {
  CHECK(metrics_header(2) ==
        "episode,phase,steps,collisions,out_of_bounds,mean_return,mean_loss,return_0,return_1,loss_0,loss_1");
  EpisodeRecord r{3, Phase::kTest, {1.0 / 3.0, -2.0}, {0.5, 1e-12}, 17, 1, 0};
  CHECK(metrics_row(r) == "3,test,17,1,0,-0.833333333,0.25,0.333333333,-2,0.5,1e-12");
  CHECK(std::string(kSummaryHeader) ==
        "scenario,learner,loss_mean,loss_std,reward_mean,reward_std,steps_mean,steps_std,seeds");
  const SummaryRow row{"predator_prey_1v2", "mak_sr", 1, 0, -2, 0.5, 30, 1, {5, 6}};
  CHECK(summary_csv({row}) == std::string(kSummaryHeader) + "\npredator_prey_1v2,mak_sr,1,0,-2,0.5,30,1,5;6\n");
  CHECK(summary_json({row})[0]["seeds"] == nlohmann::json::array({5, 6}));
  CHECK(summary_table({row}).find("mak_sr") != std::string::npos);
}

TEST_CASE("metrics stream to disk as episodes finish") {
  const auto dir = std::filesystem::temp_directory_path() / "maktd_metrics_test";
  std::filesystem::remove_all(dir);
  RunConfig c = small();
  c.out_dir = dir.string();
  c.mc_runs = 2;
  monte_carlo(c, true);
  const std::string train = read_file(dir / "run_0_train.csv");
  const std::string test = read_file(dir / "run_1_test.csv");
  CHECK(std::count(train.begin(), train.end(), '\n') == 5);
  CHECK(std::count(test.begin(), test.end(), '\n') == 4);
  CHECK(train.rfind(metrics_header(3), 0) == 0);

  MetricsWriter w(dir / "partial.csv", 1);
  w.append({0, Phase::kTrain, {1.0}, {2.0}, 3, 0, 0});
  CHECK(read_file(dir / "partial.csv") == metrics_header(1) + "\n0,train,3,0,0,1,2,1,2\n");
  CHECK_THROWS_AS(w.append({0, Phase::kTrain, {1.0, 2.0}, {2.0, 1.0}, 3, 0, 0}), InvalidInput);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed derivation is a pure function") {
  CHECK(run_seed(1, 2) == run_seed(1, 2));
  CHECK(run_seed(1, 2) != run_seed(2, 1));
  CHECK(agent_seed(run_seed(1, 0), 0) != agent_seed(run_seed(1, 0), 1));
  CHECK(world_seed(5) != test_seed(5));
}
