#include "maktd/checkpoint.hpp"
#include "maktd/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace maktd;
using nlohmann::json;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.episodes_train == 1000);
  CHECK(c.episodes_test == 1000);
  CHECK(c.gamma == 0.95);
  CHECK(c.q_scale == 1e-7);
  CHECK(c.p0_scale == 10.0);
  CHECK(c.world.dt == 0.01);
  CHECK(c.rbf_count == 9);
  CHECK(c.r_candidates.size() == 8);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON overlay and round trip") {
  RunConfig c = apply_json(RunConfig{}, json{{"scenario", "simple_competition"},
                                             {"learner", "mak_sr"},
                                             {"gamma", 0.5},
                                             {"step_cap", 40},
                                             {"r_candidates", {1.0, 2.0}},
                                             {"sr_covariance", "dense"},
                                             {"likelihood", "exponential_only"}});
  CHECK(c.scenario == "simple_competition");
  CHECK(c.learner == LearnerKind::kMakSr);
  CHECK(c.gamma == 0.5);
  CHECK(c.world.step_cap == 40);
  CHECK(c.r_candidates == std::vector<double>{1.0, 2.0});
  CHECK(c.sr_covariance == SrCovariance::kDense);
  CHECK(c.likelihood == Likelihood::kExponentialOnly);
  CHECK(c.episodes_train == 1000);
  const RunConfig back = apply_json(RunConfig{}, to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("bad config values are rejected") {
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"gama", 0.5}}), InvalidInput);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"gamma", "high"}}), InvalidInput);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"episodes_train", -3}}), InvalidInput);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"learner", "dqn"}}), InvalidInput);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json::array()), InvalidInput);
  RunConfig c;
  c.episodes_train = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = RunConfig{};
  c.scenario = "nope";
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = RunConfig{};
  c.sr_r_candidates = {1.0, 2.0};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.sr_covariance = SrCovariance::kDense;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config files") {
  const auto good = temp_file("maktd_good.json", R"({"master_seed": 4, "episodes_train": 7})");
  const RunConfig c = load_config(good);
  CHECK(c.master_seed == 4);
  CHECK(c.episodes_train == 7);
  const auto bad = temp_file("maktd_bad.json", "{ not json");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("malformed config"), InvalidInput);
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/x.json"), doctest::Contains("cannot open"), InvalidInput);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST_CASE("checkpoints round-trip every learner") {
  for (LearnerKind kind : {LearnerKind::kMakTd, LearnerKind::kMakSr}) {
    RunConfig c;
    c.learner = kind;
    c.episodes_train = 3;
    c.episodes_test = 2;
    c.rbf_count = 3;
    c.world.step_cap = 15;
    c.master_seed = 21;
    TrainingResult trained = run_training(c, 1);
    const Checkpoint cp{c, 1, trained.learners};
    const auto path = std::filesystem::temp_directory_path() / "maktd_cp.json";
    save_checkpoint(path, cp);
    const Checkpoint loaded = load_checkpoint(path);
    CHECK(loaded.run_index == 1);
    CHECK(checkpoint_json(loaded).dump() == checkpoint_json(cp).dump());
    CHECK(run_testing(c, loaded.learners, 1) == run_testing(c, trained.learners, 1));

    // Resumed exploration draws continue the same RNG streams.
    Checkpoint resumed = load_checkpoint(path);
    const Vec obs = Vec::Zero(12);
    std::visit([&](auto& a) {
      std::visit([&](auto& b) { CHECK(a.select_action_explore(obs) == b.select_action_explore(obs)); },
                 trained.learners[0]);
    }, resumed.learners[0]);
    std::filesystem::remove(path);
  }
}

TEST_CASE("dense SR covariances are opt-in") {
  RunConfig c;
  c.learner = LearnerKind::kMakSr;
  c.sr_covariance = SrCovariance::kDense;
  c.rbf_count = 1;
  c.episodes_train = 1;
  c.world.step_cap = 3;
  const TrainingResult trained = run_training(c);
  const Checkpoint cp{c, 0, trained.learners};
  CHECK_FALSE(checkpoint_json(cp)["agents"][0]["sr"].contains("covariance"));
  const json full = checkpoint_json(cp, true);
  CHECK(full["agents"][0]["sr"]["covariance"].size() == 100);
  const Checkpoint back = checkpoint_from_json(full);
  CHECK(std::get<MakSrLearner>(back.learners[0]).sr_filter().dense_covariance() ==
        std::get<MakSrLearner>(trained.learners[0]).sr_filter().dense_covariance());
}

TEST_CASE("broken checkpoints are rejected") {
  CHECK_THROWS_WITH_AS(load_checkpoint("/nonexistent/cp.json"), doctest::Contains("cannot open checkpoint"),
                       InvalidInput);
  const auto garbage = temp_file("maktd_garbage.json", "[1, 2");
  CHECK_THROWS_AS(load_checkpoint(garbage), InvalidInput);
  CHECK_THROWS_WITH_AS(checkpoint_from_json(json{{"format_version", 99}}),
                       doctest::Contains("format_version"), InvalidInput);
  CHECK_THROWS_AS(checkpoint_from_json(json{{"format_version", 1}}), InvalidInput);
  std::filesystem::remove(garbage);
}
