#include "maktd/checkpoint.hpp"
#include "maktd/harness.hpp"
#include "maktd/metrics_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace maktd;

namespace {

struct Overrides {
  std::string config_path;
  std::string scenario;
  std::string learner;
  std::size_t episodes = 0;
  std::size_t test_episodes = 0;
  std::size_t mc_runs = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t rbf_count = 0;
  double gamma = 0.0;
  std::string likelihood;
  std::size_t threads = 0;
};

struct Flags {
  CLI::Option* scenario = nullptr;
  CLI::Option* learner = nullptr;
  CLI::Option* episodes = nullptr;
  CLI::Option* test_episodes = nullptr;
  CLI::Option* mc_runs = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* rbf_count = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* likelihood = nullptr;
  CLI::Option* threads = nullptr;
};

Flags add_run_flags(CLI::App* app, Overrides& o, bool multi) {
  Flags f;
  app->add_option("--config", o.config_path, "JSON config file (flags override its values)");
  f.scenario = app->add_option("--scenario", o.scenario,
                               multi ? "Scenario name(s), comma separated" : "Scenario name");
  f.learner = app->add_option("--learner", o.learner,
                              multi ? "mak_td, mak_sr or both, comma separated" : "mak_td or mak_sr");
  f.episodes = app->add_option("--episodes", o.episodes, "Training episodes");
  f.test_episodes = app->add_option("--test-episodes", o.test_episodes, "Test episodes");
  f.mc_runs = app->add_option("--mc-runs", o.mc_runs, "Monte-Carlo repetitions");
  f.seed = app->add_option("--seed", o.seed, "Master seed");
  f.out = app->add_option("--out", o.out, "Output directory");
  f.rbf_count = app->add_option("--rbf-count", o.rbf_count, "RBFs per agent");
  f.gamma = app->add_option("--gamma", o.gamma, "Discount factor");
  f.likelihood = app->add_option("--likelihood", o.likelihood, "gaussian or exponential_only");
  f.threads = app->add_option("--threads", o.threads, "Worker threads for Monte-Carlo runs");
  return f;
}

RunConfig resolve(const Overrides& o, const Flags& f, bool lists = false) {
  RunConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  if (!lists && f.scenario->count()) c.scenario = o.scenario;
  if (!lists && f.learner->count()) c.learner = parse_learner(o.learner);
  if (f.episodes->count()) c.episodes_train = o.episodes;
  if (f.test_episodes->count()) c.episodes_test = o.test_episodes;
  if (f.mc_runs->count()) c.mc_runs = o.mc_runs;
  if (f.seed->count()) c.master_seed = o.seed;
  if (f.out->count()) c.out_dir = o.out;
  if (f.rbf_count->count()) c.rbf_count = o.rbf_count;
  if (f.gamma->count()) c.gamma = o.gamma;
  if (f.likelihood->count()) c.likelihood = parse_likelihood(o.likelihood);
  if (f.threads->count()) c.threads = o.threads;
  return c;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto piece = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!piece.empty()) parts.push_back(piece);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

RecordSink progress(bool verbose, RecordSink inner) {
  if (!verbose) return inner;
  return [inner = std::move(inner)](const EpisodeRecord& r) {
    if (inner) inner(r);
    std::cerr << phase_name(r.phase) << " episode " << r.episode << ": steps " << r.steps
              << ", mean return " << format_float(r.mean_return()) << ", mean loss "
              << format_float(r.mean_loss()) << "\n";
  };
}

std::size_t agent_count(const RunConfig& c) {
  return ParticleWorld::make(c.scenario, 0, c.world).n_agents();
}

int cmd_scenarios(bool json_out) {
  const auto reg = scenario_registry();
  if (json_out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : reg) {
      const ParticleWorld w = ParticleWorld::make(s.name, 0);
      nlohmann::json agents = nlohmann::json::array();
      for (const auto& a : w.agents()) {
        agents.push_back({{"role", role_name(a.role)}, {"obs_dim", a.obs_dim}});
      }
      arr.push_back({{"name", s.name}, {"summary", s.summary}, {"agents", agents}});
    }
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& s : reg) std::cout << s.name << ": " << s.summary << "\n";
  }
  return 0;
}

int cmd_train(const RunConfig& c, bool verbose) {
  c.validate();
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_text(dir / "config.json", to_json(c).dump(2) + "\n");
  for (std::size_t run = 0; run < c.mc_runs; ++run) {
    const std::string stem = c.mc_runs == 1 ? "" : "run_" + std::to_string(run) + "_";
    MetricsWriter writer(dir / (stem + "train.csv"), agent_count(c));
    TrainingResult trained = run_training(c, run, progress(verbose, writer.sink()));
    save_checkpoint(dir / (stem + "checkpoint.json"), {c, run, std::move(trained.learners)});
    const RunAggregate agg = aggregate(trained.records);
    std::cout << "run " << run << ": " << trained.records.size() << " episodes, mean loss "
              << format_float(agg.loss) << ", mean return " << format_float(agg.reward)
              << ", mean steps " << format_float(agg.steps) << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const Overrides& o, const Flags& f, bool verbose,
             bool json_out) {
  Checkpoint cp = load_checkpoint(checkpoint);
  RunConfig c = cp.config;
  if (f.test_episodes->count()) c.episodes_test = o.test_episodes;
  if (f.out->count()) c.out_dir = o.out;
  require(c.episodes_test >= 1, "eval needs at least one test episode");
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  MetricsWriter writer(dir / "test.csv", cp.learners.size());
  const auto records = run_testing(c, cp.learners, cp.run_index, progress(verbose, writer.sink()));
  const SummaryRow row = summarize(c.scenario, c.learner, {aggregate(records)},
                                   {run_seed(c.master_seed, cp.run_index)});
  write_text(dir / "summary.csv", summary_csv({row}));
  std::cout << (json_out ? summary_json({row}).dump(2) + "\n" : summary_table({row}));
  return 0;
}

int cmd_mc(RunConfig c, const Overrides& o, const Flags& f, bool json_out) {
  const auto scenarios = f.scenario->count() ? split(o.scenario) : std::vector{c.scenario};
  std::vector<LearnerKind> learners;
  if (f.learner->count()) {
    for (const auto& name : split(o.learner)) learners.push_back(parse_learner(name));
  } else {
    learners.push_back(c.learner);
  }
  if (scenarios.empty() || learners.empty()) throw InvalidInput("empty scenario or learner list");
  for (const auto& s : scenarios) (void)ParticleWorld::make(s, 0, c.world);
  const fs::path root(c.out_dir);
  fs::create_directories(root);
  std::vector<SummaryRow> rows;
  for (const auto& s : scenarios) {
    for (LearnerKind l : learners) {
      RunConfig run = c;
      run.scenario = s;
      run.learner = l;
      run.out_dir = (root / s / std::string(learner_name(l))).string();
      run.validate();
      rows.push_back(monte_carlo(run, true).summary);
    }
  }
  write_text(root / "summary.csv", summary_csv(rows));
  write_text(root / "summary.txt", summary_table(rows));
  std::cout << (json_out ? summary_json(rows).dump(2) + "\n" : summary_table(rows));
  return 0;
}

int cmd_inspect(const std::string& checkpoint, bool json_out) {
  std::ifstream in(checkpoint);
  if (!in) throw InvalidInput("cannot open checkpoint '" + checkpoint + "'");
  const Checkpoint cp = load_checkpoint(checkpoint);
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < cp.learners.size(); ++i) {
    std::visit(
        [&](const auto& l) {
          nlohmann::json a = {{"agent", i},
                              {"n_actions", l.n_actions()},
                              {"block_size", l.encoder().block_size()},
                              {"feature_dim", l.feature_dim()},
                              {"theta_norm", l.theta().norm()}};
          if (const RbfBank* bank = l.encoder().bank()) {
            a["rbf_count"] = bank->n_rbf();
            a["obs_dim"] = bank->obs_dim();
          }
          agents.push_back(a);
        },
        cp.learners[i]);
  }
  const nlohmann::json info = {{"format_version", kCheckpointVersion},
                               {"learner", learner_name(cp.config.learner)},
                               {"scenario", cp.config.scenario},
                               {"master_seed", cp.config.master_seed},
                               {"run_index", cp.run_index},
                               {"run_seed", run_seed(cp.config.master_seed, cp.run_index)},
                               {"agents", agents},
                               {"config", to_json(cp.config)}};
  if (json_out) {
    std::cout << info.dump(2) << "\n";
    return 0;
  }
  std::cout << "learner:     " << learner_name(cp.config.learner) << "\n"
            << "scenario:    " << cp.config.scenario << "\n"
            << "master_seed: " << cp.config.master_seed << "\n"
            << "run_index:   " << cp.run_index << " (run seed "
            << run_seed(cp.config.master_seed, cp.run_index) << ")\n"
            << "episodes:    " << cp.config.episodes_train << " train\n";
  for (const auto& a : agents) {
    std::cout << "agent " << a["agent"].get<std::size_t>() << ": " << a["n_actions"].get<std::size_t>()
              << " actions x " << a["block_size"].get<std::size_t>() << " features = "
              << a["feature_dim"].get<std::size_t>() << " weights";
    if (a.contains("obs_dim")) std::cout << ", obs dim " << a["obs_dim"].get<std::size_t>();
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman temporal-difference multi-agent learners on a particle world"};
  app.require_subcommand(1, 1);
  bool verbose = false;
  bool json_out = false;
  app.add_flag("-v,--verbose", verbose, "Per-episode progress on stderr");
  app.add_flag("--json", json_out, "Machine-readable output");

  Overrides train_o, eval_o, mc_o;
  auto* train = app.add_subcommand("train", "Train one run (or --mc-runs runs), write metrics and checkpoints");
  const Flags train_f = add_run_flags(train, train_o, false);

  auto* eval = app.add_subcommand("eval", "Greedy test episodes from a checkpoint");
  std::string eval_checkpoint;
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
  Flags eval_f;
  eval_f.test_episodes = eval->add_option("--test-episodes", eval_o.test_episodes, "Test episodes");
  eval_f.out = eval->add_option("--out", eval_o.out, "Output directory");

  auto* mc = app.add_subcommand("mc", "Monte-Carlo train+test sweep with a summary table");
  const Flags mc_f = add_run_flags(mc, mc_o, true);

  auto* scenarios = app.add_subcommand("scenarios", "List scenario presets");

  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print checkpoint dimensions and provenance");
  std::string inspect_path;
  inspect->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

  for (auto* sub : {train, eval, mc, scenarios, inspect}) {
    sub->add_flag("-v,--verbose", verbose, "Per-episode progress on stderr");
    sub->add_flag("--json", json_out, "Machine-readable output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*scenarios) return cmd_scenarios(json_out);
    if (*inspect) return cmd_inspect(inspect_path, json_out);
    if (*eval) return cmd_eval(eval_checkpoint, eval_o, eval_f, verbose, json_out);
    if (*train) return cmd_train(resolve(train_o, train_f), verbose);
    if (*mc) return cmd_mc(resolve(mc_o, mc_f, true), mc_o, mc_f, json_out);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
