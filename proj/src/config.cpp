#include "maktd/config.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace maktd {

using nlohmann::json;

std::string_view learner_name(LearnerKind kind) {
  return kind == LearnerKind::kMakTd ? "mak_td" : "mak_sr";
}

LearnerKind parse_learner(std::string_view name) {
  if (name == "mak_td") return LearnerKind::kMakTd;
  if (name == "mak_sr") return LearnerKind::kMakSr;
  throw InvalidInput("unknown learner '" + std::string(name) + "' (expected mak_td or mak_sr)");
}

std::string_view likelihood_name(Likelihood l) {
  return l == Likelihood::kGaussian ? "gaussian" : "exponential_only";
}

Likelihood parse_likelihood(std::string_view name) {
  if (name == "gaussian") return Likelihood::kGaussian;
  if (name == "exponential_only") return Likelihood::kExponentialOnly;
  throw InvalidInput("unknown likelihood '" + std::string(name) +
                     "' (expected gaussian or exponential_only)");
}

namespace {

std::string_view memory_name(WeightMemory m) {
  return m == WeightMemory::kRecursive ? "recursive" : "per_step";
}

WeightMemory parse_memory(std::string_view name) {
  if (name == "recursive") return WeightMemory::kRecursive;
  if (name == "per_step") return WeightMemory::kPerStep;
  throw InvalidInput("unknown weight_memory '" + std::string(name) + "'");
}

std::string_view storage_name(SrCovariance s) {
  return s == SrCovariance::kFactored ? "factored" : "dense";
}

SrCovariance parse_storage(std::string_view name) {
  if (name == "factored") return SrCovariance::kFactored;
  if (name == "dense") return SrCovariance::kDense;
  throw InvalidInput("unknown sr_covariance '" + std::string(name) + "'");
}

template <typename T>
T typed(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw InvalidInput("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw InvalidInput("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw InvalidInput("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw InvalidInput("config key '" + key + "' has the wrong type");
  }
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define MAKTD_FIELD(name, type) \
  t[#name] = [](RunConfig& c, const json& v) { c.name = typed<type>(v, #name); }
#define MAKTD_WORLD(name, type) \
  t[#name] = [](RunConfig& c, const json& v) { c.world.name = typed<type>(v, #name); }
    MAKTD_FIELD(scenario, std::string);
    MAKTD_FIELD(episodes_train, std::size_t);
    MAKTD_FIELD(episodes_test, std::size_t);
    MAKTD_FIELD(mc_runs, std::size_t);
    MAKTD_FIELD(master_seed, std::uint64_t);
    MAKTD_FIELD(gamma, double);
    MAKTD_FIELD(q_scale, double);
    MAKTD_FIELD(p0_scale, double);
    MAKTD_FIELD(log_weight_floor, double);
    MAKTD_FIELD(explore_greedy_prob, double);
    MAKTD_FIELD(rbf_count, std::size_t);
    MAKTD_FIELD(rate_mean, double);
    MAKTD_FIELD(rate_cov, double);
    MAKTD_FIELD(cov_floor, double);
    MAKTD_FIELD(sr_q_scale, double);
    MAKTD_FIELD(sr_p0_scale, double);
    MAKTD_FIELD(sr_r_scale, double);
    MAKTD_FIELD(out_dir, std::string);
    MAKTD_FIELD(threads, std::size_t);
    MAKTD_WORLD(half_width, double);
    MAKTD_WORLD(dt, double);
    MAKTD_WORLD(damping, double);
    MAKTD_WORLD(shaping, double);
    MAKTD_WORLD(out_of_bounds_penalty, double);
    MAKTD_WORLD(capture_reward, double);
    MAKTD_WORLD(step_cap, std::size_t);
#undef MAKTD_FIELD
#undef MAKTD_WORLD
    t["learner"] = [](RunConfig& c, const json& v) {
      c.learner = parse_learner(typed<std::string>(v, "learner"));
    };
    t["likelihood"] = [](RunConfig& c, const json& v) {
      c.likelihood = parse_likelihood(typed<std::string>(v, "likelihood"));
    };
    t["weight_memory"] = [](RunConfig& c, const json& v) {
      c.weight_memory = parse_memory(typed<std::string>(v, "weight_memory"));
    };
    t["sr_covariance"] = [](RunConfig& c, const json& v) {
      c.sr_covariance = parse_storage(typed<std::string>(v, "sr_covariance"));
    };
    t["r_candidates"] = [](RunConfig& c, const json& v) {
      if (!v.is_array()) throw InvalidInput("config key 'r_candidates' must be a list of numbers");
      c.r_candidates.clear();
      for (const auto& x : v) c.r_candidates.push_back(typed<double>(x, "r_candidates"));
    };
    t["sr_r_candidates"] = [](RunConfig& c, const json& v) {
      if (!v.is_array()) throw InvalidInput("config key 'sr_r_candidates' must be a list of numbers");
      c.sr_r_candidates.clear();
      for (const auto& x : v) c.sr_r_candidates.push_back(typed<double>(x, "sr_r_candidates"));
    };
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  (void)ParticleWorld::make(scenario, 0, world);
  require(episodes_train >= 1, "episodes_train must be at least 1");
  require(mc_runs >= 1, "mc_runs must be at least 1");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(q_scale >= 0.0 && sr_q_scale >= 0.0, "process noise scales must be non-negative");
  require(p0_scale > 0.0 && sr_p0_scale > 0.0, "prior scales must be positive");
  require(sr_r_scale > 0.0, "sr_r_scale must be positive");
  require(!r_candidates.empty(), "r_candidates must not be empty");
  for (double r : r_candidates) require(r > 0.0, "r_candidates must be positive");
  for (double r : sr_r_candidates) require(r > 0.0, "sr_r_candidates must be positive");
  require(sr_r_candidates.size() <= 1 || sr_covariance == SrCovariance::kDense,
          "sr_r_candidates with more than one value needs sr_covariance = dense");
  require(rbf_count >= 1, "rbf_count must be at least 1");
  require(rate_mean >= 0.0 && rate_cov >= 0.0, "RBF adaptation rates must be non-negative");
  require(cov_floor > 0.0, "cov_floor must be positive");
  require(explore_greedy_prob >= 0.0 && explore_greedy_prob <= 1.0,
          "explore_greedy_prob must lie in [0, 1]");
  require(log_weight_floor > 0.0, "log_weight_floor must be positive");
}

json to_json(const RunConfig& c) {
  return json{
      {"scenario", c.scenario},
      {"learner", learner_name(c.learner)},
      {"episodes_train", c.episodes_train},
      {"episodes_test", c.episodes_test},
      {"mc_runs", c.mc_runs},
      {"master_seed", c.master_seed},
      {"gamma", c.gamma},
      {"q_scale", c.q_scale},
      {"p0_scale", c.p0_scale},
      {"r_candidates", c.r_candidates},
      {"likelihood", likelihood_name(c.likelihood)},
      {"weight_memory", memory_name(c.weight_memory)},
      {"log_weight_floor", c.log_weight_floor},
      {"explore_greedy_prob", c.explore_greedy_prob},
      {"rbf_count", c.rbf_count},
      {"rate_mean", c.rate_mean},
      {"rate_cov", c.rate_cov},
      {"cov_floor", c.cov_floor},
      {"sr_q_scale", c.sr_q_scale},
      {"sr_p0_scale", c.sr_p0_scale},
      {"sr_r_scale", c.sr_r_scale},
      {"sr_r_candidates", c.sr_r_candidates},
      {"sr_covariance", storage_name(c.sr_covariance)},
      {"half_width", c.world.half_width},
      {"dt", c.world.dt},
      {"damping", c.world.damping},
      {"shaping", c.world.shaping},
      {"out_of_bounds_penalty", c.world.out_of_bounds_penalty},
      {"capture_reward", c.world.capture_reward},
      {"step_cap", c.world.step_cap},
      {"out_dir", c.out_dir},
      {"threads", c.threads},
  };
}

RunConfig apply_json(RunConfig base, const json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object of key/value pairs");
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw InvalidInput("unknown config key '" + key + "'");
    it->second(base, value);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed config file '" + path.string() + "': " + e.what());
  }
  return apply_json(std::move(base), j);
}

}  // namespace maktd
