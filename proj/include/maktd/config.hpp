#pragma once

#include "maktd/kalman_mmae.hpp"
#include "maktd/particle_env.hpp"
#include "maktd/sr_filter.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace maktd {

enum class LearnerKind { kMakTd, kMakSr };

std::string_view learner_name(LearnerKind kind);
LearnerKind parse_learner(std::string_view name);
std::string_view likelihood_name(Likelihood l);
Likelihood parse_likelihood(std::string_view name);

/// Every knob of one experiment. The JSON form is a flat object whose keys
/// are the field names below; see README for the list.
struct RunConfig {
  std::string scenario = "predator_prey_1v2";
  LearnerKind learner = LearnerKind::kMakTd;
  std::size_t episodes_train = 1000;
  std::size_t episodes_test = 1000;
  std::size_t mc_runs = 1;
  std::uint64_t master_seed = 0;

  double gamma = 0.95;
  double q_scale = 1e-7;
  double p0_scale = 10.0;
  std::vector<double> r_candidates{0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0};
  Likelihood likelihood = Likelihood::kGaussian;
  WeightMemory weight_memory = WeightMemory::kRecursive;
  double log_weight_floor = 30.0;
  double explore_greedy_prob = 0.0;

  std::size_t rbf_count = 9;
  double rate_mean = 1e-3;
  double rate_cov = 1e-3;
  double cov_floor = 1e-6;

  double sr_q_scale = 1e-7;
  double sr_p0_scale = 10.0;
  double sr_r_scale = 1.0;
  std::vector<double> sr_r_candidates;  ///< non-empty: adapt R_M (dense storage)
  SrCovariance sr_covariance = SrCovariance::kFactored;

  WorldParams world;

  std::string out_dir = "runs";
  std::size_t threads = 0;  ///< 0: one per hardware thread

  /// Throws InvalidInput when a field is out of range.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Overlays the keys present in `j` onto `base`. Unknown keys and wrongly
/// typed values throw InvalidInput.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace maktd
