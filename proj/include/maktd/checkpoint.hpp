#pragma once

#include "maktd/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace maktd {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume or evaluate a trained run.
struct Checkpoint {
  RunConfig config;
  std::size_t run_index = 0;
  std::vector<AgentLearner> learners;
};

/// Dense SR covariances are L^2 x L^2 and are only written when asked for.
nlohmann::json checkpoint_json(const Checkpoint& cp, bool include_dense_sr_covariance = false);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp,
                     bool include_dense_sr_covariance = false);
/// Throws InvalidInput for a missing, malformed or incompatible file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace maktd
