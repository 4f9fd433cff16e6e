#pragma once

#include "maktd/harness.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace maktd {

/// Formats a double with 9 significant digits.
std::string format_float(double v);

std::string metrics_header(std::size_t n_agents);
std::string metrics_row(const EpisodeRecord& r);

/// Append-only CSV of EpisodeRecords. Each row is flushed as soon as it is
/// written so an interrupted run keeps everything up to the last episode.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, std::size_t n_agents);
  void append(const EpisodeRecord& record);
  RecordSink sink() {
    return [this](const EpisodeRecord& r) { append(r); };
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
  std::size_t n_agents_;
};

inline constexpr const char* kSummaryHeader =
    "scenario,learner,loss_mean,loss_std,reward_mean,reward_std,steps_mean,steps_std,seeds";

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::vector<SummaryRow>& rows);
nlohmann::json summary_json(const std::vector<SummaryRow>& rows);

}  // namespace maktd
