#include "maktd/metrics_io.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

namespace maktd {

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string metrics_header(std::size_t n_agents) {
  std::string h = "episode,phase,steps,collisions,out_of_bounds,mean_return,mean_loss";
  for (std::size_t i = 0; i < n_agents; ++i) h += ",return_" + std::to_string(i);
  for (std::size_t i = 0; i < n_agents; ++i) h += ",loss_" + std::to_string(i);
  return h;
}

std::string metrics_row(const EpisodeRecord& r) {
  std::string row = std::to_string(r.episode) + "," + std::string(phase_name(r.phase)) + "," +
                    std::to_string(r.steps) + "," + std::to_string(r.collisions) + "," +
                    std::to_string(r.out_of_bounds) + "," + format_float(r.mean_return()) + "," +
                    format_float(r.mean_loss());
  for (double v : r.returns) row += "," + format_float(v);
  for (double v : r.losses) row += "," + format_float(v);
  return row;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::size_t n_agents)
    : out_(path, std::ios::out | std::ios::trunc), n_agents_(n_agents) {
  if (!out_) throw std::runtime_error("cannot open metrics file '" + path.string() + "'");
  out_ << metrics_header(n_agents_) << '\n' << std::flush;
}

void MetricsWriter::append(const EpisodeRecord& record) {
  require(record.returns.size() == n_agents_, "record agent count does not match the CSV header");
  std::lock_guard lock(mutex_);
  out_ << metrics_row(record) << '\n' << std::flush;
}

namespace {

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(seeds[i]);
  }
  return s;
}

}  // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + r.learner + "," + format_float(r.loss_mean) + "," +
           format_float(r.loss_std) + "," + format_float(r.reward_mean) + "," +
           format_float(r.reward_std) + "," + format_float(r.steps_mean) + "," +
           format_float(r.steps_std) + "," + join_seeds(r.seeds) + "\n";
  }
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  auto cell = [](double mean, double sd) { return format_float(mean) + " ± " + format_float(sd); };
  os << std::left << std::setw(20) << "scenario" << std::setw(8) << "learner" << std::setw(30)
     << "loss" << std::setw(30) << "reward" << "steps\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(20) << r.scenario << std::setw(8) << r.learner << std::setw(30)
       << cell(r.loss_mean, r.loss_std) << std::setw(30) << cell(r.reward_mean, r.reward_std)
       << cell(r.steps_mean, r.steps_std) << "\n";
  }
  return os.str();
}

nlohmann::json summary_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"learner", r.learner},
                   {"loss_mean", r.loss_mean},
                   {"loss_std", r.loss_std},
                   {"reward_mean", r.reward_mean},
                   {"reward_std", r.reward_std},
                   {"steps_mean", r.steps_mean},
                   {"steps_std", r.steps_std},
                   {"seeds", r.seeds}});
  }
  return arr;
}

}  // namespace maktd
