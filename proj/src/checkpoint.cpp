#include "maktd/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace maktd {

using nlohmann::json;

namespace {

json vec_json(const VecRef& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const MatRef& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

Vec vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat mat_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidInput("ragged matrix in checkpoint");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw InvalidInput("corrupt RNG state in checkpoint");
}

json encoder_json(const FeatureEncoder& enc) {
  if (const RbfBank* bank = enc.bank()) {
    json means = json::array();
    json covs = json::array();
    for (const auto& m : bank->means()) means.push_back(vec_json(m));
    for (const auto& c : bank->covariances()) covs.push_back(mat_json(c));
    return {{"kind", "rbf"},
            {"means", means},
            {"covariances", covs},
            {"rate_mean", bank->rates().mean},
            {"rate_cov", bank->rates().cov},
            {"cov_floor", bank->rates().cov_floor}};
  }
  return {{"kind", "onehot"}, {"n_states", enc.table()->n_states()}};
}

FeatureEncoder encoder_from(const json& j) {
  if (j.at("kind") == "onehot") return OneHotStates(j.at("n_states").get<std::size_t>());
  std::vector<Vec> means;
  std::vector<Mat> covs;
  for (const auto& m : j.at("means")) means.push_back(vec_from(m));
  for (const auto& c : j.at("covariances")) covs.push_back(mat_from(c));
  RbfRates rates{j.at("rate_mean").get<double>(), j.at("rate_cov").get<double>(),
                 j.at("cov_floor").get<double>()};
  return RbfBank(std::move(means), std::move(covs), rates);
}

json filter_json(const MmaeFilter& f) {
  return {{"theta", vec_json(f.theta())},
          {"covariance", mat_json(f.covariance())},
          {"log_weights", vec_json(f.log_weights())}};
}

void restore_filter(MmaeFilter& f, const json& j) {
  f.restore(vec_from(j.at("theta")), mat_from(j.at("covariance")), vec_from(j.at("log_weights")));
}

json sr_json(const SrFilter& f, bool dense_cov) {
  json j = {{"m", vec_json(f.m())}, {"log_weights", vec_json(f.log_weights())}};
  if (f.storage() == SrCovariance::kFactored) {
    j["covariance"] = mat_json(f.factor());
  } else if (dense_cov) {
    j["covariance"] = mat_json(f.dense_covariance());
  }
  return j;
}

void restore_sr(SrFilter& f, const json& j) {
  std::optional<Mat> cov;
  if (j.contains("covariance")) cov = mat_from(j.at("covariance"));
  f.restore(vec_from(j.at("m")), std::move(cov), vec_from(j.at("log_weights")));
}

}  // namespace

json checkpoint_json(const Checkpoint& cp, bool include_dense_sr_covariance) {
  json agents = json::array();
  for (const auto& learner : cp.learners) {
    json a;
    if (const auto* td = std::get_if<MakTdLearner>(&learner)) {
      a = {{"encoder", encoder_json(td->encoder())},
           {"filter", filter_json(td->filter())},
           {"rng", rng_state(td->rng())}};
    } else {
      const auto& sr = std::get<MakSrLearner>(learner);
      a = {{"encoder", encoder_json(sr.encoder())},
           {"filter", filter_json(sr.reward_filter())},
           {"sr", sr_json(sr.sr_filter(), include_dense_sr_covariance)},
           {"rng", rng_state(sr.rng())}};
    }
    agents.push_back(std::move(a));
  }
  return {{"format_version", kCheckpointVersion},
          {"learner", learner_name(cp.config.learner)},
          {"scenario", cp.config.scenario},
          {"run_index", cp.run_index},
          {"run_seed", run_seed(cp.config.master_seed, cp.run_index)},
          {"config", to_json(cp.config)},
          {"agents", std::move(agents)}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("format_version")) {
      throw InvalidInput("not a checkpoint (missing format_version)");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw InvalidInput("unsupported checkpoint format_version " + std::to_string(version));
    }
    Checkpoint cp;
    cp.config = apply_json(RunConfig{}, j.at("config"));
    cp.config.validate();
    cp.run_index = j.at("run_index").get<std::size_t>();
    const ParticleWorld world = ParticleWorld::make(cp.config.scenario, 0, cp.config.world);
    cp.learners = make_learners(cp.config, world, run_seed(cp.config.master_seed, cp.run_index));
    const json& agents = j.at("agents");
    if (agents.size() != cp.learners.size()) {
      throw InvalidInput("checkpoint has " + std::to_string(agents.size()) + " agents, scenario '" +
                         cp.config.scenario + "' has " + std::to_string(cp.learners.size()));
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const json& a = agents[i];
      std::visit(
          [&](auto& l) {
            l.encoder() = encoder_from(a.at("encoder"));
            if (l.encoder().block_size() * l.n_actions() != l.feature_dim()) {
              throw InvalidInput("checkpoint feature size does not match its filters");
            }
            if constexpr (std::is_same_v<std::decay_t<decltype(l)>, MakTdLearner>) {
              restore_filter(l.filter(), a.at("filter"));
            } else {
              restore_filter(l.reward_filter(), a.at("filter"));
              restore_sr(l.sr_filter(), a.at("sr"));
            }
            set_rng_state(l.rng(), a.at("rng").get<std::string>());
          },
          cp.learners[i]);
    }
    return cp;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp,
                     bool include_dense_sr_covariance) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
    out << checkpoint_json(cp, include_dense_sr_covariance).dump();
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed checkpoint '" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace maktd
