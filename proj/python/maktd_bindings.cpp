#include "maktd/checkpoint.hpp"
#include "maktd/config.hpp"
#include "maktd/harness.hpp"
#include "maktd/kalman_mmae.hpp"
#include "maktd/mak_sr.hpp"
#include "maktd/mak_td.hpp"
#include "maktd/metrics_io.hpp"
#include "maktd/particle_env.hpp"
#include "maktd/rbf_features.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace maktd;

namespace {

nlohmann::json parse(const std::string& text) {
  try {
    return text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

RunConfig config_from(const std::string& text) { return apply_json(RunConfig{}, parse(text)); }

py::dict record_dict(const EpisodeRecord& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["phase"] = std::string(phase_name(r.phase));
  d["steps"] = r.steps;
  d["collisions"] = r.collisions;
  d["out_of_bounds"] = r.out_of_bounds;
  d["returns"] = r.returns;
  d["losses"] = r.losses;
  return d;
}

py::list records_list(const std::vector<EpisodeRecord>& rs) {
  py::list out;
  for (const auto& r : rs) out.append(record_dict(r));
  return out;
}

FeatureEncoder make_encoder(std::optional<std::size_t> n_states, std::optional<RbfBank> bank) {
  if (n_states.has_value() == bank.has_value())
    throw InvalidInput("give exactly one of n_states or bank");
  if (bank) return FeatureEncoder(std::move(*bank));
  return FeatureEncoder(OneHotStates(*n_states));
}

Transition transition(const Vec& obs, std::size_t action, double reward, const Vec& next_obs,
                      bool terminal, std::optional<std::size_t> next_action) {
  return Transition{obs, action, reward, next_obs, terminal, next_action};
}

template <class Learner>
void learner_common(py::class_<Learner>& c) {
  c.def_property_readonly("n_actions", &Learner::n_actions)
      .def_property_readonly("feature_dim", &Learner::feature_dim)
      .def_property_readonly("theta", &Learner::theta)
      .def("action_values", &Learner::action_values, py::arg("obs"))
      .def("select_action_explore", &Learner::select_action_explore, py::arg("obs"))
      .def(
          "greedy_action",
          [](const Learner& l, const Vec& obs, std::uint64_t seed) {
            Rng rng(seed);
            return l.greedy_action(obs, rng);
          },
          py::arg("obs"), py::arg("seed") = 0)
      .def("loss", &Learner::loss, py::arg("obs"), py::arg("action"), py::arg("reward"));
}

}  // namespace

PYBIND11_MODULE(_maktd, m) {
  m.doc() = "Multiple-model Kalman temporal-difference learners";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<RunAborted>(m, "RunAborted", PyExc_RuntimeError);

  py::enum_<RgdBranch>(m, "RgdBranch")
      .value("none", RgdBranch::kNone)
      .value("means", RgdBranch::kMeans)
      .value("covariances", RgdBranch::kCovariances);

  py::class_<RbfBank>(m, "RbfBank")
      .def(py::init([](std::vector<Vec> means, std::vector<Mat> covs, double rate_mean,
                       double rate_cov, double cov_floor) {
             return RbfBank(std::move(means), std::move(covs), RbfRates{rate_mean, rate_cov, cov_floor});
           }),
           py::arg("means"), py::arg("covariances"), py::arg("rate_mean") = 1e-3,
           py::arg("rate_cov") = 1e-3, py::arg("cov_floor") = 1e-6)
      .def_static(
          "random",
          [](std::size_t n, const Vec& low, const Vec& high, std::uint64_t seed) {
            Rng rng(seed);
            return RbfBank::random(n, low, high, rng);
          },
          py::arg("n_rbf"), py::arg("low"), py::arg("high"), py::arg("seed") = 0)
      .def_property_readonly("n_rbf", &RbfBank::n_rbf)
      .def_property_readonly("obs_dim", &RbfBank::obs_dim)
      .def_property_readonly("block_size", &RbfBank::block_size)
      .def_property_readonly("means", &RbfBank::means)
      .def_property_readonly("covariances", &RbfBank::covariances)
      .def("state_features", &RbfBank::state_features, py::arg("obs"))
      .def(
          "state_action_features",
          [](const RbfBank& b, const Vec& obs, std::size_t a, std::size_t n_actions) {
            return b.state_action_features(obs, a, n_actions).values;
          },
          py::arg("obs"), py::arg("action"), py::arg("n_actions"))
      .def(
          "loss_gradient",
          [](const RbfBank& b, const Vec& obs, std::size_t a, const Vec& theta, double r) {
            RbfGradient g = b.loss_gradient(obs, a, theta, r);
            return py::make_tuple(g.residual, g.d_mean, g.d_cov);
          },
          py::arg("obs"), py::arg("action"), py::arg("theta"), py::arg("reward"))
      .def("rgd_update", &RbfBank::rgd_update, py::arg("obs"), py::arg("action"), py::arg("theta"),
           py::arg("reward"))
      .def("min_cov_eigenvalue", &RbfBank::min_cov_eigenvalue);

  py::class_<MmaeFilter>(m, "MmaeFilter")
      .def(py::init([](std::size_t dim, double p0, double q, std::vector<double> candidates) {
             MmaeOptions o;
             o.r_candidates = std::move(candidates);
             return MmaeFilter::isotropic(dim, p0, q, o);
           }),
           py::arg("dim"), py::arg("p0_scale") = 10.0, py::arg("q_scale") = 1e-7,
           py::arg("r_candidates") = MmaeOptions{}.r_candidates)
      .def_property_readonly("theta", &MmaeFilter::theta)
      .def_property_readonly("covariance", &MmaeFilter::covariance)
      .def_property_readonly("weights", &MmaeFilter::weights)
      .def("predict", &MmaeFilter::predict)
      .def(
          "update",
          [](MmaeFilter& f, const Vec& h, double z) { return f.update(h, z).innovation; },
          py::arg("h"), py::arg("measurement"));

  py::class_<MakTdLearner> td(m, "MakTdLearner");
  td.def(py::init([](std::optional<std::size_t> n_states, std::optional<RbfBank> bank,
                     std::size_t n_actions, double gamma, double q_scale, double p0_scale,
                     std::uint64_t seed) {
           TdParams p;
           p.gamma = gamma;
           p.q_scale = q_scale;
           p.p0_scale = p0_scale;
           return MakTdLearner(make_encoder(n_states, std::move(bank)), n_actions, p, seed);
         }),
         py::kw_only(), py::arg("n_states") = py::none(), py::arg("bank") = py::none(),
         py::arg("n_actions") = kNumActions, py::arg("gamma") = 0.95, py::arg("q_scale") = 1e-7,
         py::arg("p0_scale") = 10.0, py::arg("seed") = 0)
      .def_property_readonly("weights", [](const MakTdLearner& l) { return l.filter().weights(); })
      .def(
          "train_step",
          [](MakTdLearner& l, const Vec& obs, std::size_t a, double r, const Vec& next_obs,
             bool terminal, std::optional<std::size_t> next_action) {
            return l.train_step(transition(obs, a, r, next_obs, terminal, next_action)).loss;
          },
          py::arg("obs"), py::arg("action"), py::arg("reward"), py::arg("next_obs"),
          py::arg("terminal") = false, py::arg("next_action") = py::none());
  learner_common(td);

  py::class_<MakSrLearner> sr(m, "MakSrLearner");
  sr.def(py::init([](std::optional<std::size_t> n_states, std::optional<RbfBank> bank,
                     std::size_t n_actions, double gamma, double q_scale, double p0_scale,
                     std::uint64_t seed) {
           SrParams p;
           p.gamma = gamma;
           p.q_scale = q_scale;
           p.p0_scale = p0_scale;
           return MakSrLearner(make_encoder(n_states, std::move(bank)), n_actions, p, seed);
         }),
         py::kw_only(), py::arg("n_states") = py::none(), py::arg("bank") = py::none(),
         py::arg("n_actions") = kNumActions, py::arg("gamma") = 0.95, py::arg("q_scale") = 1e-7,
         py::arg("p0_scale") = 10.0, py::arg("seed") = 0)
      .def_property_readonly("sr_matrix", [](const MakSrLearner& l) { return Mat(l.sr_matrix()); })
      .def(
          "train_step",
          [](MakSrLearner& l, const Vec& obs, std::size_t a, double r, const Vec& next_obs,
             bool terminal, std::optional<std::size_t> next_action) {
            return l.train_step(transition(obs, a, r, next_obs, terminal, next_action)).loss;
          },
          py::arg("obs"), py::arg("action"), py::arg("reward"), py::arg("next_obs"),
          py::arg("terminal") = false, py::arg("next_action") = py::none());
  learner_common(sr);

  py::class_<ParticleWorld>(m, "ParticleWorld")
      .def(py::init([](const std::string& scenario, std::uint64_t seed) {
             return ParticleWorld::make(scenario, seed);
           }),
           py::arg("scenario"), py::arg("seed") = 0)
      .def_property_readonly("scenario", &ParticleWorld::scenario)
      .def_property_readonly("n_agents", &ParticleWorld::n_agents)
      .def_property_readonly("step_count", [](const ParticleWorld& w) { return w.state().step_count; })
      .def_property_readonly("positions",
                             [](const ParticleWorld& w) {
                               std::vector<Vec> out;
                               for (const auto& p : w.state().positions) out.emplace_back(p);
                               return out;
                             })
      .def("reset", &ParticleWorld::reset)
      .def("observe", &ParticleWorld::observe, py::arg("agent"))
      .def("observe_all", &ParticleWorld::observe_all)
      .def("observation_bounds", &ParticleWorld::observation_bounds, py::arg("agent"))
      .def(
          "step",
          [](ParticleWorld& w, const std::vector<std::size_t>& actions) {
            StepOutcome o = w.step(actions);
            return py::make_tuple(o.observations, o.rewards, o.done, o.events.size());
          },
          py::arg("actions"));

  m.def("scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : scenario_registry()) out.emplace_back(s.name, s.summary);
    return out;
  });
  m.def("default_config_json", [] { return to_json(RunConfig{}).dump(); });
  m.def("validate_config_json", [](const std::string& text) { return to_json(config_from(text)).dump(); });
  m.def(
      "run",
      [](const std::string& text, std::size_t run_index) {
        const RunConfig c = config_from(text);
        TrainingResult trained;
        std::vector<EpisodeRecord> tested;
        {
          py::gil_scoped_release release;
          trained = run_training(c, run_index);
          tested = run_testing(c, trained.learners, run_index);
        }
        return py::make_tuple(records_list(trained.records), records_list(tested),
                              checkpoint_json(Checkpoint{c, run_index, std::move(trained.learners)}).dump());
      },
      py::arg("config_json"), py::arg("run_index") = 0);
  m.def(
      "evaluate_checkpoint",
      [](const std::string& text) {
        const Checkpoint cp = checkpoint_from_json(parse(text));
        return records_list(run_testing(cp.config, cp.learners, cp.run_index));
      },
      py::arg("checkpoint_json"));
  m.def(
      "monte_carlo",
      [](const std::string& text) {
        const RunConfig c = config_from(text);
        MonteCarloResult r;
        {
          py::gil_scoped_release release;
          r = monte_carlo(c);
        }
        return summary_json({r.summary})[0].dump();
      },
      py::arg("config_json"));
}
