#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <random>

#include "psr/harness.hpp"
#include "psr/snapshot.hpp"

namespace py = pybind11;
using namespace psr;

namespace {

using PyTrajectory = std::vector<std::pair<int, int>>;

AoSequence to_sequence(const PyTrajectory& t) {
  AoSequence s;
  s.reserve(t.size());
  for (const auto& [a, o] : t) s.push_back({a, o});
  return s;
}

PyTrajectory from_sequence(const AoSequence& s) {
  PyTrajectory t;
  t.reserve(s.size());
  for (const auto& p : s) t.emplace_back(p.action, p.observation);
  return t;
}

std::vector<AoSequence> to_sequences(const std::vector<PyTrajectory>& ts) {
  std::vector<AoSequence> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(to_sequence(t));
  return out;
}

py::dict record_to_dict(const EpisodeRecord& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["return"] = r.undiscounted_return;
  d["discounted_return"] = r.discounted_return;
  d["length"] = r.length;
  d["epsilon"] = r.epsilon;
  d["rank"] = r.rank;
  d["resets"] = r.resets;
  d["ms"] = r.ms;
  return d;
}

RunConfig config_with_overrides(const std::string& text, std::optional<std::uint64_t> seed,
                                std::optional<int> episodes, std::optional<int> sims) {
  RunConfig c = parse_run_config(text);
  if (seed) c.seed = *seed;
  if (episodes) c.n_episodes = *episodes;
  if (sims) c.search.n_sims = *sims;
  c.validate();
  return c;
}

// Owns the environment so specs referenced by searches outlive the call.
struct PyEnvironment {
  std::shared_ptr<const Environment> env;
};

PyEnvironment make_env(const std::string& name) {
  EnvConfig cfg = default_run_config(name).env;
  return {std::shared_ptr<const Environment>(make_environment(cfg))};
}

}  // namespace

PYBIND11_MODULE(_psrplan, m) {
  m.doc() = "Online spectral PSR learning and Monte-Carlo tree search planning";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SnapshotError>(m, "SnapshotError", PyExc_ValueError);

  py::class_<PyEnvironment>(m, "Environment")
      .def(py::init(&make_env), py::arg("name"))
      .def_property_readonly("name", [](const PyEnvironment& e) { return e.env->spec().name; })
      .def_property_readonly("num_actions", [](const PyEnvironment& e) { return e.env->spec().alphabet.num_actions; })
      .def_property_readonly("num_observations",
                             [](const PyEnvironment& e) { return e.env->spec().alphabet.num_observations; })
      .def_property_readonly("action_names", [](const PyEnvironment& e) { return e.env->spec().action_names; })
      .def_property_readonly("observation_names",
                             [](const PyEnvironment& e) { return e.env->spec().observation_names; })
      .def_property_readonly("max_steps", [](const PyEnvironment& e) { return e.env->spec().max_steps; })
      .def("is_terminal", [](const PyEnvironment& e, int o) { return e.env->spec().is_terminal(o); })
      .def("reward", [](const PyEnvironment& e, int a, int o) { return e.env->spec().reward(a, o); })
      .def(
          "explore",
          [](const PyEnvironment& e, int n, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            std::vector<PyTrajectory> out;
            for (int i = 0; i < n; ++i) out.push_back(from_sequence(run_exploration_episode(*e.env, rng).trajectory));
            return out;
          },
          py::arg("episodes"), py::arg("seed") = 1, "Trajectories of (action, observation) pairs.");

  py::class_<PsrModel>(m, "Model")
      .def_property_readonly("rank", &PsrModel::rank)
      .def_property_readonly("num_actions", [](const PsrModel& p) { return p.alphabet.num_actions; })
      .def_property_readonly("num_observations", [](const PsrModel& p) { return p.alphabet.num_observations; })
      .def_readonly("b1", &PsrModel::b1)
      .def_readonly("b_inf", &PsrModel::b_inf)
      .def("op", &PsrModel::op, py::arg("action"), py::arg("observation"))
      .def("initial_belief", [](const PsrModel& p) { return initial_belief(p); })
      .def(
          "filter",
          [](const PsrModel& p, const Eigen::VectorXd& b, int a, int o) {
            const auto r = filter_update(p, b, a, o);
            return py::make_tuple(r.belief, r.reset);
          },
          py::arg("belief"), py::arg("action"), py::arg("observation"), "Returns (belief, reset).")
      .def(
          "predict",
          [](const PsrModel& p, const Eigen::VectorXd& b, int a) { return one_step_obs_dist(p, b, a).sanitized; },
          py::arg("belief"), py::arg("action"), "Sanitized next-observation distribution.")
      .def(
          "sequence_prob",
          [](const PsrModel& p, const PyTrajectory& t) { return sequence_prob(p, to_sequence(t)); },
          py::arg("sequence"))
      .def(
          "plan",
          [](const PsrModel& p, const PyEnvironment& e, const Eigen::VectorXd& b, int sims, std::uint64_t seed) {
            SearchConfig cfg = default_run_config(e.env->spec().name).search;
            cfg.n_sims = sims;
            cfg.seed = seed;
            return act_search(p, e.env->spec(), b, cfg);
          },
          py::arg("env"), py::arg("belief"), py::arg("sims") = 1000, py::arg("seed") = 0,
          "Greedy action of a fresh UCT search.")
      .def("to_json", [](const PsrModel& p) { return snapshot_to_json({"", p, std::nullopt}); })
      .def_static(
          "from_json", [](const std::string& text) { return snapshot_from_json(text).model; }, py::arg("text"))
      .def("save", [](const PsrModel& p, const std::filesystem::path& path) { save_snapshot({"", p, std::nullopt}, path); })
      .def_static(
          "load", [](const std::filesystem::path& path) { return load_snapshot(path).model; }, py::arg("path"));

  py::class_<SpectralLearner>(m, "Learner")
      .def(py::init([](const PyEnvironment& e, std::optional<std::size_t> max_history, std::optional<std::size_t> max_test,
                       std::optional<int> fixed_rank, const std::string& update_mode) {
             LearnerConfig cfg = default_run_config(e.env->spec().name).learner;
             if (max_history) cfg.limits.max_history_length = *max_history;
             if (max_test) cfg.limits.max_test_length = *max_test;
             if (fixed_rank) cfg.update.truncation.fixed_rank = *fixed_rank;
             if (update_mode == "large-data") {
               cfg.update.mode = UpdateMode::large_data;
             } else if (update_mode != "recount") {
               throw ConfigError("update_mode must be recount or large-data");
             }
             return SpectralLearner(e.env->spec().alphabet, cfg);
           }),
           py::arg("env"), py::arg("max_history") = py::none(), py::arg("max_test") = py::none(),
           py::arg("fixed_rank") = py::none(), py::arg("update_mode") = "recount")
      .def(
          "initialize", [](SpectralLearner& l, const std::vector<PyTrajectory>& t) { l.initialize(to_sequences(t)); },
          py::arg("trajectories"))
      .def(
          "update", [](SpectralLearner& l, const std::vector<PyTrajectory>& t) { return l.update(to_sequences(t)); },
          py::arg("trajectories"), "Returns True when the update reset the model.")
      .def_property_readonly("ready", &SpectralLearner::ready)
      .def_property_readonly("model",
                             [](const SpectralLearner& l) -> py::object {
                               if (!l.ready()) return py::none();
                               return py::cast(*l.model());
                             })
      .def_property_readonly("num_trajectories", [](const SpectralLearner& l) { return l.counts().num_trajectories; })
      .def_property_readonly("num_histories", [](const SpectralLearner& l) { return l.dictionaries().histories.size(); })
      .def_property_readonly("num_tests", [](const SpectralLearner& l) { return l.dictionaries().tests.size(); });

  m.def(
      "tiger_prediction_error",
      [](const PsrModel& model, int queries, int max_history, std::uint64_t seed) {
        Tiger tiger;
        std::mt19937_64 rng(seed);
        const auto r = prediction_error(tiger, make_tiger_pomdp(), model, queries, max_history, rng);
        py::dict d;
        d["mean_l1"] = r.mean_l1;
        d["max_l1"] = r.max_l1;
        d["queries"] = r.queries;
        d["fallbacks"] = r.fallbacks;
        return d;
      },
      py::arg("model"), py::arg("queries") = 1000, py::arg("max_history") = 4, py::arg("seed") = 1,
      "L1 distance of one-step predictions to the exact Tiger POMDP.");

  m.def("default_config", [](const std::string& env) { return canonical_config(default_run_config(env)); },
        py::arg("env"), "Canonical key=value listing of the defaults for an environment.");
  m.def("validate_config", [](const std::string& text) { return canonical_config(parse_run_config(text)); },
        py::arg("text"), "Parses INI text and returns its canonical form; raises ConfigError.");
  m.def(
      "run",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<int> episodes,
         std::optional<int> sims) {
        const RunConfig c = config_with_overrides(text, seed, episodes, sims);
        py::gil_scoped_release release;
        return curve_to_csv(run_online(c));
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("episodes") = py::none(), py::arg("sims") = py::none(),
      "Runs the online loop on INI config text and returns the CSV learning curve.");
  m.def(
      "run_records",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<int> episodes,
         std::optional<int> sims) {
        const RunConfig c = config_with_overrides(text, seed, episodes, sims);
        LearningCurve curve;
        {
          py::gil_scoped_release release;
          curve = run_online(c);
        }
        py::list out;
        for (const auto& r : curve.records) out.append(record_to_dict(r));
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("episodes") = py::none(), py::arg("sims") = py::none(),
      "Same as run() with one dict per episode.");
  m.def("rocksample_state_count", &rocksample_state_count, py::arg("n"), py::arg("k"));
}
