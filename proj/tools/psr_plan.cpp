// psr-plan: online PSR learning and planning from the command line.
//
// Exit codes: 0 success, 1 config or usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "psr/harness.hpp"
#include "psr/oracle.hpp"
#include "psr/snapshot.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void write_curve(const psr::LearningCurve& curve, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << psr::curve_to_csv(curve);
    std::cout.flush();
  } else {
    psr::export_curve(curve, path);
  }
}

double mean_return(const psr::LearningCurve& curve, std::size_t first, std::size_t last) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i < last && i < curve.records.size(); ++i, ++n) sum += curve.records[i].undiscounted_return;
  return n ? sum / static_cast<double>(n) : 0.0;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> sims;
  std::string out;
  std::string save_model;
  bool quiet = false;
};

int cmd_run(const RunArgs& args) {
  psr::RunConfig config;
  try {
    config = psr::load_run_config(args.config);
    if (args.seed) config.seed = *args.seed;
    if (args.episodes) config.n_episodes = *args.episodes;
    if (args.sims) config.search.n_sims = *args.sims;
    if (!args.out.empty()) config.output = args.out;
    if (!args.save_model.empty()) config.model_output = args.save_model;
    config.validate();
  } catch (const psr::ConfigError& e) {
    std::cerr << "psr-plan: config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    std::shared_ptr<const psr::SpectralLearner> learner;
    psr::RunHooks hooks;
    if (!args.quiet) {
      hooks.on_episode = [&](const psr::EpisodeRecord& r) {
        if (r.episode % 10 == 0 || r.episode == config.n_episodes) {
          std::fprintf(stderr, "episode %d return %.3f eps %.3f rank %d\n", r.episode, r.undiscounted_return,
                       r.epsilon, r.rank);
        }
      };
    }
    const psr::LearningCurve curve = psr::run_online(config, hooks, &learner);
    write_curve(curve, config.output);
    if (!config.model_output.empty()) {
      if (!learner || !learner->ready()) throw std::runtime_error("no model was built; nothing to save");
      psr::save_snapshot({curve.env_name, *learner->model(), learner->dictionaries()}, config.model_output);
    }
    if (!args.quiet) {
      const std::size_t n = curve.records.size();
      const std::size_t tail = std::min<std::size_t>(n, 20);
      std::fprintf(stderr, "config %s seed %llu episodes %zu model resets %d rank changes %d\n",
                   curve.config_hash.c_str(), static_cast<unsigned long long>(curve.seed), n, curve.model_resets,
                   curve.rank_changes);
      std::fprintf(stderr, "mean return: first %d episodes %.3f, last %zu episodes %.3f\n",
                   config.n_random_episodes, mean_return(curve, 0, static_cast<std::size_t>(config.n_random_episodes)),
                   tail, mean_return(curve, n - tail, n));
    }
  } catch (const std::exception& e) {
    std::cerr << "psr-plan: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string env;
  int episodes = 10;
  std::optional<int> sims;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  psr::RunConfig defaults;
  try {
    defaults = psr::default_run_config(args.env);
    if (args.sims) defaults.search.n_sims = *args.sims;
    if (args.episodes < 0) throw psr::ConfigError("--episodes must be >= 0");
    defaults.validate();
  } catch (const psr::ConfigError& e) {
    std::cerr << "psr-plan: config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const psr::ModelSnapshot snapshot = psr::load_snapshot(args.model);
    const auto env = psr::make_environment(defaults.env);
    if (!(snapshot.model.alphabet == env->spec().alphabet)) {
      std::cerr << "psr-plan: config error: model alphabet does not match environment " << args.env << "\n";
      return kConfigError;
    }
    const psr::LearningCurve curve =
        psr::evaluate_model(*env, snapshot.model, defaults.search, args.episodes, args.seed, defaults.max_steps);
    write_curve(curve, args.out);
    std::fprintf(stderr, "mean return over %zu episodes: %.4f\n", curve.records.size(),
                 mean_return(curve, 0, curve.records.size()));
  } catch (const std::exception& e) {
    std::cerr << "psr-plan: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

struct OracleArgs {
  std::string env = "tiger";
  int episodes = 5000;
  int queries = 1000;
  int max_history = 4;
  std::uint64_t seed = 1;
};

int cmd_oracle_check(const OracleArgs& args) {
  if (args.env != "tiger") {
    std::cerr << "psr-plan: config error: an exact oracle exists only for tiger\n";
    return kConfigError;
  }
  if (args.episodes < 1 || args.queries < 1 || args.max_history < 0) {
    std::cerr << "psr-plan: config error: --episodes and --queries must be >= 1\n";
    return kConfigError;
  }
  try {
    const psr::RunConfig config = psr::default_run_config("tiger");
    const auto env = psr::make_environment(config.env);
    std::mt19937_64 train_rng(args.seed);
    std::vector<psr::AoSequence> data;
    for (int i = 0; i < args.episodes; ++i) data.push_back(psr::run_exploration_episode(*env, train_rng).trajectory);
    psr::SpectralLearner learner(env->spec().alphabet, config.learner);
    learner.initialize(data);

    std::mt19937_64 query_rng(args.seed + 0x9e3779b97f4a7c15ull);
    const psr::PredictionReport report = psr::prediction_error(*env, psr::make_tiger_pomdp(config.env.tiger),
                                                               *learner.model(), args.queries, args.max_history,
                                                               query_rng);
    std::printf("env tiger\ntraining_episodes %d\nrank %d\nqueries %d\nmean_l1 %.6g\nmax_l1 %.6g\nfallbacks %lld\n",
                args.episodes, learner.model()->rank(), report.queries, report.mean_l1, report.max_l1,
                static_cast<long long>(report.fallbacks));
  } catch (const std::exception& e) {
    std::cerr << "psr-plan: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online PSR spectral learning with Monte-Carlo tree search planning"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Learn online and plan; writes the learning curve as CSV");
  run_cmd->add_option("--config", run.config, "INI config file")->required();
  run_cmd->add_option("--seed", run.seed, "RNG seed");
  run_cmd->add_option("--episodes", run.episodes, "Total episodes");
  run_cmd->add_option("--sims", run.sims, "Simulations per step");
  run_cmd->add_option("--out", run.out, "CSV output path (default: config output, else stdout)");
  run_cmd->add_option("--save-model", run.save_model, "Write the final model snapshot here");
  run_cmd->add_flag("--quiet,-q", run.quiet, "No progress on stderr");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Plan greedily with a frozen model snapshot");
  eval_cmd->add_option("--model", eval.model, "Model snapshot (JSON)")->required();
  eval_cmd->add_option("--env", eval.env, "Environment name")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "Episodes to run");
  eval_cmd->add_option("--sims", eval.sims, "Simulations per step");
  eval_cmd->add_option("--seed", eval.seed, "RNG seed");
  eval_cmd->add_option("--out", eval.out, "CSV output path (default: stdout)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare learned one-step predictions with the exact model");
  oracle_cmd->add_option("--env", oracle.env, "Environment (tiger)");
  oracle_cmd->add_option("--episodes", oracle.episodes, "Random-policy training episodes");
  oracle_cmd->add_option("--queries", oracle.queries, "Held-out (history, action) queries");
  oracle_cmd->add_option("--max-history", oracle.max_history, "Longest query history");
  oracle_cmd->add_option("--seed", oracle.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*run_cmd) return cmd_run(run);
  if (*eval_cmd) return cmd_eval(eval);
  return cmd_oracle_check(oracle);
}
