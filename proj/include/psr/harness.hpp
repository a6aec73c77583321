#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "psr/envs.hpp"
#include "psr/mcts.hpp"
#include "psr/oracle.hpp"
#include "psr/spectral.hpp"

namespace psr {

enum class ScheduleMode { linear, staircase };

/// Exploration rate for the planning phase. Episodes are 1-based.
struct EpsilonSchedule {
  ScheduleMode mode = ScheduleMode::linear;
  double start = 0.5;
  double end = 0.0;
  int start_episode = 21;
  int end_episode = 100;
  int interval = 40;       // staircase only
  double decrement = 0.2;  // staircase only
};

/// 1.0 during the random phase; afterwards the schedule value.
double epsilon_at(int episode, int n_random_episodes, const EpsilonSchedule& schedule);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  EnvConfig env;
  LearnerConfig learner;
  int n_random_episodes = 20;
  int n_episodes = 100;
  int max_steps = 0;  // 0 keeps the environment default
  EpsilonSchedule epsilon;
  SearchConfig search;
  std::uint64_t seed = 1;
  bool record_timing = false;
  std::string output;
  std::string model_output;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Per-domain defaults for "tiger", "posyadmin", "rocksample" / "rocksample-N-K".
RunConfig default_run_config(const std::string& env_name);

/// INI-style file with sections mirroring RunConfig; unknown sections or keys are errors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every configurable key as "section.key=value", one per line, in a fixed order.
std::string canonical_config(const RunConfig& config);

struct EpisodeRecord {
  int episode = 0;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  int length = 0;
  double epsilon = 0.0;
  int rank = 0;
  std::int64_t resets = 0;
  double ms = 0.0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct LearningCurve {
  std::vector<EpisodeRecord> records;
  std::string env_name;
  std::string config_hash;
  std::uint64_t seed = 0;
  int model_resets = 0;
  int rank_changes = 0;
};

struct RunHooks {
  /// Called after each episode with its record.
  std::function<void(const EpisodeRecord&)> on_episode;
  /// Called with every executed trajectory before it reaches the learner.
  std::function<void(int episode, const AoSequence&)> on_trajectory;
  /// Called after every model build or update.
  std::function<void(int episode, const SpectralLearner&)> on_model;
  /// Replaces the planner's action choice (used to test the epsilon-greedy wrapper).
  std::function<int(const BeliefVector&)> planner_override;
};

/// Online learn-and-plan loop: random exploration, then epsilon-greedy planning with
/// an incremental model update after every episode. The final learner is handed
/// out through `learner_out` when given.
LearningCurve run_online(const RunConfig& config, const RunHooks& hooks = {},
                         std::shared_ptr<const SpectralLearner>* learner_out = nullptr);

struct PlanningEpisode {
  Episode episode;
  std::int64_t resets = 0;
};

/// Plans one episode with a fixed model, executing a uniformly random other action
/// with probability epsilon. `max_steps` = 0 keeps the EnvSpec::max_steps cap.
PlanningEpisode run_planning_episode(const Environment& env, const PsrModel& model, const SearchConfig& search,
                                     int max_steps, double epsilon, std::mt19937_64& env_rng, std::mt19937_64& agent_rng,
                                     const std::function<int(const BeliefVector&)>& planner_override = {});

/// Frozen-model evaluation: greedy planning, no updates.
LearningCurve evaluate_model(const Environment& env, const PsrModel& model, const SearchConfig& search,
                             int n_episodes, std::uint64_t seed, int max_steps = 0);

/// FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

struct PredictionReport {
  double mean_l1 = 0.0;
  double max_l1 = 0.0;
  int queries = 0;
  std::int64_t fallbacks = 0;
};

/// Mean L1 distance between sanitized one-step model predictions and the exact
/// oracle over (history, action) queries. Histories are drawn from the environment's
/// exploration policy, truncated to at most `max_history` pairs, non-terminal.
PredictionReport prediction_error(const Environment& env, const PomdpModel& oracle, const PsrModel& model,
                                  int n_queries, int max_history, std::mt19937_64& rng);

void export_curve(const LearningCurve& curve, const std::filesystem::path& path);
std::string curve_to_csv(const LearningCurve& curve);
std::vector<EpisodeRecord> parse_curve_csv(const std::string& text);
std::vector<EpisodeRecord> read_curve(const std::filesystem::path& path);

}  // namespace psr
