#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "psr/core.hpp"

namespace psr {

/// Observable contract of an environment. Reward-observations carry their reward
/// in `reward_of_obs`; state-independent rewards live in `reward_of_ao`.
struct EnvSpec {
  std::string name;
  Alphabet alphabet;
  std::vector<std::string> action_names;
  std::vector<std::string> observation_names;
  std::vector<bool> terminal_obs;
  std::vector<std::optional<double>> reward_of_obs;
  Eigen::MatrixXd reward_of_ao;  // actions x observations
  double gamma = 0.95;
  int max_steps = 100;           // episode length cap

  bool is_terminal(int o) const { return terminal_obs[static_cast<std::size_t>(o)]; }
  bool is_reward_obs(int o) const { return reward_of_obs[static_cast<std::size_t>(o)].has_value(); }
  /// Immediate reward of a step: the observation's reward (if any) plus the
  /// state-independent reward of the pair.
  double reward(int a, int o) const {
    const auto& r = reward_of_obs[static_cast<std::size_t>(o)];
    return (r ? *r : 0.0) + reward_of_ao(a, o);
  }
  /// Throws std::invalid_argument if the tables are inconsistent.
  void check() const;
};

struct TigerState {
  bool tiger_left = true;
};

struct SysadminState {
  std::vector<bool> failed;
};

struct RockSampleState {
  int x = 0;
  int y = 0;
  std::vector<bool> good;
  std::vector<bool> sampled;
  std::vector<int> checks;
  bool terminal = false;
};

/// Free-form state for environments defined outside this library.
struct GenericState {
  std::vector<std::int64_t> data;
};

/// Hidden environment state. Never exposed to the learner or the planner.
using EnvState = std::variant<TigerState, SysadminState, RockSampleState, GenericState>;

struct StepResult {
  int observation = 0;
  double reward = 0.0;
  bool terminal = false;
};

class InvalidAction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual EnvState reset(std::mt19937_64& rng) const = 0;
  /// Advances `state` in place.
  virtual StepResult step(EnvState& state, int action, std::mt19937_64& rng) const = 0;
  /// Phase-one exploration policy. Uniform over actions unless overridden.
  virtual int exploration_action(const EnvState& state, std::mt19937_64& rng) const;

 protected:
  void check_action(int action) const;
};

struct TigerConfig {
  double listen_accuracy = 0.85;
  double listen_reward = -1.0;
  double correct_reward = 10.0;
  double wrong_reward = -100.0;
};

class Tiger final : public Environment {
 public:
  enum Action { kListen = 0, kOpenLeft = 1, kOpenRight = 2 };
  enum Observation { kGrowlLeft = 0, kGrowlRight = 1, kRewardCorrect = 2, kRewardWrong = 3 };

  explicit Tiger(TigerConfig config = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::mt19937_64& rng) const override;
  StepResult step(EnvState& state, int action, std::mt19937_64& rng) const override;
  const TigerConfig& config() const { return config_; }

 private:
  TigerConfig config_;
  EnvSpec spec_;
};

struct SysadminConfig {
  int computers = 3;
  double fail_prob = 0.1;
  double reboot_cost = 1.0;
  double failed_penalty = 1.0;
  int horizon = 15;
};

/// Network of computers that fail independently; the agent only observes how many are down.
/// Action 0 does nothing, action i reboots computer i-1. Observation c means c computers failed.
class Sysadmin final : public Environment {
 public:
  explicit Sysadmin(SysadminConfig config = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::mt19937_64& rng) const override;
  StepResult step(EnvState& state, int action, std::mt19937_64& rng) const override;
  const SysadminConfig& config() const { return config_; }

 private:
  SysadminConfig config_;
  EnvSpec spec_;
};

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

struct RockSampleConfig {
  int size = 5;
  int rocks = 5;
  double half_efficiency_distance = 20.0;
  double good_reward = 10.0;
  double bad_reward = -10.0;
  double exit_reward = 10.0;
  double move_reward = 0.0;
  int max_steps = 100;
  std::vector<Coord> rock_positions;  // empty: built-in layout for (size, rocks)
  std::optional<Coord> start;         // empty: (0, size / 2)
  std::uint64_t layout_seed = 7;      // layouts without a built-in table
};

/// Robot on a size x size board; x grows east, y grows north. Leaving through
/// the east edge ends the episode.
class RockSample final : public Environment {
 public:
  enum Action { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kSample = 4, kCheckFirst = 5 };
  enum Observation { kNone = 0, kGood = 1, kBad = 2, kSampleGood = 3, kSampleBad = 4, kExit = 5 };

  explicit RockSample(RockSampleConfig config = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::mt19937_64& rng) const override;
  StepResult step(EnvState& state, int action, std::mt19937_64& rng) const override;
  int exploration_action(const EnvState& state, std::mt19937_64& rng) const override;

  const RockSampleConfig& config() const { return config_; }
  const std::vector<Coord>& rocks() const { return rocks_; }
  Coord start() const { return start_; }
  /// Index of the rock at `c`, if any.
  std::optional<int> rock_at(Coord c) const;
  /// Probability that a check of rock `rock` from `from` reports its true quality.
  double sensor_accuracy(Coord from, int rock) const;

 private:
  RockSampleConfig config_;
  std::vector<Coord> rocks_;
  Coord start_;
  EnvSpec spec_;
};

/// n^2 2^k + 1: every robot cell and rock-quality assignment plus the exit state.
std::int64_t rocksample_state_count(int n, int k);

struct EnvConfig {
  std::string name = "tiger";
  TigerConfig tiger;
  SysadminConfig sysadmin;
  RockSampleConfig rocksample;
};

/// Accepts "tiger", "posyadmin" (or "sysadmin") and "rocksample" (size and rock
/// count from the config, or spelled "rocksample-N-K").
std::unique_ptr<Environment> make_environment(const EnvConfig& config);

/// Rolls one episode with the uniform-random policy or the environment's exploration policy.
struct Episode {
  AoSequence trajectory;
  double undiscounted = 0.0;
  double discounted = 0.0;
  bool terminated = false;
};
Episode run_exploration_episode(const Environment& env, std::mt19937_64& rng);
/// Separate streams for the environment and the policy; `max_steps` = 0 keeps the EnvSpec::max_steps cap.
Episode run_exploration_episode(const Environment& env, std::mt19937_64& env_rng, std::mt19937_64& agent_rng,
                                int max_steps);

}  // namespace psr
