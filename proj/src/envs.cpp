#include "psr/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace psr {

namespace {

EnvSpec blank_spec(std::string name, int num_actions, int num_obs) {
  EnvSpec s;
  s.name = std::move(name);
  s.alphabet = {num_actions, num_obs};
  s.action_names.resize(static_cast<std::size_t>(num_actions));
  s.observation_names.resize(static_cast<std::size_t>(num_obs));
  s.terminal_obs.assign(static_cast<std::size_t>(num_obs), false);
  s.reward_of_obs.assign(static_cast<std::size_t>(num_obs), std::nullopt);
  s.reward_of_ao = Eigen::MatrixXd::Zero(num_actions, num_obs);
  return s;
}

bool bernoulli(double p, std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

int uniform_int(int n, std::mt19937_64& rng) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

}  // namespace

void EnvSpec::check() const {
  const auto na = static_cast<std::size_t>(alphabet.num_actions);
  const auto no = static_cast<std::size_t>(alphabet.num_observations);
  if (action_names.size() != na || observation_names.size() != no || terminal_obs.size() != no ||
      reward_of_obs.size() != no || reward_of_ao.rows() != alphabet.num_actions ||
      reward_of_ao.cols() != alphabet.num_observations) {
    throw std::invalid_argument("environment spec tables do not match the alphabet");
  }
  for (std::size_t o = 0; o < no; ++o) {
    if (terminal_obs[o] && !reward_of_obs[o]) {
      throw std::invalid_argument("terminal observation '" + observation_names[o] + "' carries no reward");
    }
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be positive");
}

int Environment::exploration_action(const EnvState&, std::mt19937_64& rng) const {
  return uniform_int(spec().alphabet.num_actions, rng);
}

void Environment::check_action(int action) const {
  if (action < 0 || action >= spec().alphabet.num_actions) {
    throw InvalidAction(spec().name + ": invalid action " + std::to_string(action));
  }
}

// ---------------------------------------------------------------- Tiger

Tiger::Tiger(TigerConfig config) : config_(config), spec_(blank_spec("tiger", 3, 4)) {
  if (!(config_.listen_accuracy >= 0.0 && config_.listen_accuracy <= 1.0)) {
    throw std::invalid_argument("tiger listen accuracy must lie in [0, 1]");
  }
  spec_.action_names = {"listen", "open-left", "open-right"};
  spec_.observation_names = {"growl-left", "growl-right", "reward-correct", "reward-wrong"};
  spec_.terminal_obs = {false, false, true, true};
  spec_.reward_of_obs = {std::nullopt, std::nullopt, config_.correct_reward, config_.wrong_reward};
  spec_.reward_of_ao(kListen, kGrowlLeft) = config_.listen_reward;
  spec_.reward_of_ao(kListen, kGrowlRight) = config_.listen_reward;
  spec_.check();
}

EnvState Tiger::reset(std::mt19937_64& rng) const { return TigerState{bernoulli(0.5, rng)}; }

StepResult Tiger::step(EnvState& state, int action, std::mt19937_64& rng) const {
  check_action(action);
  auto& s = std::get<TigerState>(state);
  int o = kGrowlLeft;
  if (action == kListen) {
    const bool correct = bernoulli(config_.listen_accuracy, rng);
    o = (s.tiger_left == correct) ? kGrowlLeft : kGrowlRight;
  } else {
    const bool opened_left = action == kOpenLeft;
    o = (opened_left != s.tiger_left) ? kRewardCorrect : kRewardWrong;
  }
  return {o, spec_.reward(action, o), spec_.is_terminal(o)};
}

// ---------------------------------------------------------------- Sysadmin

Sysadmin::Sysadmin(SysadminConfig config)
    : config_(config), spec_(blank_spec("posyadmin", config.computers + 1, config.computers + 1)) {
  if (config_.computers < 1) throw std::invalid_argument("posyadmin needs at least one computer");
  if (!(config_.fail_prob >= 0.0 && config_.fail_prob <= 1.0)) {
    throw std::invalid_argument("posyadmin fail probability must lie in [0, 1]");
  }
  spec_.action_names[0] = "do-nothing";
  for (int i = 0; i < config_.computers; ++i) {
    spec_.action_names[static_cast<std::size_t>(i + 1)] = "reboot-" + std::to_string(i);
  }
  for (int c = 0; c <= config_.computers; ++c) {
    spec_.observation_names[static_cast<std::size_t>(c)] = "failed-" + std::to_string(c);
    spec_.reward_of_obs[static_cast<std::size_t>(c)] = -config_.failed_penalty * c;
  }
  spec_.reward_of_ao.bottomRows(config_.computers).setConstant(-config_.reboot_cost);
  spec_.max_steps = config_.horizon;
  spec_.check();
}

EnvState Sysadmin::reset(std::mt19937_64&) const {
  return SysadminState{std::vector<bool>(static_cast<std::size_t>(config_.computers), false)};
}

StepResult Sysadmin::step(EnvState& state, int action, std::mt19937_64& rng) const {
  check_action(action);
  auto& s = std::get<SysadminState>(state);
  const int rebooted = action - 1;
  int failed = 0;
  for (int i = 0; i < config_.computers; ++i) {
    auto&& f = s.failed[static_cast<std::size_t>(i)];
    if (i == rebooted) {
      f = false;
    } else if (!f && bernoulli(config_.fail_prob, rng)) {
      f = true;
    }
    failed += f ? 1 : 0;
  }
  return {failed, spec_.reward(action, failed), false};
}

// ---------------------------------------------------------------- RockSample

namespace {

std::vector<Coord> builtin_layout(int size, int rocks) {
  if (size == 5 && rocks == 5) return {{2, 4}, {0, 4}, {3, 3}, {2, 2}, {4, 1}};
  if (size == 5 && rocks == 7) return {{2, 4}, {0, 4}, {3, 3}, {2, 2}, {4, 1}, {1, 0}, {3, 1}};
  return {};
}

}  // namespace

RockSample::RockSample(RockSampleConfig config)
    : config_(std::move(config)),
      spec_(blank_spec("rocksample-" + std::to_string(config_.size) + "-" + std::to_string(config_.rocks),
                       kCheckFirst + config_.rocks, 6)) {
  if (config_.size < 1 || config_.rocks < 0) throw std::invalid_argument("rocksample needs size >= 1, rocks >= 0");
  if (config_.rocks > config_.size * config_.size) throw std::invalid_argument("more rocks than cells");
  start_ = config_.start.value_or(Coord{0, config_.size / 2});
  rocks_ = config_.rock_positions.empty() ? builtin_layout(config_.size, config_.rocks) : config_.rock_positions;
  if (rocks_.empty() && config_.rocks > 0) {
    std::mt19937_64 layout_rng(config_.layout_seed);
    while (static_cast<int>(rocks_.size()) < config_.rocks) {
      const Coord c{uniform_int(config_.size, layout_rng), uniform_int(config_.size, layout_rng)};
      if (std::find(rocks_.begin(), rocks_.end(), c) == rocks_.end()) rocks_.push_back(c);
    }
  }
  if (static_cast<int>(rocks_.size()) != config_.rocks) throw std::invalid_argument("rock layout size mismatch");
  for (const Coord& c : rocks_) {
    if (c.x < 0 || c.y < 0 || c.x >= config_.size || c.y >= config_.size) {
      throw std::invalid_argument("rock outside the board");
    }
  }
  if (start_.x < 0 || start_.y < 0 || start_.x >= config_.size || start_.y >= config_.size) {
    throw std::invalid_argument("start cell outside the board");
  }

  spec_.action_names[kNorth] = "north";
  spec_.action_names[kSouth] = "south";
  spec_.action_names[kEast] = "east";
  spec_.action_names[kWest] = "west";
  spec_.action_names[kSample] = "sample";
  for (int i = 0; i < config_.rocks; ++i) {
    spec_.action_names[static_cast<std::size_t>(kCheckFirst + i)] = "check-" + std::to_string(i);
  }
  spec_.observation_names = {"none", "good", "bad", "reward-sample-good", "reward-sample-bad", "reward-exit"};
  spec_.reward_of_obs[kSampleGood] = config_.good_reward;
  spec_.reward_of_obs[kSampleBad] = config_.bad_reward;
  spec_.reward_of_obs[kExit] = config_.exit_reward;
  spec_.terminal_obs[kExit] = true;
  for (int a = kNorth; a <= kWest; ++a) {
    spec_.reward_of_ao(a, kNone) = config_.move_reward;
  }
  spec_.max_steps = config_.max_steps;
  spec_.check();
}

std::optional<int> RockSample::rock_at(Coord c) const {
  for (std::size_t i = 0; i < rocks_.size(); ++i) {
    if (rocks_[i] == c) return static_cast<int>(i);
  }
  return std::nullopt;
}

double RockSample::sensor_accuracy(Coord from, int rock) const {
  const Coord r = rocks_.at(static_cast<std::size_t>(rock));
  const double d = std::hypot(static_cast<double>(from.x - r.x), static_cast<double>(from.y - r.y));
  return 0.5 * (1.0 + std::pow(2.0, -d / config_.half_efficiency_distance));
}

EnvState RockSample::reset(std::mt19937_64& rng) const {
  RockSampleState s;
  s.x = start_.x;
  s.y = start_.y;
  const auto k = static_cast<std::size_t>(config_.rocks);
  s.good.resize(k);
  for (std::size_t i = 0; i < k; ++i) s.good[i] = bernoulli(0.5, rng);
  s.sampled.assign(k, false);
  s.checks.assign(k, 0);
  return s;
}

StepResult RockSample::step(EnvState& state, int action, std::mt19937_64& rng) const {
  check_action(action);
  auto& s = std::get<RockSampleState>(state);
  if (s.terminal) throw std::logic_error("rocksample: step after the episode ended");
  int o = kNone;
  const int n = config_.size;
  switch (action) {
    case kNorth:
      if (s.y + 1 < n) ++s.y;
      break;
    case kSouth:
      if (s.y > 0) --s.y;
      break;
    case kWest:
      if (s.x > 0) --s.x;
      break;
    case kEast:
      if (s.x + 1 < n) {
        ++s.x;
      } else {
        s.terminal = true;
        o = kExit;
      }
      break;
    case kSample:
      if (const auto r = rock_at({s.x, s.y})) {
        const auto i = static_cast<std::size_t>(*r);
        o = s.good[i] ? kSampleGood : kSampleBad;
        s.good[i] = false;
        s.sampled[i] = true;
      }
      break;
    default: {
      const int rock = action - kCheckFirst;
      const auto i = static_cast<std::size_t>(rock);
      ++s.checks[i];
      const bool truthful = bernoulli(sensor_accuracy({s.x, s.y}, rock), rng);
      o = (s.good[i] == truthful) ? kGood : kBad;
      break;
    }
  }
  return {o, spec_.reward(action, o), spec_.is_terminal(o)};
}

int RockSample::exploration_action(const EnvState& state, std::mt19937_64& rng) const {
  const auto& s = std::get<RockSampleState>(state);
  if (const auto r = rock_at({s.x, s.y}); r && !s.sampled[static_cast<std::size_t>(*r)]) {
    if (s.checks[static_cast<std::size_t>(*r)] > 0 || bernoulli(0.5, rng)) return kSample;
  }
  std::vector<int> choices{kNorth, kSouth, kEast, kWest};
  for (int i = 0; i < config_.rocks; ++i) {
    if (s.checks[static_cast<std::size_t>(i)] < 2) choices.push_back(kCheckFirst + i);
  }
  return choices[static_cast<std::size_t>(uniform_int(static_cast<int>(choices.size()), rng))];
}

std::int64_t rocksample_state_count(int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("rocksample_state_count needs n, k >= 1");
  return static_cast<std::int64_t>(n) * n * (std::int64_t{1} << k) + 1;
}

// ---------------------------------------------------------------- factory

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  const std::string& name = config.name;
  if (name == "tiger") return std::make_unique<Tiger>(config.tiger);
  if (name == "posyadmin" || name == "sysadmin") return std::make_unique<Sysadmin>(config.sysadmin);
  if (name == "rocksample") return std::make_unique<RockSample>(config.rocksample);
  if (name.rfind("rocksample-", 0) == 0) {
    RockSampleConfig rc = config.rocksample;
    const auto dash = name.find('-', 11);
    if (dash == std::string::npos) throw std::invalid_argument("expected rocksample-N-K, got " + name);
    try {
      rc.size = std::stoi(name.substr(11, dash - 11));
      rc.rocks = std::stoi(name.substr(dash + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("expected rocksample-N-K, got " + name);
    }
    if (rc.rocks != config.rocksample.rocks || rc.size != config.rocksample.size) rc.rock_positions.clear();
    return std::make_unique<RockSample>(rc);
  }
  throw std::invalid_argument("unknown environment '" + name + "'");
}

Episode run_exploration_episode(const Environment& env, std::mt19937_64& rng) {
  return run_exploration_episode(env, rng, rng, 0);
}

Episode run_exploration_episode(const Environment& env, std::mt19937_64& env_rng, std::mt19937_64& agent_rng,
                                int max_steps) {
  const EnvSpec& spec = env.spec();
  const int cap = max_steps > 0 ? max_steps : spec.max_steps;
  Episode ep;
  EnvState s = env.reset(env_rng);
  double discount = 1.0;
  for (int t = 0; t < cap; ++t) {
    const int a = env.exploration_action(s, agent_rng);
    const StepResult r = env.step(s, a, env_rng);
    ep.trajectory.push_back({a, r.observation});
    ep.undiscounted += r.reward;
    ep.discounted += discount * r.reward;
    discount *= spec.gamma;
    if (r.terminal) {
      ep.terminated = true;
      break;
    }
  }
  return ep;
}

}  // namespace psr
