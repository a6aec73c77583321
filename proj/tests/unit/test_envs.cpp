#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psr/envs.hpp"

using namespace psr;

namespace {

void expect_binomial(int hits, int n, double p) {
  const double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_LE(std::abs(hits - n * p), 3 * sigma) << hits << " of " << n << " vs p = " << p;
}

// Runs a random policy for a while and checks the observable contract on every step.
void check_contract(const Environment& env, std::uint64_t seed, int episodes) {
  const EnvSpec& spec = env.spec();
  std::mt19937_64 rng(seed);
  for (int e = 0; e < episodes; ++e) {
    EnvState s = env.reset(rng);
    for (int t = 0; t < spec.max_steps; ++t) {
      const int a = env.exploration_action(s, rng);
      ASSERT_GE(a, 0);
      ASSERT_LT(a, spec.alphabet.num_actions);
      const StepResult r = env.step(s, a, rng);
      ASSERT_GE(r.observation, 0);
      ASSERT_LT(r.observation, spec.alphabet.num_observations);
      EXPECT_EQ(r.terminal, spec.is_terminal(r.observation));
      if (spec.is_reward_obs(r.observation)) {
        EXPECT_DOUBLE_EQ(r.reward, *spec.reward_of_obs[static_cast<std::size_t>(r.observation)] +
                                       spec.reward_of_ao(a, r.observation));
      } else {
        EXPECT_DOUBLE_EQ(r.reward, spec.reward_of_ao(a, r.observation));
      }
      if (r.terminal) break;
    }
  }
}

}  // namespace

TEST(Tiger, ResetIsFair) {
  Tiger tiger;
  std::mt19937_64 rng(1);
  int left = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) left += std::get<TigerState>(tiger.reset(rng)).tiger_left;
  expect_binomial(left, n, 0.5);
}

TEST(Tiger, DoorOutcomes) {
  Tiger tiger;
  std::mt19937_64 rng(2);
  EnvState s = TigerState{true};
  auto r = tiger.step(s, Tiger::kOpenRight, rng);
  EXPECT_EQ(r.observation, Tiger::kRewardCorrect);
  EXPECT_EQ(r.reward, 10.0);
  EXPECT_TRUE(r.terminal);
  s = TigerState{true};
  r = tiger.step(s, Tiger::kOpenLeft, rng);
  EXPECT_EQ(r.observation, Tiger::kRewardWrong);
  EXPECT_EQ(r.reward, -100.0);
  EXPECT_TRUE(r.terminal);
}

TEST(Tiger, ListenAccuracy) {
  Tiger tiger;
  std::mt19937_64 rng(3);
  EnvState s = TigerState{false};
  int right = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto r = tiger.step(s, Tiger::kListen, rng);
    EXPECT_EQ(r.reward, -1.0);
    EXPECT_FALSE(r.terminal);
    right += r.observation == Tiger::kGrowlRight;
  }
  expect_binomial(right, n, 0.85);
}

TEST(Tiger, ExplorationIsUniform) {
  Tiger tiger;
  std::mt19937_64 rng(4);
  const EnvState s = TigerState{true};
  std::vector<int> count(3, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++count[static_cast<std::size_t>(tiger.exploration_action(s, rng))];
  for (int c : count) expect_binomial(c, n, 1.0 / 3.0);
}

TEST(Tiger, RejectsInvalidAction) {
  Tiger tiger;
  std::mt19937_64 rng(5);
  EnvState s = tiger.reset(rng);
  EXPECT_THROW(tiger.step(s, 3, rng), InvalidAction);
  EXPECT_THROW(tiger.step(s, -1, rng), InvalidAction);
}

TEST(Sysadmin, ResetAllWorking) {
  Sysadmin env;
  std::mt19937_64 rng(6);
  const auto s = std::get<SysadminState>(env.reset(rng));
  ASSERT_EQ(s.failed.size(), 3u);
  for (bool f : s.failed) EXPECT_FALSE(f);
}

TEST(Sysadmin, NoFailuresWithoutFailProbability) {
  SysadminConfig cfg;
  cfg.fail_prob = 0.0;
  Sysadmin env(cfg);
  std::mt19937_64 rng(7);
  EnvState s = env.reset(rng);
  for (int a = 0; a <= 3; ++a) {
    const auto r = env.step(s, a, rng);
    EXPECT_EQ(r.observation, 0);
    EXPECT_EQ(r.reward, a == 0 ? 0.0 : -cfg.reboot_cost);
  }
}

TEST(Sysadmin, RebootRepairsAndPenaltyCountsFailures) {
  SysadminConfig cfg;
  cfg.fail_prob = 1.0;
  Sysadmin env(cfg);
  std::mt19937_64 rng(8);
  EnvState s = env.reset(rng);
  auto r = env.step(s, 0, rng);
  EXPECT_EQ(r.observation, 3);
  EXPECT_EQ(r.reward, -3.0 * cfg.failed_penalty);
  r = env.step(s, 2, rng);  // reboots computer 1; the rest stay down
  EXPECT_EQ(r.observation, 2);
  EXPECT_FALSE(std::get<SysadminState>(s).failed[1]);
  EXPECT_EQ(r.reward, -2.0 * cfg.failed_penalty - cfg.reboot_cost);
}

TEST(Sysadmin, FailureRate) {
  Sysadmin env;
  std::mt19937_64 rng(9);
  int failed = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    EnvState s = env.reset(rng);
    failed += env.step(s, 0, rng).observation;
  }
  expect_binomial(failed, 3 * n, 0.1);
}

TEST(Sysadmin, HorizonCapsEpisodes) {
  Sysadmin env;
  std::mt19937_64 rng(10);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(run_exploration_episode(env, rng).trajectory.size(), 15u);
}

TEST(RockSample, StandardLayout) {
  RockSample env;
  ASSERT_EQ(env.rocks().size(), 5u);
  EXPECT_EQ(env.start(), (Coord{0, 2}));
  std::mt19937_64 rng(11);
  const auto s = std::get<RockSampleState>(env.reset(rng));
  EXPECT_EQ(s.x, 0);
  EXPECT_EQ(s.y, 2);
  EXPECT_FALSE(s.terminal);
  EXPECT_EQ(env.spec().alphabet.num_actions, 10);
}

TEST(RockSample, SevenRockLayoutIsDistinct) {
  RockSampleConfig cfg;
  cfg.rocks = 7;
  RockSample env(cfg);
  ASSERT_EQ(env.rocks().size(), 7u);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j < 7; ++j) EXPECT_FALSE(env.rocks()[i] == env.rocks()[j]);
}

TEST(RockSample, SampleGoodRockOnce) {
  RockSample env;
  std::mt19937_64 rng(12);
  EnvState state = env.reset(rng);
  auto& s = std::get<RockSampleState>(state);
  const Coord c = env.rocks()[0];
  s.x = c.x;
  s.y = c.y;
  s.good[0] = true;
  auto r = env.step(state, RockSample::kSample, rng);
  EXPECT_EQ(r.observation, RockSample::kSampleGood);
  EXPECT_EQ(r.reward, 10.0);
  EXPECT_FALSE(std::get<RockSampleState>(state).good[0]);
  r = env.step(state, RockSample::kSample, rng);
  EXPECT_EQ(r.observation, RockSample::kSampleBad);
  EXPECT_EQ(r.reward, -10.0);
}

TEST(RockSample, SampleEmptyCellIsNoop) {
  RockSample env;
  std::mt19937_64 rng(13);
  EnvState state = env.reset(rng);
  const auto r = env.step(state, RockSample::kSample, rng);  // start cell has no rock
  EXPECT_EQ(r.observation, RockSample::kNone);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(RockSample, EastExitIsTerminal) {
  RockSample env;
  std::mt19937_64 rng(14);
  EnvState state = env.reset(rng);
  StepResult r;
  for (int i = 0; i < 5; ++i) r = env.step(state, RockSample::kEast, rng);
  EXPECT_EQ(r.observation, RockSample::kExit);
  EXPECT_EQ(r.reward, 10.0);
  EXPECT_TRUE(r.terminal);
  EXPECT_THROW(env.step(state, RockSample::kNorth, rng), std::logic_error);
}

TEST(RockSample, IllegalMovesAreNoops) {
  RockSample env;
  std::mt19937_64 rng(15);
  EnvState state = env.reset(rng);
  const auto r = env.step(state, RockSample::kWest, rng);
  EXPECT_EQ(r.observation, RockSample::kNone);
  const auto& s = std::get<RockSampleState>(state);
  EXPECT_EQ(s.x, 0);
  EXPECT_EQ(s.y, 2);
}

TEST(RockSample, SensorAccuracy) {
  RockSample env;
  EXPECT_DOUBLE_EQ(env.sensor_accuracy(env.rocks()[0], 0), 1.0);
  const Coord far{0, 0};
  const double eta = env.sensor_accuracy(far, 0);
  EXPECT_GT(eta, 0.5);
  EXPECT_LT(eta, 1.0);

  std::mt19937_64 rng(16);
  int truthful = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    EnvState state = env.reset(rng);
    auto& s = std::get<RockSampleState>(state);
    s.x = far.x;
    s.y = far.y;
    const bool good = s.good[0];
    const auto r = env.step(state, RockSample::kCheckFirst, rng);
    truthful += (r.observation == RockSample::kGood) == good;
  }
  expect_binomial(truthful, n, eta);
}

TEST(RockSample, ExplorationHeuristic) {
  RockSample env;
  std::mt19937_64 rng(17);
  EnvState state = env.reset(rng);
  auto& s = std::get<RockSampleState>(state);
  const Coord c = env.rocks()[2];
  s.x = c.x;
  s.y = c.y;
  s.checks[2] = 1;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(env.exploration_action(state, rng), RockSample::kSample);

  // two checks used up: the rock is never checked a third time
  s.x = 0;
  s.y = 0;
  s.checks.assign(5, 2);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(env.exploration_action(state, rng), RockSample::kSample);
}

TEST(RockSample, ExplorationNeverChecksThrice) {
  RockSample env;
  std::mt19937_64 rng(18);
  for (int e = 0; e < 200; ++e) {
    const auto ep = run_exploration_episode(env, rng);
    std::vector<int> checks(5, 0);
    for (const auto& p : ep.trajectory) {
      if (p.action >= RockSample::kCheckFirst) ++checks[static_cast<std::size_t>(p.action - RockSample::kCheckFirst)];
    }
    for (int c : checks) EXPECT_LE(c, 2);
  }
}

TEST(RockSample, StateCount) {
  EXPECT_EQ(rocksample_state_count(5, 5), 801);
  EXPECT_EQ(rocksample_state_count(5, 7), 3201);
  EXPECT_EQ(rocksample_state_count(1, 1), 3);
  EXPECT_THROW(rocksample_state_count(0, 1), std::invalid_argument);
}

TEST(Contract, AllEnvironments) {
  check_contract(Tiger(), 19, 200);
  check_contract(Sysadmin(), 20, 100);
  check_contract(RockSample(), 21, 100);
  RockSampleConfig seven;
  seven.rocks = 7;
  check_contract(RockSample(seven), 22, 50);
}

TEST(Contract, SeededDeterminism) {
  RockSample env;
  std::mt19937_64 a(23), b(23);
  const auto ea = run_exploration_episode(env, a);
  const auto eb = run_exploration_episode(env, b);
  EXPECT_EQ(ea.trajectory, eb.trajectory);
  EXPECT_EQ(ea.undiscounted, eb.undiscounted);
}

TEST(Factory, Names) {
  EnvConfig cfg;
  for (const char* name : {"tiger", "posyadmin", "sysadmin", "rocksample", "rocksample-5-7", "rocksample-4-3"}) {
    cfg.name = name;
    EXPECT_NO_THROW(make_environment(cfg)) << name;
  }
  cfg.name = "rocksample-5-7";
  EXPECT_EQ(make_environment(cfg)->spec().alphabet.num_actions, 12);
  for (const char* name : {"chess", "rocksample-x", "rocksample-5"}) {
    cfg.name = name;
    EXPECT_THROW(make_environment(cfg), std::invalid_argument) << name;
  }
}
