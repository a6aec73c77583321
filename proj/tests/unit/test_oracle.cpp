#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psr/oracle.hpp"

using namespace psr;

namespace {

// Every observation sequence of length n for a fixed action sequence.
template <typename F>
void for_each_obs_sequence(const std::vector<int>& actions, int n_obs, F&& f) {
  std::vector<int> obs(actions.size(), 0);
  while (true) {
    f(obs);
    std::size_t i = 0;
    while (i < obs.size() && ++obs[i] == n_obs) obs[i++] = 0;
    if (i == obs.size()) break;
  }
}

// +1 per step forever, one action and one observation.
class Treadmill final : public Environment {
 public:
  Treadmill() {
    spec_.name = "treadmill";
    spec_.alphabet = {1, 1};
    spec_.action_names = {"go"};
    spec_.observation_names = {"step"};
    spec_.terminal_obs = {false};
    spec_.reward_of_obs = {std::nullopt};
    spec_.reward_of_ao = Eigen::MatrixXd::Ones(1, 1);
    spec_.max_steps = 1000;
  }
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::mt19937_64&) const override { return GenericState{}; }
  StepResult step(EnvState&, int, std::mt19937_64&) const override { return {0, 1.0, false}; }

 private:
  EnvSpec spec_;
};

// Two actions, both terminal: action 1 pays 10.
class TerminalBandit final : public Environment {
 public:
  TerminalBandit() {
    spec_.name = "bandit";
    spec_.alphabet = {2, 2};
    spec_.action_names = {"a0", "a1"};
    spec_.observation_names = {"zero", "ten"};
    spec_.terminal_obs = {true, true};
    spec_.reward_of_obs = {0.0, 10.0};
    spec_.reward_of_ao = Eigen::MatrixXd::Zero(2, 2);
  }
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::mt19937_64&) const override { return GenericState{}; }
  StepResult step(EnvState&, int a, std::mt19937_64&) const override {
    return {a, a == 1 ? 10.0 : 0.0, true};
  }

 private:
  EnvSpec spec_;
};

}  // namespace

TEST(Pomdp, BuiltInModelsAreValid) {
  EXPECT_NO_THROW(make_tiger_pomdp().check());
  EXPECT_NO_THROW(make_alternating_chain().check());
  EXPECT_NO_THROW(make_noisy_chain(0.6, 0.8).check());
  auto bad = make_noisy_chain(0.6, 0.8);
  bad.transition[0](0, 0) = 0.7;
  EXPECT_THROW(bad.check(), std::invalid_argument);
}

TEST(ForwardProb, TigerListenIsSymmetric) {
  const auto tiger = make_tiger_pomdp();
  const std::vector<int> a{Tiger::kListen}, o{Tiger::kGrowlLeft};
  EXPECT_NEAR(forward_prob(tiger, a, o), 0.5, 1e-15);
}

TEST(ForwardProb, EmptyProduct) {
  EXPECT_EQ(forward_prob(make_tiger_pomdp(), std::span<const AoPair>{}), 1.0);
}

TEST(ForwardProb, DeterministicChain) {
  const auto chain = make_alternating_chain();
  const AoSequence s{{0, 0}, {0, 1}, {0, 0}, {0, 1}};
  EXPECT_NEAR(forward_prob(chain, s), 1.0, 1e-15);
  const AoSequence wrong{{0, 0}, {0, 0}};
  EXPECT_EQ(forward_prob(chain, wrong), 0.0);
}

TEST(ForwardProb, LengthMismatch) {
  const std::vector<int> a{0, 0}, o{0};
  EXPECT_THROW(forward_prob(make_tiger_pomdp(), a, o), std::invalid_argument);
}

TEST(ForwardProb, SumsToOne) {
  const auto tiger = make_tiger_pomdp();
  const std::vector<std::vector<int>> plans{{0}, {0, 0}, {0, 1, 0}, {0, 0, 2, 0}, {1, 2, 0, 0}};
  for (const auto& actions : plans) {
    double total = 0.0;
    for_each_obs_sequence(actions, 4, [&](const std::vector<int>& obs) { total += forward_prob(tiger, actions, obs); });
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(NextObsDist, UniformTigerListen) {
  const auto tiger = make_tiger_pomdp();
  const auto d = next_obs_dist(tiger, tiger.initial, Tiger::kListen);
  EXPECT_NEAR(d(Tiger::kGrowlLeft), 0.5, 1e-15);
  EXPECT_NEAR(d(Tiger::kGrowlRight), 0.5, 1e-15);
  EXPECT_NEAR(d.sum(), 1.0, 1e-12);
}

TEST(NextObsDist, PointMassDeterministic) {
  const auto chain = make_alternating_chain();
  const auto d = next_obs_dist(chain, Eigen::Vector2d(1, 0), 0);
  EXPECT_EQ(d, Eigen::Vector2d(0, 1));
}

TEST(NextObsDist, MatchesLengthOneForwardProb) {
  const auto tiger = make_tiger_pomdp();
  for (int a = 0; a < 3; ++a) {
    const auto d = next_obs_dist(tiger, tiger.initial, a);
    for (int o = 0; o < 4; ++o) {
      const std::vector<int> as{a}, os{o};
      EXPECT_NEAR(d(o), forward_prob(tiger, as, os), 1e-15);
    }
  }
}

TEST(BeliefUpdate, ChainRule) {
  const auto tiger = make_tiger_pomdp();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> growl(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    AoSequence s;
    Eigen::VectorXd b = tiger.initial;
    double product = 1.0;
    for (int t = 0; t < 4; ++t) {
      const AoPair p{Tiger::kListen, growl(rng)};
      product *= next_obs_dist(tiger, b, p.action)(p.observation);
      b = belief_update(tiger, b, p.action, p.observation);
      s.push_back(p);
    }
    EXPECT_NEAR(forward_prob(tiger, s), product, 1e-12);
    EXPECT_LE((belief_after(tiger, s) - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BeliefAfter, ImpossibleHistoryIsZero) {
  const auto chain = make_alternating_chain();
  const AoSequence s{{0, 1}};
  EXPECT_TRUE(belief_after(chain, s).isZero(0.0));
}

TEST(RandomPolicyValue, DeterministicRewardStream) {
  Treadmill env;
  std::mt19937_64 rng(2);
  const auto v = random_policy_value(env, 3, 10, 1.0, rng);
  EXPECT_EQ(v.mean, 3.0);
  EXPECT_EQ(v.episodes, 10);
  EXPECT_EQ(v.standard_error, 0.0);
}

TEST(RandomPolicyValue, TerminalBandit) {
  TerminalBandit env;
  std::mt19937_64 rng(3);
  const auto v = random_policy_value(env, 5, 10000, 0.95, rng);
  EXPECT_LE(std::abs(v.mean - 5.0), 3 * v.standard_error);
  EXPECT_NEAR(v.standard_error, 5.0 / 100.0, 0.01);
}

TEST(RandomPolicyValue, Reproducible) {
  Tiger tiger;
  std::mt19937_64 a(4), b(4);
  EXPECT_EQ(random_policy_value(tiger, 20, 100, 0.95, a).mean, random_policy_value(tiger, 20, 100, 0.95, b).mean);
}
