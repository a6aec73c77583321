#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <vector>

#include "psr/core.hpp"
#include "psr/envs.hpp"

namespace psr {

/// Exact discrete POMDP used as a reference for learned predictions.
/// States are dense ids; observations are emitted from the post-transition state.
struct PomdpModel {
  Alphabet alphabet;
  int num_states = 0;
  std::vector<Eigen::MatrixXd> transition;   // per action: [s, s'] = Pr(s' | s, a)
  std::vector<Eigen::MatrixXd> observation;  // per action: [s', o] = Pr(o | s', a)
  Eigen::VectorXd initial;

  /// Throws std::invalid_argument unless every row is a distribution within 1e-12.
  void check() const;
};

/// Tiger with distinct absorbing end states for the two door outcomes, matching the
/// observation ids of psr::Tiger.
PomdpModel make_tiger_pomdp(const TigerConfig& config = {});

/// One action, two states that swap every step, observation = state, start in state 0.
PomdpModel make_alternating_chain();

/// One action, two states: stay with `p_stay`, observe the state correctly with `p_correct`.
PomdpModel make_noisy_chain(double p_stay, double p_correct);

/// Exact Pr(o_1..o_n || a_1..a_n).
double forward_prob(const PomdpModel& pomdp, std::span<const int> actions, std::span<const int> observations);
double forward_prob(const PomdpModel& pomdp, std::span<const AoPair> sequence);

/// Posterior over states after the sequence. A zero vector when the sequence has
/// probability zero.
Eigen::VectorXd belief_after(const PomdpModel& pomdp, std::span<const AoPair> sequence);

/// Pr(o | belief, a) over all observations.
Eigen::VectorXd next_obs_dist(const PomdpModel& pomdp, const Eigen::VectorXd& belief, int action);

/// Posterior after taking `action` and observing `observation`.
Eigen::VectorXd belief_update(const PomdpModel& pomdp, const Eigen::VectorXd& belief, int action,
                              int observation);

struct PolicyValue {
  double mean = 0.0;
  double standard_error = 0.0;
  int episodes = 0;
};

/// Monte-Carlo value of the uniform-random policy, episodes capped at `horizon`
/// steps and discounted by `gamma`.
PolicyValue random_policy_value(const Environment& env, int horizon, int n_episodes, double gamma,
                                std::mt19937_64& rng);

}  // namespace psr
