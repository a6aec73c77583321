#include "psr/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace psr {

namespace {

void check_rows(const Eigen::MatrixXd& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if ((m.row(r).array() < 0.0).any() || std::abs(m.row(r).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument(what + " row " + std::to_string(r) + " is not a distribution");
    }
  }
}

}  // namespace

void PomdpModel::check() const {
  const auto na = static_cast<std::size_t>(alphabet.num_actions);
  if (transition.size() != na || observation.size() != na) throw std::invalid_argument("one table per action");
  for (std::size_t a = 0; a < na; ++a) {
    if (transition[a].rows() != num_states || transition[a].cols() != num_states ||
        observation[a].rows() != num_states || observation[a].cols() != alphabet.num_observations) {
      throw std::invalid_argument("pomdp table shape mismatch");
    }
    check_rows(transition[a], "transition");
    check_rows(observation[a], "observation");
  }
  if (initial.size() != num_states) throw std::invalid_argument("initial distribution size mismatch");
  check_rows(initial.transpose(), "initial");
}

PomdpModel make_tiger_pomdp(const TigerConfig& config) {
  // states: 0 tiger-left, 1 tiger-right, 2 ended well, 3 ended badly
  PomdpModel m;
  m.alphabet = {3, 4};
  m.num_states = 4;
  const double acc = config.listen_accuracy;
  Eigen::MatrixXd listen_t = Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd listen_o = Eigen::MatrixXd::Zero(4, 4);
  listen_o.row(0) << acc, 1.0 - acc, 0.0, 0.0;
  listen_o.row(1) << 1.0 - acc, acc, 0.0, 0.0;
  listen_o.row(2) << 0.5, 0.5, 0.0, 0.0;
  listen_o.row(3) << 0.5, 0.5, 0.0, 0.0;

  Eigen::MatrixXd open_o = Eigen::MatrixXd::Zero(4, 4);
  open_o.row(0) << 0.0, 0.0, 0.0, 1.0;  // unreachable after an open; kept stochastic
  open_o.row(1) << 0.0, 0.0, 0.0, 1.0;
  open_o(2, Tiger::kRewardCorrect) = 1.0;
  open_o(3, Tiger::kRewardWrong) = 1.0;

  Eigen::MatrixXd open_left = Eigen::MatrixXd::Zero(4, 4);
  open_left(0, 3) = 1.0;
  open_left(1, 2) = 1.0;
  open_left(2, 2) = 1.0;
  open_left(3, 3) = 1.0;
  Eigen::MatrixXd open_right = Eigen::MatrixXd::Zero(4, 4);
  open_right(0, 2) = 1.0;
  open_right(1, 3) = 1.0;
  open_right(2, 2) = 1.0;
  open_right(3, 3) = 1.0;

  m.transition = {listen_t, open_left, open_right};
  m.observation = {listen_o, open_o, open_o};
  m.initial = Eigen::Vector4d(0.5, 0.5, 0.0, 0.0);
  m.check();
  return m;
}

PomdpModel make_alternating_chain() {
  PomdpModel m;
  m.alphabet = {1, 2};
  m.num_states = 2;
  Eigen::MatrixXd t(2, 2);
  t << 0.0, 1.0, 1.0, 0.0;
  m.transition = {t};
  m.observation = {Eigen::MatrixXd::Identity(2, 2)};
  // Emission comes from the post-transition state, so start in 1 to emit 0 first.
  m.initial = Eigen::Vector2d(0.0, 1.0);
  m.check();
  return m;
}

PomdpModel make_noisy_chain(double p_stay, double p_correct) {
  PomdpModel m;
  m.alphabet = {1, 2};
  m.num_states = 2;
  Eigen::MatrixXd t(2, 2);
  t << p_stay, 1.0 - p_stay, 1.0 - p_stay, p_stay;
  Eigen::MatrixXd o(2, 2);
  o << p_correct, 1.0 - p_correct, 1.0 - p_correct, p_correct;
  m.transition = {t};
  m.observation = {o};
  m.initial = Eigen::Vector2d(1.0, 0.0);
  m.check();
  return m;
}

double forward_prob(const PomdpModel& pomdp, std::span<const int> actions, std::span<const int> observations) {
  if (actions.size() != observations.size()) throw std::invalid_argument("forward_prob: length mismatch");
  Eigen::RowVectorXd alpha = pomdp.initial.transpose();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto a = static_cast<std::size_t>(actions[i]);
    alpha = (alpha * pomdp.transition.at(a)).cwiseProduct(pomdp.observation.at(a).col(observations[i]).transpose());
  }
  return alpha.sum();
}

double forward_prob(const PomdpModel& pomdp, std::span<const AoPair> sequence) {
  std::vector<int> a, o;
  for (const AoPair& p : sequence) {
    a.push_back(p.action);
    o.push_back(p.observation);
  }
  return forward_prob(pomdp, a, o);
}

Eigen::VectorXd belief_update(const PomdpModel& pomdp, const Eigen::VectorXd& belief, int action,
                              int observation) {
  const auto a = static_cast<std::size_t>(action);
  Eigen::VectorXd next =
      (pomdp.transition.at(a).transpose() * belief).cwiseProduct(pomdp.observation.at(a).col(observation));
  const double z = next.sum();
  if (z <= 0.0) return Eigen::VectorXd::Zero(pomdp.num_states);
  return next / z;
}

Eigen::VectorXd belief_after(const PomdpModel& pomdp, std::span<const AoPair> sequence) {
  Eigen::VectorXd b = pomdp.initial;
  for (const AoPair& p : sequence) {
    b = belief_update(pomdp, b, p.action, p.observation);
    if (b.sum() == 0.0) break;
  }
  return b;
}

Eigen::VectorXd next_obs_dist(const PomdpModel& pomdp, const Eigen::VectorXd& belief, int action) {
  const auto a = static_cast<std::size_t>(action);
  return pomdp.observation.at(a).transpose() * (pomdp.transition.at(a).transpose() * belief);
}

PolicyValue random_policy_value(const Environment& env, int horizon, int n_episodes, double gamma,
                                std::mt19937_64& rng) {
  if (n_episodes < 1) throw std::invalid_argument("random_policy_value needs at least one episode");
  const int na = env.spec().alphabet.num_actions;
  std::uniform_int_distribution<int> pick(0, na - 1);
  double sum = 0.0, sum_sq = 0.0;
  for (int e = 0; e < n_episodes; ++e) {
    EnvState s = env.reset(rng);
    double ret = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      const StepResult r = env.step(s, pick(rng), rng);
      ret += discount * r.reward;
      discount *= gamma;
      if (r.terminal) break;
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  PolicyValue v;
  v.episodes = n_episodes;
  v.mean = sum / n_episodes;
  const double var = n_episodes > 1 ? std::max(0.0, (sum_sq - n_episodes * v.mean * v.mean) / (n_episodes - 1)) : 0.0;
  v.standard_error = std::sqrt(var / n_episodes);
  return v;
}

}  // namespace psr
