#include "psr/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace psr {

const BeliefVector& initial_belief(const PsrModel& model) { return model.b1; }

FilterResult filter_update(const PsrModel& model, const BeliefVector& b, int action, int observation) {
  if (!model.alphabet.contains(action, observation)) throw std::out_of_range("filter_update: symbol outside alphabet");
  BeliefVector next = model.op(action, observation) * b;
  const double denom = model.b_inf.dot(next);
  if (!(std::abs(denom) >= kDenominatorFloor) || !std::isfinite(denom)) {
    return {initial_belief(model), true};
  }
  next /= denom;
  return {std::move(next), false};
}

ObsDistribution one_step_obs_dist(const PsrModel& model, const BeliefVector& b, int action) {
  if (action < 0 || action >= model.alphabet.num_actions) throw std::out_of_range("one_step_obs_dist: bad action");
  const int n = model.alphabet.num_observations;
  ObsDistribution d{Eigen::VectorXd(n), Eigen::VectorXd(n), false};
  bool any_positive = false;
  for (int o = 0; o < n; ++o) {
    const double r = model.normalizer(action, o).dot(b);
    d.raw(o) = r;
    any_positive = any_positive || (std::isfinite(r) && r > 0.0);
    d.sanitized(o) = std::isfinite(r) ? std::max(r, kProbabilityFloor) : kProbabilityFloor;
  }
  if (!any_positive) {
    d.sanitized.setConstant(1.0 / n);
    d.fallback = true;
    return d;
  }
  d.sanitized /= d.sanitized.sum();
  return d;
}

double sequence_prob(const PsrModel& model, std::span<const int> actions, std::span<const int> observations) {
  if (actions.size() != observations.size()) throw std::invalid_argument("sequence_prob: length mismatch");
  Eigen::VectorXd b = initial_belief(model);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!model.alphabet.contains(actions[i], observations[i])) throw std::out_of_range("sequence_prob: bad symbol");
    b = model.op(actions[i], observations[i]) * b;
  }
  return model.b_inf.dot(b);
}

double sequence_prob(const PsrModel& model, std::span<const AoPair> sequence) {
  Eigen::VectorXd b = initial_belief(model);
  for (const AoPair& p : sequence) {
    if (!model.alphabet.contains(p.action, p.observation)) throw std::out_of_range("sequence_prob: bad symbol");
    b = model.op(p.action, p.observation) * b;
  }
  return model.b_inf.dot(b);
}

int sample_index(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left a sliver above the cumulative sum; take the last non-zero entry.
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) {
    if (p(i) > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

int sample_observation(const PsrModel& model, const BeliefVector& b, int action, std::mt19937_64& rng) {
  return sample_index(one_step_obs_dist(model, b, action).sanitized, rng);
}

}  // namespace psr
