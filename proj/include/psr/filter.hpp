#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>

#include "psr/spectral.hpp"

namespace psr {

/// PSR state. Not a probability vector.
using BeliefVector = Eigen::VectorXd;

inline constexpr double kDenominatorFloor = 1e-12;
inline constexpr double kProbabilityFloor = 1e-9;

struct FilterResult {
  BeliefVector belief;
  bool reset = false;
};

struct ObsDistribution {
  Eigen::VectorXd raw;        // b_inf^T B_ao b for each o
  Eigen::VectorXd sanitized;  // floored and renormalized, safe to sample from
  bool fallback = false;      // all raw values were non-positive; sanitized is uniform
};

const BeliefVector& initial_belief(const PsrModel& model);

/// b' = B_ao b / (b_inf^T B_ao b). Falls back to the initial belief when the
/// denominator magnitude is below kDenominatorFloor.
FilterResult filter_update(const PsrModel& model, const BeliefVector& b, int action, int observation);

ObsDistribution one_step_obs_dist(const PsrModel& model, const BeliefVector& b, int action);

/// b_inf^T B_{an on} ... B_{a1 o1} b_start, unclamped.
double sequence_prob(const PsrModel& model, std::span<const int> actions, std::span<const int> observations);
double sequence_prob(const PsrModel& model, std::span<const AoPair> sequence);

/// Index drawn from a probability vector that sums to one.
int sample_index(const Eigen::VectorXd& p, std::mt19937_64& rng);

int sample_observation(const PsrModel& model, const BeliefVector& b, int action, std::mt19937_64& rng);

}  // namespace psr
