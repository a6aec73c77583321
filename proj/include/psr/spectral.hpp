#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "psr/core.hpp"

namespace psr {

class NoSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raw (unnormalized) Hankel count estimates accumulated from trajectories.
struct HankelCounts {
  Eigen::VectorXd sum_h;               // over histories
  Eigen::MatrixXd sum_th;              // tests x histories
  std::vector<CellMap<double>> cnt_ao; // indexed by pair id, sparse tests x histories
  std::int64_t num_trajectories = 0;

  HankelCounts() = default;
  HankelCounts(std::size_t num_tests, std::size_t num_histories, int num_pairs);

  std::size_t num_tests() const { return static_cast<std::size_t>(sum_th.rows()); }
  std::size_t num_histories() const { return static_cast<std::size_t>(sum_th.cols()); }

  /// Grows to the given dictionary sizes, zero-padding new rows/columns.
  void resize(std::size_t num_tests, std::size_t num_histories);

  /// Scales every count by `factor`.
  void scale(double factor);

  HankelCounts& operator+=(const IndicatorCounts& ic);
};

/// Truncated thin SVD of the tests x histories count matrix.
struct SpectralFactors {
  Eigen::MatrixXd u;  // tests x k
  Eigen::VectorXd s;  // k, descending
  Eigen::MatrixXd v;  // histories x k

  int rank() const { return static_cast<int>(s.size()); }
};

/// Keep singular values with sigma_i > relative_tolerance * sigma_1. A positive
/// `fixed_rank` additionally caps the kept rank.
struct TruncationRule {
  double relative_tolerance = 1e-7;
  int fixed_rank = 0;
};

enum class StartMode { unique_start, arbitrary_start };

/// Learned PSR: initial state, normalizer and one update operator per (a, o).
struct PsrModel {
  Alphabet alphabet;
  StartMode start_mode = StartMode::unique_start;
  Eigen::VectorXd b1;
  Eigen::VectorXd b_inf;
  std::vector<Eigen::MatrixXd> b_ao;  // indexed by pair id
  SpectralFactors factors;            // empty for hand-built models

  int rank() const { return static_cast<int>(b1.size()); }
  const Eigen::MatrixXd& op(int action, int observation) const {
    return b_ao[static_cast<std::size_t>(alphabet.pair_id(action, observation))];
  }
  /// Row vector b_inf^T B_ao; one-step predictions are dot products with it.
  const Eigen::RowVectorXd& normalizer(int action, int observation) const {
    return normalizers_[static_cast<std::size_t>(alphabet.pair_id(action, observation))];
  }

  /// Recomputes derived quantities. Must be called after editing parameters.
  void finalize();
  /// Throws DimensionMismatch if shapes disagree or entries are not finite.
  void check() const;

 private:
  std::vector<Eigen::RowVectorXd> normalizers_;
};

/// Builds a model directly from parameters (used for analytic models in tests).
PsrModel make_model(const Alphabet& alphabet, Eigen::VectorXd b1, Eigen::VectorXd b_inf,
                    std::vector<Eigen::MatrixXd> b_ao, StartMode mode = StartMode::unique_start);

/// Adds the indicator counts of every trajectory. Counts must be sized to the dictionaries.
void accumulate(HankelCounts& counts, std::span<const AoSequence> trajectories, const Dictionaries& dicts);

SpectralFactors factorize(const HankelCounts& counts, const TruncationRule& rule = {});

PsrModel compute_params(const HankelCounts& counts, const SpectralFactors& factors, StartMode mode,
                        const Alphabet& alphabet);

enum class UpdateMode { recount, large_data };

struct UpdateOptions {
  UpdateMode mode = UpdateMode::recount;
  TruncationRule truncation;
  bool extend_dictionaries = true;
  /// Large-data mode only: a rank change larger than this requests a reset.
  int max_rank_change = 0;
};

enum class UpdateStatus { updated, reset_required };

struct UpdateResult {
  UpdateStatus status = UpdateStatus::updated;
  std::optional<PsrModel> model;  // empty when status == reset_required
  bool rank_changed = false;
};

/// Folds new trajectories into `counts` (extending the dictionaries first when
/// enabled), re-factorizes, and recomputes the parameters. Recount mode rebuilds
/// every B_ao from the accumulated Cnt_ao; large-data mode combines the new data
/// with the old operators projected into the new basis.
UpdateResult incremental_update(const PsrModel& model, HankelCounts& counts,
                                std::span<const AoSequence> new_trajectories, Dictionaries& dicts,
                                const UpdateOptions& options);

struct LearnerConfig {
  DictionaryLimits limits;
  UpdateOptions update;
  StartMode start_mode = StartMode::unique_start;
};

/// Owns dictionaries, counts and the current model snapshot for an online run.
class SpectralLearner {
 public:
  SpectralLearner(Alphabet alphabet, LearnerConfig config);

  /// Builds dictionaries, counts and the first model from a batch of trajectories.
  void initialize(std::span<const AoSequence> trajectories);
  /// Applies an incremental update; reports whether a model reset happened.
  bool update(std::span<const AoSequence> new_trajectories);

  bool ready() const { return model_ != nullptr; }
  std::shared_ptr<const PsrModel> model() const { return model_; }
  const HankelCounts& counts() const { return counts_; }
  const Dictionaries& dictionaries() const { return dicts_; }
  const LearnerConfig& config() const { return config_; }
  int resets() const { return resets_; }
  int rank_changes() const { return rank_changes_; }

 private:
  Alphabet alphabet_;
  LearnerConfig config_;
  Dictionaries dicts_;
  HankelCounts counts_;
  std::shared_ptr<const PsrModel> model_;
  int resets_ = 0;
  int rank_changes_ = 0;
};

}  // namespace psr
