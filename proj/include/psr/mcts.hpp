#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "psr/envs.hpp"
#include "psr/filter.hpp"
#include "psr/spectral.hpp"

namespace psr {

/// Tree node for one history (relative to the search root).
struct SearchNode {
  int visits = 0;
  std::vector<int> action_visits;
  std::vector<double> action_values;
  std::unordered_map<int, std::unique_ptr<SearchNode>> children;  // keyed by pair id

  explicit SearchNode(int num_actions)
      : action_visits(static_cast<std::size_t>(num_actions), 0),
        action_values(static_cast<std::size_t>(num_actions), 0.0) {}

  int num_actions() const { return static_cast<int>(action_visits.size()); }
  const SearchNode* child(int pair_id) const {
    const auto it = children.find(pair_id);
    return it == children.end() ? nullptr : it->second.get();
  }
};

struct SearchConfig {
  int n_sims = 1000;
  int max_depth = 10;
  double gamma = 0.95;
  double ucb_c = 110.0;
  std::uint64_t seed = 0;  // used by the free act_search()
};

/// UCT search over a learned PSR. Observations are sampled from the model,
/// rewards and terminal observations come from the environment spec.
class Searcher {
 public:
  using BackupObserver = std::function<void(const SearchNode& node, int action, double ret)>;

  Searcher(const PsrModel& model, const EnvSpec& spec, SearchConfig config, std::mt19937_64& rng);

  /// Runs n_sims simulations from `belief` at the current root and returns the
  /// greedy action (ties broken uniformly at random).
  int search(const BeliefVector& belief);

  /// Re-roots the tree at the child reached by the executed pair, keeping its statistics.
  void advance(int action, int observation);

  int ucb_select(const SearchNode& node);
  int greedy_select(const SearchNode& node);
  double simulate(SearchNode& node, const BeliefVector& belief, int depth, bool terminal);
  double rollout(const BeliefVector& belief, int depth, bool terminal);

  const SearchNode& root() const { return *root_; }
  SearchNode& root() { return *root_; }
  const SearchConfig& config() const { return config_; }
  std::int64_t filter_resets() const { return filter_resets_; }
  void set_backup_observer(BackupObserver observer) { observer_ = std::move(observer); }

 private:
  struct Outcome {
    int observation;
    double reward;
    bool terminal;
    BeliefVector next;
  };
  Outcome sample_step(const BeliefVector& belief, int action);
  int pick_uniform(const std::vector<int>& candidates);

  const PsrModel& model_;
  const EnvSpec& spec_;
  SearchConfig config_;
  std::mt19937_64& rng_;
  std::unique_ptr<SearchNode> root_;
  std::int64_t filter_resets_ = 0;
  BackupObserver observer_;
};

/// One-shot search with a fresh tree seeded from config.seed.
int act_search(const PsrModel& model, const EnvSpec& spec, const BeliefVector& belief, const SearchConfig& config);

}  // namespace psr
