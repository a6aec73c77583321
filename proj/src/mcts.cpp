#include "psr/mcts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace psr {

Searcher::Searcher(const PsrModel& model, const EnvSpec& spec, SearchConfig config, std::mt19937_64& rng)
    : model_(model),
      spec_(spec),
      config_(config),
      rng_(rng),
      root_(std::make_unique<SearchNode>(spec.alphabet.num_actions)) {
  if (!(model.alphabet == spec.alphabet)) throw std::invalid_argument("model and environment alphabets differ");
  if (config_.n_sims < 1 || config_.max_depth < 1) throw std::invalid_argument("n_sims and max_depth must be positive");
  if (!(config_.gamma > 0.0 && config_.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(config_.ucb_c > 0.0)) throw std::invalid_argument("ucb_c must be positive");
}

int Searcher::pick_uniform(const std::vector<int>& candidates) {
  if (candidates.size() == 1) return candidates.front();
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng_)];
}

int Searcher::ucb_select(const SearchNode& node) {
  std::vector<int> best;
  for (int a = 0; a < node.num_actions(); ++a) {
    if (node.action_visits[static_cast<std::size_t>(a)] == 0) best.push_back(a);
  }
  if (!best.empty()) return pick_uniform(best);

  const double log_n = std::log(static_cast<double>(node.visits));
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < node.num_actions(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double score =
        node.action_values[i] + config_.ucb_c * std::sqrt(log_n / static_cast<double>(node.action_visits[i]));
    if (score > best_score) {
      best_score = score;
      best.assign(1, a);
    } else if (score == best_score) {
      best.push_back(a);
    }
  }
  return pick_uniform(best);
}

int Searcher::greedy_select(const SearchNode& node) {
  std::vector<int> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < node.num_actions(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (node.action_visits[i] == 0) continue;
    if (node.action_values[i] > best_value) {
      best_value = node.action_values[i];
      best.assign(1, a);
    } else if (node.action_values[i] == best_value) {
      best.push_back(a);
    }
  }
  if (best.empty()) {
    for (int a = 0; a < node.num_actions(); ++a) best.push_back(a);
  }
  return pick_uniform(best);
}

Searcher::Outcome Searcher::sample_step(const BeliefVector& belief, int action) {
  const int o = sample_observation(model_, belief, action, rng_);
  FilterResult f = filter_update(model_, belief, action, o);
  if (f.reset) ++filter_resets_;
  return {o, spec_.reward(action, o), spec_.is_terminal(o), std::move(f.belief)};
}

double Searcher::rollout(const BeliefVector& belief, int depth, bool terminal) {
  double ret = 0.0;
  double discount = 1.0;
  BeliefVector b = belief;
  std::uniform_int_distribution<int> pick(0, spec_.alphabet.num_actions - 1);
  while (depth < config_.max_depth && !terminal) {
    Outcome out = sample_step(b, pick(rng_));
    ret += discount * out.reward;
    discount *= config_.gamma;
    terminal = out.terminal;
    b = std::move(out.next);
    ++depth;
  }
  return ret;
}

double Searcher::simulate(SearchNode& node, const BeliefVector& belief, int depth, bool terminal) {
  if (depth >= config_.max_depth || terminal) return 0.0;

  const int a = ucb_select(node);
  Outcome out = sample_step(belief, a);
  const int pair = spec_.alphabet.pair_id(a, out.observation);

  double r = out.reward;
  if (auto it = node.children.find(pair); it != node.children.end()) {
    r += config_.gamma * simulate(*it->second, out.next, depth + 1, out.terminal);
  } else {
    node.children.emplace(pair, std::make_unique<SearchNode>(spec_.alphabet.num_actions));
    r += config_.gamma * rollout(out.next, depth + 1, out.terminal);
  }

  const auto i = static_cast<std::size_t>(a);
  node.visits += 1;
  node.action_visits[i] += 1;
  node.action_values[i] += (r - node.action_values[i]) / node.action_visits[i];
  if (observer_) observer_(node, a, r);
  return r;
}

int Searcher::search(const BeliefVector& belief) {
  const BeliefVector root_belief = belief;
  for (int i = 0; i < config_.n_sims; ++i) simulate(*root_, root_belief, 0, false);
  return greedy_select(*root_);
}

void Searcher::advance(int action, int observation) {
  const int pair = spec_.alphabet.pair_id(action, observation);
  auto it = root_->children.find(pair);
  std::unique_ptr<SearchNode> next;
  if (it != root_->children.end()) next = std::move(it->second);
  if (!next) next = std::make_unique<SearchNode>(spec_.alphabet.num_actions);
  root_ = std::move(next);
}

int act_search(const PsrModel& model, const EnvSpec& spec, const BeliefVector& belief, const SearchConfig& config) {
  std::mt19937_64 rng(config.seed);
  Searcher searcher(model, spec, config, rng);
  return searcher.search(belief);
}

}  // namespace psr
