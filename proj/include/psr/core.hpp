#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace psr {

/// Sizes of the action and observation alphabets. Symbols are dense ids.
struct Alphabet {
  int num_actions = 1;
  int num_observations = 1;

  int num_pairs() const { return num_actions * num_observations; }
  int pair_id(int action, int observation) const { return action * num_observations + observation; }
  bool contains(int action, int observation) const {
    return action >= 0 && action < num_actions && observation >= 0 && observation < num_observations;
  }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

struct AoPair {
  int action = 0;
  int observation = 0;

  friend bool operator==(const AoPair&, const AoPair&) = default;
  friend auto operator<=>(const AoPair&, const AoPair&) = default;
};

/// Histories, tests and trajectories are all sequences of action-observation pairs.
/// The empty sequence is the empty history.
using AoSequence = std::vector<AoPair>;

class InvalidTrajectory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidTrajectory if any symbol lies outside the alphabet.
void validate(std::span<const AoPair> sequence, const Alphabet& alphabet);

/// Index map from sequences to dense row/column ids, backed by a trie over pair ids.
///
/// Indices are assigned in insertion order and never change. A dictionary
/// created with `with_empty` reserves index 0 for the empty sequence.
class SeqDictionary {
 public:
  static constexpr std::size_t kDefaultCapacity = 5000;

  SeqDictionary() = default;
  SeqDictionary(Alphabet alphabet, std::size_t max_length, bool with_empty,
                std::size_t capacity = kDefaultCapacity);

  std::size_t size() const { return entries_.size(); }
  std::size_t max_length() const { return max_length_; }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return entries_.size() >= capacity_; }
  bool has_empty() const { return nodes_.front().entry >= 0; }
  const Alphabet& alphabet() const { return alphabet_; }

  std::optional<std::size_t> find(std::span<const AoPair> sequence) const;

  /// Returns the index of `sequence`, inserting it when absent. Returns nullopt
  /// when the sequence is too long or the dictionary is at capacity.
  std::optional<std::size_t> insert(std::span<const AoPair> sequence);

  const AoSequence& at(std::size_t index) const { return entries_.at(index); }
  const std::vector<AoSequence>& entries() const { return entries_; }

  // Trie cursor used by the scanners. Node 0 is the root (empty sequence).
  static constexpr int kRoot = 0;
  int child(int node, int pair_id) const;
  std::optional<std::size_t> entry(int node) const;

  friend bool operator==(const SeqDictionary& a, const SeqDictionary& b) {
    return a.alphabet_ == b.alphabet_ && a.max_length_ == b.max_length_ && a.entries_ == b.entries_;
  }

 private:
  struct Node {
    std::int64_t entry = -1;
    std::vector<std::pair<int, int>> children;  // (pair id, node)
  };

  int child_or_create(int node, int pair_id);

  Alphabet alphabet_;
  std::size_t max_length_ = 0;
  std::size_t capacity_ = kDefaultCapacity;
  std::vector<Node> nodes_{Node{}};
  std::vector<AoSequence> entries_;
};

struct DictionaryLimits {
  std::size_t max_history_length = 6;
  std::size_t max_test_length = 2;
  std::size_t max_histories = SeqDictionary::kDefaultCapacity;
  std::size_t max_tests = SeqDictionary::kDefaultCapacity;
  /// Adds the empty test to the test dictionary. Without it the row space cannot
  /// express the probability of a pair that ends the trajectory.
  bool empty_test = false;
};

struct Dictionaries {
  SeqDictionary histories;
  SeqDictionary tests;
};

/// Histories: the empty history and every prefix of length <= max_history_length.
/// Tests: every contiguous subsequence of length <= max_test_length that starts
/// right after a history in the dictionary. When candidates exceed capacity the
/// most frequent ones are kept; indices follow first appearance.
Dictionaries build_dictionaries(std::span<const AoSequence> trajectories, const Alphabet& alphabet,
                                const DictionaryLimits& limits);

/// Appends sequences from new trajectories (first-appearance order) while capacity
/// remains. Existing indices are untouched. Returns true if anything was added.
bool extend_dictionaries(Dictionaries& dicts, std::span<const AoSequence> trajectories);

/// (test, history) cell of a Hankel-shaped matrix.
struct Cell {
  std::int32_t test = 0;
  std::int32_t history = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

template <typename T>
using CellMap = std::map<Cell, T>;

/// Outcome of evaluating the three indicator functions on trajectories.
struct IndicatorCounts {
  std::vector<std::int64_t> h_counts;               // over histories
  CellMap<std::int64_t> th_counts;                  // over tests x histories
  std::vector<CellMap<std::int64_t>> ao_counts;     // indexed by pair id

  IndicatorCounts() = default;
  IndicatorCounts(std::size_t num_histories, int num_pairs)
      : h_counts(num_histories, 0), ao_counts(static_cast<std::size_t>(num_pairs)) {}

  std::int64_t th(std::size_t test, std::size_t history) const;
  std::int64_t ao(int pair_id, std::size_t test, std::size_t history) const;

  IndicatorCounts& operator+=(const IndicatorCounts& other);
};

/// Calls the visitors once per indicator hit in `z`:
///   on_history(h)            h is a prefix of z
///   on_test(t, h)            z = h . t . rest
///   on_ao_test(pair, t, h)   z = h . ao . t . rest
/// Visitor order is deterministic (by split position, then length).
template <typename OnHistory, typename OnTest, typename OnAoTest>
void for_each_indicator(std::span<const AoPair> z, const SeqDictionary& histories, const SeqDictionary& tests,
                        OnHistory&& on_history, OnTest&& on_test, OnAoTest&& on_ao_test) {
  const Alphabet& ab = histories.alphabet();
  const std::size_t n = z.size();
  const std::size_t max_t = tests.max_length();
  int h_node = SeqDictionary::kRoot;
  for (std::size_t i = 0; i <= n && h_node >= 0; ++i) {
    if (i > 0) {
      h_node = histories.child(h_node, ab.pair_id(z[i - 1].action, z[i - 1].observation));
      if (h_node < 0) break;
    }
    const auto h = histories.entry(h_node);
    if (!h) continue;
    on_history(*h);
    // tests starting right after h
    int t_node = SeqDictionary::kRoot;
    if (const auto t = tests.entry(t_node)) on_test(*t, *h);
    for (std::size_t l = 1; l <= max_t && i + l <= n; ++l) {
      const AoPair& p = z[i + l - 1];
      t_node = tests.child(t_node, ab.pair_id(p.action, p.observation));
      if (t_node < 0) break;
      if (const auto t = tests.entry(t_node)) on_test(*t, *h);
    }
    // h . ao . t
    if (i < n) {
      const int pair = ab.pair_id(z[i].action, z[i].observation);
      t_node = SeqDictionary::kRoot;
      if (const auto t = tests.entry(t_node)) on_ao_test(pair, *t, *h);
      for (std::size_t l = 1; l <= max_t && i + 1 + l <= n; ++l) {
        const AoPair& p = z[i + l];
        t_node = tests.child(t_node, ab.pair_id(p.action, p.observation));
        if (t_node < 0) break;
        if (const auto t = tests.entry(t_node)) on_ao_test(pair, *t, *h);
      }
    }
  }
}

/// Indicator counts of a single non-empty trajectory.
IndicatorCounts scan_trajectory(std::span<const AoPair> z, const SeqDictionary& histories,
                                const SeqDictionary& tests);

}  // namespace psr
