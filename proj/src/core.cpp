#include "psr/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace psr {

void validate(std::span<const AoPair> sequence, const Alphabet& alphabet) {
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const AoPair& p = sequence[i];
    if (!alphabet.contains(p.action, p.observation)) {
      throw InvalidTrajectory("pair " + std::to_string(i) + " = (" + std::to_string(p.action) + "," +
                              std::to_string(p.observation) + ") outside alphabet " +
                              std::to_string(alphabet.num_actions) + "x" +
                              std::to_string(alphabet.num_observations));
    }
  }
}

SeqDictionary::SeqDictionary(Alphabet alphabet, std::size_t max_length, bool with_empty,
                             std::size_t capacity)
    : alphabet_(alphabet), max_length_(max_length), capacity_(capacity) {
  if (alphabet.num_actions < 1 || alphabet.num_observations < 1) {
    throw std::invalid_argument("alphabet sizes must be positive");
  }
  if (with_empty && capacity_ > 0) {
    nodes_[kRoot].entry = 0;
    entries_.emplace_back();
  }
}

int SeqDictionary::child(int node, int pair_id) const {
  for (const auto& [id, next] : nodes_[static_cast<std::size_t>(node)].children) {
    if (id == pair_id) return next;
  }
  return -1;
}

std::optional<std::size_t> SeqDictionary::entry(int node) const {
  const auto e = nodes_[static_cast<std::size_t>(node)].entry;
  if (e < 0) return std::nullopt;
  return static_cast<std::size_t>(e);
}

int SeqDictionary::child_or_create(int node, int pair_id) {
  if (const int c = child(node, pair_id); c >= 0) return c;
  const int created = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_[static_cast<std::size_t>(node)].children.emplace_back(pair_id, created);
  return created;
}

std::optional<std::size_t> SeqDictionary::find(std::span<const AoPair> sequence) const {
  int node = kRoot;
  for (const AoPair& p : sequence) {
    if (!alphabet_.contains(p.action, p.observation)) return std::nullopt;
    node = child(node, alphabet_.pair_id(p.action, p.observation));
    if (node < 0) return std::nullopt;
  }
  return entry(node);
}

std::optional<std::size_t> SeqDictionary::insert(std::span<const AoPair> sequence) {
  if (sequence.size() > max_length_) return std::nullopt;
  validate(sequence, alphabet_);
  if (auto existing = find(sequence)) return existing;
  if (full()) return std::nullopt;
  int node = kRoot;
  for (const AoPair& p : sequence) node = child_or_create(node, alphabet_.pair_id(p.action, p.observation));
  const std::size_t index = entries_.size();
  nodes_[static_cast<std::size_t>(node)].entry = static_cast<std::int64_t>(index);
  entries_.emplace_back(sequence.begin(), sequence.end());
  return index;
}

namespace {

// First-seen ordered candidate set with occurrence counts.
struct Candidates {
  SeqDictionary order;
  std::vector<std::int64_t> frequency;

  Candidates(const Alphabet& ab, std::size_t max_length)
      : order(ab, max_length, false, std::numeric_limits<std::size_t>::max()) {}

  void add(std::span<const AoPair> seq) {
    const auto idx = order.insert(seq);
    if (*idx >= frequency.size()) frequency.push_back(0);
    ++frequency[*idx];
  }

  // Inserts the `budget` most frequent candidates, in first-seen order.
  void commit(SeqDictionary& target, std::size_t budget) const {
    std::vector<std::size_t> keep(frequency.size());
    std::iota(keep.begin(), keep.end(), 0);
    if (keep.size() > budget) {
      std::stable_sort(keep.begin(), keep.end(),
                       [&](std::size_t a, std::size_t b) { return frequency[a] > frequency[b]; });
      keep.resize(budget);
      std::sort(keep.begin(), keep.end());
    }
    for (std::size_t idx : keep) target.insert(order.at(idx));
  }
};

void collect_histories(std::span<const AoSequence> trajectories, std::size_t max_h, Candidates& out) {
  for (const auto& z : trajectories) {
    const std::size_t n = std::min(max_h, z.size());
    for (std::size_t len = 1; len <= n; ++len) out.add(std::span(z).first(len));
  }
}

void collect_tests(std::span<const AoSequence> trajectories, const SeqDictionary& histories,
                   std::size_t max_t, Candidates& out) {
  for (const auto& z : trajectories) {
    const std::span<const AoPair> zs(z);
    const std::size_t last = std::min(histories.max_length(), z.size());
    for (std::size_t i = 0; i <= last; ++i) {
      if (!histories.find(zs.first(i))) continue;
      for (std::size_t len = 1; len <= max_t && i + len <= z.size(); ++len) out.add(zs.subspan(i, len));
    }
  }
}

}  // namespace

Dictionaries build_dictionaries(std::span<const AoSequence> trajectories, const Alphabet& alphabet,
                                const DictionaryLimits& limits) {
  if (limits.max_test_length < 1) throw std::invalid_argument("max test length must be >= 1");
  if (limits.max_histories < 1) throw std::invalid_argument("history capacity must be >= 1");
  for (const auto& z : trajectories) validate(z, alphabet);

  Dictionaries d{SeqDictionary(alphabet, limits.max_history_length, true, limits.max_histories),
                 SeqDictionary(alphabet, limits.max_test_length, limits.empty_test, limits.max_tests)};

  Candidates hist(alphabet, limits.max_history_length);
  collect_histories(trajectories, limits.max_history_length, hist);
  hist.commit(d.histories, limits.max_histories - 1);

  Candidates tests(alphabet, limits.max_test_length);
  collect_tests(trajectories, d.histories, limits.max_test_length, tests);
  tests.commit(d.tests, limits.max_tests - (limits.empty_test ? 1 : 0));
  return d;
}

bool extend_dictionaries(Dictionaries& dicts, std::span<const AoSequence> trajectories) {
  const std::size_t before = dicts.histories.size() + dicts.tests.size();
  for (const auto& z : trajectories) {
    validate(z, dicts.histories.alphabet());
    const std::size_t n = std::min(dicts.histories.max_length(), z.size());
    for (std::size_t len = 1; len <= n && !dicts.histories.full(); ++len) {
      dicts.histories.insert(std::span(z).first(len));
    }
  }
  for (const auto& z : trajectories) {
    const std::span<const AoPair> zs(z);
    const std::size_t last = std::min(dicts.histories.max_length(), z.size());
    for (std::size_t i = 0; i <= last && !dicts.tests.full(); ++i) {
      if (!dicts.histories.find(zs.first(i))) continue;
      for (std::size_t len = 1; len <= dicts.tests.max_length() && i + len <= z.size(); ++len) {
        dicts.tests.insert(zs.subspan(i, len));
      }
    }
  }
  return dicts.histories.size() + dicts.tests.size() != before;
}

std::int64_t IndicatorCounts::th(std::size_t test, std::size_t history) const {
  const auto it = th_counts.find(Cell{static_cast<std::int32_t>(test), static_cast<std::int32_t>(history)});
  return it == th_counts.end() ? 0 : it->second;
}

std::int64_t IndicatorCounts::ao(int pair_id, std::size_t test, std::size_t history) const {
  const auto& m = ao_counts.at(static_cast<std::size_t>(pair_id));
  const auto it = m.find(Cell{static_cast<std::int32_t>(test), static_cast<std::int32_t>(history)});
  return it == m.end() ? 0 : it->second;
}

IndicatorCounts& IndicatorCounts::operator+=(const IndicatorCounts& other) {
  if (other.h_counts.size() > h_counts.size()) h_counts.resize(other.h_counts.size(), 0);
  for (std::size_t i = 0; i < other.h_counts.size(); ++i) h_counts[i] += other.h_counts[i];
  for (const auto& [cell, c] : other.th_counts) th_counts[cell] += c;
  if (other.ao_counts.size() > ao_counts.size()) ao_counts.resize(other.ao_counts.size());
  for (std::size_t p = 0; p < other.ao_counts.size(); ++p) {
    for (const auto& [cell, c] : other.ao_counts[p]) ao_counts[p][cell] += c;
  }
  return *this;
}

IndicatorCounts scan_trajectory(std::span<const AoPair> z, const SeqDictionary& histories,
                                const SeqDictionary& tests) {
  validate(z, histories.alphabet());
  IndicatorCounts out(histories.size(), histories.alphabet().num_pairs());
  auto cell = [](std::size_t t, std::size_t h) {
    return Cell{static_cast<std::int32_t>(t), static_cast<std::int32_t>(h)};
  };
  for_each_indicator(
      z, histories, tests, [&](std::size_t h) { ++out.h_counts[h]; },
      [&](std::size_t t, std::size_t h) { ++out.th_counts[cell(t, h)]; },
      [&](int pair, std::size_t t, std::size_t h) {
        ++out.ao_counts[static_cast<std::size_t>(pair)][cell(t, h)];
      });
  return out;
}

}  // namespace psr
