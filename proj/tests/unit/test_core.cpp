#include <gtest/gtest.h>

#include <random>
#include <set>

#include "psr/core.hpp"

using namespace psr;

namespace {

const Alphabet kBinary{2, 2};

AoSequence seq(std::initializer_list<AoPair> pairs) { return AoSequence(pairs); }

std::vector<AoSequence> all_sequences(const Alphabet& ab, std::size_t length) {
  std::vector<AoSequence> out{{}};
  for (std::size_t l = 0; l < length; ++l) {
    std::vector<AoSequence> next;
    for (const auto& s : out) {
      for (int a = 0; a < ab.num_actions; ++a) {
        for (int o = 0; o < ab.num_observations; ++o) {
          auto t = s;
          t.push_back({a, o});
          next.push_back(std::move(t));
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<AoSequence> random_trajectories(std::mt19937_64& rng, int n, int max_len) {
  std::uniform_int_distribution<int> sym(0, 1), len(1, max_len);
  std::vector<AoSequence> out;
  for (int i = 0; i < n; ++i) {
    AoSequence z;
    for (int l = len(rng); l > 0; --l) z.push_back({sym(rng), sym(rng)});
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace

TEST(Alphabet, PairIdsAreDense) {
  const Alphabet ab{3, 4};
  std::set<int> ids;
  for (int a = 0; a < 3; ++a)
    for (int o = 0; o < 4; ++o) ids.insert(ab.pair_id(a, o));
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_EQ(*ids.begin(), 0);
  EXPECT_EQ(*ids.rbegin(), 11);
}

TEST(Validate, RejectsOutOfRangeSymbols) {
  EXPECT_NO_THROW(validate(seq({{1, 1}}), kBinary));
  EXPECT_THROW(validate(seq({{2, 0}}), kBinary), InvalidTrajectory);
  EXPECT_THROW(validate(seq({{0, -1}}), kBinary), InvalidTrajectory);
}

TEST(SeqDictionary, EmptyHistoryIsIndexZero) {
  SeqDictionary d(kBinary, 3, true);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d.at(0).empty());
  EXPECT_EQ(d.find(AoSequence{}), 0u);
  EXPECT_TRUE(d.has_empty());
}

TEST(SeqDictionary, InsertionOrderIsStable) {
  SeqDictionary d(kBinary, 2, false);
  EXPECT_EQ(d.insert(seq({{1, 0}})), 0u);
  EXPECT_EQ(d.insert(seq({{0, 0}, {1, 1}})), 1u);
  EXPECT_EQ(d.insert(seq({{1, 0}})), 0u);
  EXPECT_EQ(d.find(seq({{0, 0}, {1, 1}})), 1u);
  EXPECT_FALSE(d.find(seq({{0, 0}})).has_value());  // trie node without an entry
}

TEST(SeqDictionary, RejectsTooLongAndFull) {
  SeqDictionary d(kBinary, 1, false, 2);
  EXPECT_FALSE(d.insert(seq({{0, 0}, {0, 0}})).has_value());
  EXPECT_TRUE(d.insert(seq({{0, 0}})));
  EXPECT_TRUE(d.insert(seq({{0, 1}})));
  EXPECT_TRUE(d.full());
  EXPECT_FALSE(d.insert(seq({{1, 1}})).has_value());
  EXPECT_EQ(d.insert(seq({{0, 1}})), 1u);  // existing entries still resolve
}

TEST(BuildDictionaries, SingleTrajectory) {
  const std::vector<AoSequence> z{seq({{0, 0}})};
  const auto d = build_dictionaries(z, kBinary, {1, 1});
  ASSERT_EQ(d.histories.size(), 2u);
  EXPECT_TRUE(d.histories.at(0).empty());
  EXPECT_EQ(d.histories.at(1), seq({{0, 0}}));
  ASSERT_EQ(d.tests.size(), 1u);
  EXPECT_EQ(d.tests.at(0), seq({{0, 0}}));
}

TEST(BuildDictionaries, EmptyData) {
  const auto d = build_dictionaries({}, kBinary, {3, 2});
  EXPECT_EQ(d.histories.size(), 1u);
  EXPECT_EQ(d.tests.size(), 0u);
}

TEST(BuildDictionaries, AllLengthTwoTrajectories) {
  const auto z = all_sequences(kBinary, 2);
  ASSERT_EQ(z.size(), 16u);
  const auto d = build_dictionaries(z, kBinary, {1, 1});
  EXPECT_EQ(d.histories.size(), 5u);
  EXPECT_EQ(d.tests.size(), 4u);
}

TEST(BuildDictionaries, EmptyTestOption) {
  DictionaryLimits limits{1, 1};
  limits.empty_test = true;
  const auto d = build_dictionaries(all_sequences(kBinary, 2), kBinary, limits);
  ASSERT_EQ(d.tests.size(), 5u);
  EXPECT_TRUE(d.tests.at(0).empty());
}

TEST(BuildDictionaries, RejectsBadInput) {
  EXPECT_THROW(build_dictionaries({}, kBinary, {1, 0}), std::invalid_argument);
  const std::vector<AoSequence> bad{seq({{0, 5}})};
  EXPECT_THROW(build_dictionaries(bad, kBinary, {1, 1}), InvalidTrajectory);
}

TEST(BuildDictionaries, CapKeepsMostFrequent) {
  std::vector<AoSequence> z;
  for (int i = 0; i < 5; ++i) z.push_back(seq({{1, 1}}));
  z.push_back(seq({{0, 0}}));
  DictionaryLimits limits{1, 1};
  limits.max_histories = 2;  // epsilon plus one
  limits.max_tests = 1;
  const auto d = build_dictionaries(z, kBinary, limits);
  ASSERT_EQ(d.histories.size(), 2u);
  EXPECT_EQ(d.histories.at(1), seq({{1, 1}}));
  ASSERT_EQ(d.tests.size(), 1u);
  EXPECT_EQ(d.tests.at(0), seq({{1, 1}}));
}

TEST(BuildDictionaries, Deterministic) {
  std::mt19937_64 rng(3);
  const auto z = random_trajectories(rng, 50, 6);
  const auto a = build_dictionaries(z, kBinary, {3, 2});
  const auto b = build_dictionaries(z, kBinary, {3, 2});
  EXPECT_TRUE(a.histories == b.histories);
  EXPECT_TRUE(a.tests == b.tests);
}

TEST(ExtendDictionaries, AppendsWithoutMovingIndices) {
  std::mt19937_64 rng(4);
  const auto z1 = random_trajectories(rng, 10, 4);
  const auto z2 = random_trajectories(rng, 10, 4);
  auto d = build_dictionaries(z1, kBinary, {2, 2});
  const auto old_h = d.histories.entries();
  const auto old_t = d.tests.entries();
  extend_dictionaries(d, z2);
  for (std::size_t i = 0; i < old_h.size(); ++i) EXPECT_EQ(d.histories.at(i), old_h[i]);
  for (std::size_t i = 0; i < old_t.size(); ++i) EXPECT_EQ(d.tests.at(i), old_t[i]);
  EXPECT_FALSE(extend_dictionaries(d, z2));
}

TEST(ScanTrajectory, DirectPartition) {
  SeqDictionary h(kBinary, 1, true), t(kBinary, 1, false);
  h.insert(seq({{0, 0}}));
  t.insert(seq({{0, 0}}));
  t.insert(seq({{1, 1}}));
  const auto z = seq({{0, 0}, {1, 1}});
  const auto ic = scan_trajectory(z, h, t);
  EXPECT_EQ(ic.th(0, 0), 1);  // [(0,0)] after epsilon
  EXPECT_EQ(ic.th(1, 1), 1);  // [(1,1)] after [(0,0)]
  EXPECT_EQ(ic.th(1, 0), 0);
  const int p00 = kBinary.pair_id(0, 0);
  EXPECT_EQ(ic.ao(p00, 1, 0), 1);
  std::int64_t total = 0;
  for (const auto& m : ic.ao_counts)
    for (const auto& [cell, v] : m) total += v;
  EXPECT_EQ(total, 1);
}

TEST(ScanTrajectory, Additivity) {
  SeqDictionary h(kBinary, 1, true), t(kBinary, 1, false);
  h.insert(seq({{0, 0}}));
  const auto z = seq({{0, 0}});
  auto ic = scan_trajectory(z, h, t);
  ic += scan_trajectory(z, h, t);
  EXPECT_EQ(ic.h_counts[0], 2);
  EXPECT_EQ(ic.h_counts[1], 2);
}

// Brute-force re-enumeration of every split on short random sequences.
TEST(ScanTrajectory, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  const auto data = random_trajectories(rng, 40, 4);
  DictionaryLimits limits{2, 2};
  limits.empty_test = true;
  const auto d = build_dictionaries(data, kBinary, limits);
  for (const auto& z : data) {
    const auto ic = scan_trajectory(z, d.histories, d.tests);
    const std::span<const AoPair> zs(z);
    IndicatorCounts expect(d.histories.size(), kBinary.num_pairs());
    for (std::size_t i = 0; i <= z.size(); ++i) {
      const auto h = d.histories.find(zs.first(i));
      if (!h) continue;
      expect.h_counts[*h] += 1;
      for (std::size_t l = 0; i + l <= z.size(); ++l) {
        if (const auto t = d.tests.find(zs.subspan(i, l))) expect.th_counts[Cell{int(*t), int(*h)}] += 1;
        if (i + 1 + l <= z.size()) {
          if (const auto t = d.tests.find(zs.subspan(i + 1, l))) {
            expect.ao_counts[kBinary.pair_id(z[i].action, z[i].observation)][Cell{int(*t), int(*h)}] += 1;
          }
        }
      }
    }
    EXPECT_EQ(ic.h_counts, expect.h_counts);
    EXPECT_EQ(ic.th_counts, expect.th_counts);
    EXPECT_EQ(ic.ao_counts, expect.ao_counts);
  }
}

TEST(ScanTrajectory, PrefixAndPartitionConsistency) {
  std::mt19937_64 rng(12);
  const auto data = random_trajectories(rng, 60, 4);
  const auto d = build_dictionaries(data, kBinary, {3, 1});
  IndicatorCounts total(d.histories.size(), kBinary.num_pairs());
  for (const auto& z : data) total += scan_trajectory(z, d.histories, d.tests);
  EXPECT_EQ(total.h_counts[0], 60);

  // sum over pairs of ao_counts[t, h] <= th_counts[t, h.ao] summed over extensions in H
  for (std::size_t h = 0; h < d.histories.size(); ++h) {
    for (std::size_t t = 0; t < d.tests.size(); ++t) {
      std::int64_t lhs = 0, rhs = 0;
      for (int a = 0; a < 2; ++a) {
        for (int o = 0; o < 2; ++o) {
          lhs += total.ao(kBinary.pair_id(a, o), t, h);
          auto ext = d.histories.at(h);
          ext.push_back({a, o});
          if (const auto j = d.histories.find(ext)) rhs += total.th(t, *j);
        }
      }
      if (d.histories.at(h).size() < 3) EXPECT_LE(lhs, rhs);
    }
  }
}
