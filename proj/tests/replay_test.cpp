#include "fgdqn/replay.hpp"

#include "fgdqn/envs.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

using namespace fgdqn;

namespace {

Transition<int> make_t(int x, int u, double r, int y) { return {x, u, r, y, false}; }

TEST(ReplayBufferTest, RingEvictionDropsTheOldest) {
  ReplayBuffer<int> buf(3);
  buf.push(make_t(0, 0, 0.0, 1));
  buf.push(make_t(1, 0, 0.0, 2));
  buf.push(make_t(2, 0, 0.0, 3));
  buf.push(make_t(3, 0, 0.0, 4));  // evicts (0,0)
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_FALSE(buf.has_key(0, 0));
  EXPECT_TRUE(buf.has_key(3, 0));
}

TEST(ReplayBufferTest, PushedTransitionIsImmediatelyRetrievable) {
  ReplayBuffer<int> buf(8);
  buf.push(make_t(2, 1, 2.0, 0));
  const auto got = buf.sample_conditional(2, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].state, 2);
  EXPECT_EQ(got[0].action, 1);
  EXPECT_DOUBLE_EQ(got[0].reward, 2.0);
}

TEST(ReplayBufferTest, IndexSizesSumToBufferSize) {
  ReplayBuffer<int> buf(16);
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    buf.push(make_t(static_cast<int>(rng() % 4), static_cast<int>(rng() % 3), 0.0,
                    static_cast<int>(rng() % 4)));
    std::size_t total = 0;
    for (int x = 0; x < 4; ++x)
      for (int u = 0; u < 3; ++u) total += buf.conditional_count(x, u);
    EXPECT_EQ(total, buf.size());
  }
}

TEST(ReplayBufferTest, ConditionalRetrievalIsExhaustive) {
  ReplayBuffer<int> buf(3);
  buf.push(make_t(2, kForestCut, 2.0, 0));
  buf.push(make_t(2, kForestCut, 2.0, 0));
  buf.push(make_t(2, kForestCut, 2.0, 0));
  EXPECT_EQ(buf.sample_conditional(2, kForestCut).size(), 3u);
  buf.push(make_t(5, kForestWait, 0.0, 6));  // evicts one of them
  EXPECT_EQ(buf.sample_conditional(2, kForestCut).size(), 2u);
}

TEST(ReplayBufferTest, AbsentKeyThrows) {
  ReplayBuffer<int> buf(4);
  buf.push(make_t(1, 0, 0.0, 2));
  EXPECT_THROW(buf.sample_conditional(1, 1), std::runtime_error);
  EXPECT_THROW(conditional_target_average(buf, 3, 0, [](const Transition<int>&) { return 0.0; }),
               std::runtime_error);
}

TEST(ReplayBufferTest, MinibatchFromSingletonRepeatsIt) {
  ReplayBuffer<int> buf(4);
  buf.push(make_t(7, 1, 3.5, 0));
  std::mt19937_64 rng(42);
  const auto batch = buf.sample_minibatch(4, rng);
  ASSERT_EQ(batch.size(), 4u);
  for (const auto& t : batch) {
    EXPECT_EQ(t.state, 7);
    EXPECT_DOUBLE_EQ(t.reward, 3.5);
  }
}

TEST(ReplayBufferTest, EmptyBufferSamplingThrows) {
  ReplayBuffer<int> buf(4);
  std::mt19937_64 rng(43);
  EXPECT_THROW(buf.sample_minibatch(1, rng), std::runtime_error);
}

TEST(ReplayBufferTest, MinibatchDrawsAreUniform) {
  ReplayBuffer<int> buf(10);
  for (int i = 0; i < 10; ++i) buf.push(make_t(i, 0, 0.0, 0));
  std::mt19937_64 rng(44);
  const long n = 100000;
  std::vector<long> counts(10, 0);
  const auto batch = buf.sample_minibatch(n, rng);
  for (const auto& t : batch) counts[t.state]++;
  const double p = 0.1;
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (long c : counts) EXPECT_NEAR(static_cast<double>(c) / n, p, 3.0 * se);
}

TEST(ReplayBufferTest, ForestCutTuplesAllLandOnAgeZero) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  ReplayBuffer<int> buf(1000);
  RoundRobinSampler sampler(m);
  std::mt19937_64 rng(45);
  for (int i = 0; i < 500; ++i) {
    const SampledTriple t = sampler.next(rng);
    buf.push({t.state, t.action, m.r(t.state, t.action), t.next_state, false});
  }
  for (int x = 0; x < m.num_states; ++x)
    for (const auto& t : buf.sample_conditional(x, kForestCut)) EXPECT_EQ(t.next_state, 0);
}

// Mirror-model property check: random pushes against a brute-force list.
TEST(ReplayBufferTest, IndexStaysConsistentUnderChurn) {
  const std::size_t capacity = 64;
  ReplayBuffer<int> buf(capacity);
  std::vector<Transition<int>> mirror;
  std::mt19937_64 rng(46);
  for (int i = 0; i < 10000; ++i) {
    const Transition<int> t = make_t(static_cast<int>(rng() % 6), static_cast<int>(rng() % 2),
                                     static_cast<double>(rng() % 10), static_cast<int>(rng() % 6));
    buf.push(t);
    mirror.push_back(t);
    if (mirror.size() > capacity) mirror.erase(mirror.begin());

    if (i % 97 == 0) {
      for (int x = 0; x < 6; ++x) {
        for (int u = 0; u < 2; ++u) {
          std::multiset<double> expected;
          for (const auto& mt : mirror)
            if (mt.state == x && mt.action == u) expected.insert(mt.reward);
          if (expected.empty()) {
            EXPECT_FALSE(buf.has_key(x, u));
            continue;
          }
          std::multiset<double> got;
          for (const auto& bt : buf.sample_conditional(x, u)) got.insert(bt.reward);
          EXPECT_EQ(got, expected) << "key (" << x << "," << u << ")";
        }
      }
    }
  }
}

TEST(ConditionalAverageTest, SingleMatchIsItsOwnAverage) {
  ReplayBuffer<int> buf(4);
  buf.push(make_t(1, 1, 4.25, 0));
  const double avg =
      conditional_target_average(buf, 1, 1, [](const Transition<int>& t) { return t.reward; });
  EXPECT_DOUBLE_EQ(avg, 4.25);
}

TEST(ConditionalAverageTest, DeterministicTransitionsNeedNoAveraging) {
  // all matching tuples are identical, so the mean equals any one of them
  ReplayBuffer<int> buf(16);
  for (int i = 0; i < 5; ++i) buf.push(make_t(3, kForestCut, 3.0, 0));
  auto target = [](const Transition<int>& t) { return t.reward + 0.9 * t.next_state; };
  EXPECT_DOUBLE_EQ(conditional_target_average(buf, 3, kForestCut, target), target(buf.at(0)));
}

TEST(ConditionalAverageTest, ConvergesToTheKernelExpectation) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  const int x = 5, u = kForestWait;
  // arbitrary fixed value table standing in for max_v Q(., v)
  std::vector<double> value(m.num_states);
  for (int y = 0; y < m.num_states; ++y) value[y] = 0.3 * y * y - y;

  auto target = [&](const Transition<int>& t) { return m.discount * value[t.next_state]; };
  double exact = 0.0, exact_sq = 0.0;
  for (int y = 0; y < m.num_states; ++y) {
    exact += m.p(x, u, y) * m.discount * value[y];
    exact_sq += m.p(x, u, y) * (m.discount * value[y]) * (m.discount * value[y]);
  }
  const double sd = std::sqrt(exact_sq - exact * exact);

  const long n = 10000;
  ReplayBuffer<int> buf(n);
  std::mt19937_64 rng(47);
  for (long i = 0; i < n; ++i)
    buf.push({x, u, m.r(x, u), sample_next_state(m, x, u, rng), false});
  const double avg = conditional_target_average(buf, x, u, target);
  EXPECT_NEAR(avg, exact, 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

}  // namespace
