#include "fgdqn/metrics.hpp"

#include "fgdqn/envs.hpp"
#include "fgdqn/trainers.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace fgdqn;

namespace {

QFunction<OneHotPairEncoder> pair_qf(std::uint64_t seed, int states, int actions,
                                     std::vector<int> hidden = {8}) {
  OneHotPairEncoder enc{states, actions};
  MlpTopology t;
  t.input_dim = enc.input_dim();
  t.hidden_dims = std::move(hidden);
  t.output_dim = 1;
  t.activation = Activation::relu;
  std::mt19937_64 rng(seed);
  return {init_params(t, rng), enc};
}

TEST(DqnBellmanErrorTest, TerminalArithmetic) {
  OneHotPairEncoder enc{4, 2};
  MlpTopology t;
  t.input_dim = enc.input_dim();
  t.output_dim = 1;
  QFunction<OneHotPairEncoder> zero_q(QNetwork(t), enc);  // Q identically 0
  std::vector<Transition<int>> batch = {{1, 0, 3.0, 2, true}};
  EXPECT_DOUBLE_EQ(dqn_bellman_error(zero_q, batch, 0.9), 9.0);
}

TEST(DqnBellmanErrorTest, NonNegativeAndMatchesBruteForce) {
  QFunction<OneHotPairEncoder> qf = pair_qf(71, 6, 3);
  std::mt19937_64 rng(72);
  std::vector<Transition<int>> batch;
  for (int i = 0; i < 40; ++i)
    batch.push_back({static_cast<int>(rng() % 6), static_cast<int>(rng() % 3),
                     static_cast<double>(rng() % 5) - 2.0, static_cast<int>(rng() % 6),
                     i % 7 == 0});
  const double gamma = 0.85;
  const double got = dqn_bellman_error(qf, batch, gamma);
  EXPECT_GE(got, 0.0);

  double expected = 0.0;
  for (const auto& t : batch) {
    double z = t.reward;
    if (!t.terminal) {
      double best = qf.value(t.next_state, 0);
      for (int u = 1; u < 3; ++u) best = std::max(best, qf.value(t.next_state, u));
      z += gamma * best;
    }
    const double d = z - qf.value(t.state, t.action);
    expected += d * d;
  }
  expected /= static_cast<double>(batch.size());
  EXPECT_NEAR(got, expected, 1e-12);
}

TEST(TrueBellmanErrorTest, ZeroTableOnTheForestHasClosedForm) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  const QTable zero(m.num_states, m.num_actions);
  // only Cut rows contribute: (1/20) * sum_{x=0..9} x^2 = 285/20
  EXPECT_DOUBLE_EQ(true_bellman_error(zero, m, uniform_state_action_weights(m)), 14.25);
}

TEST(TrueBellmanErrorTest, RejectsNonDistributionWeights) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  const QTable zero(m.num_states, m.num_actions);
  std::vector<double> mu(20, 0.1);  // sums to 2
  EXPECT_THROW(true_bellman_error(zero, m, mu), std::invalid_argument);
}

TEST(TrueBellmanErrorTest, JensenGapAgainstSampledErrors) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  QFunction<OneHotPairEncoder> qf = pair_qf(73, m.num_states, m.num_actions);
  const double exact = true_bellman_error(qf, m, uniform_state_action_weights(m));

  // sampled squared errors average above the exact error (conditional Jensen)
  std::mt19937_64 rng(74);
  RoundRobinSampler sampler(m);
  const long n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<Transition<int>> one(1);
  for (long i = 0; i < n; ++i) {
    const SampledTriple tr = sampler.next(rng);
    one[0] = {tr.state, tr.action, m.r(tr.state, tr.action), tr.next_state, false};
    const double e = dqn_bellman_error(qf, one, m.discount);
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_GE(mean, exact - 3.0 * se);
}

TEST(HammingDistanceTest, BasicsAndPaperExample) {
  DeterministicPolicy a{{0, 0, 1, 1, 1, 1, 1, 1, 1, 1}};
  DeterministicPolicy myopic{{0, 1, 1, 1, 1, 1, 1, 1, 1, 1}};
  EXPECT_EQ(hamming_distance(a, a), 0);
  EXPECT_EQ(hamming_distance(a, myopic), 1);
  DeterministicPolicy b{{1, 1, 0, 0, 0, 0, 0, 0, 0, 0}};
  EXPECT_EQ(hamming_distance(a, b), 10);
  DeterministicPolicy short_pi{{0, 1}};
  EXPECT_THROW(hamming_distance(a, short_pi), std::invalid_argument);
}

TEST(HammingDistanceTest, IsAMetricOnRandomPolicies) {
  std::mt19937_64 rng(75);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 12;
    auto draw = [&] {
      DeterministicPolicy pi;
      pi.action.resize(n);
      for (int i = 0; i < n; ++i) pi.action[i] = static_cast<int>(rng() % 3);
      return pi;
    };
    const DeterministicPolicy a = draw(), b = draw(), c = draw();
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_EQ(hamming_distance(a, a), 0);
    if (hamming_distance(a, b) == 0) EXPECT_EQ(a.action, b.action);
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
  }
}

TEST(GreedyPolicyOfNetTest, ZeroNetworkPicksActionZeroEverywhere) {
  OneHotPairEncoder enc{10, 2};
  MlpTopology t;
  t.input_dim = enc.input_dim();
  t.output_dim = 1;
  QFunction<OneHotPairEncoder> qf(QNetwork(t), enc);
  const DeterministicPolicy pi = greedy_policy_of_net(qf, 10);
  for (int a : pi.action) EXPECT_EQ(a, 0);
}

TEST(GreedyPolicyOfNetTest, AgreesWithPerStateArgmax) {
  QFunction<OneHotPairEncoder> qf = pair_qf(76, 8, 3);
  const DeterministicPolicy pi = greedy_policy_of_net(qf, 8);
  for (int x = 0; x < 8; ++x) EXPECT_EQ(pi.action[x], qf.argmax(x).index);
}

// Supervised sanity run: regressing the network onto oracle Q* targets must
// reproduce the optimal policy exactly.
TEST(GreedyPolicyOfNetTest, NetworkFittedToOracleTargetsRecoversTheOptimalPolicy) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  const QTable qstar = q_value_iteration(m, 1e-10, 1000000);
  const DeterministicPolicy pi_star = policy_iteration(m).policy;

  OneHotPairEncoder enc{m.num_states, m.num_actions};
  MlpTopology topo;
  topo.input_dim = enc.input_dim();
  topo.hidden_dims = {32};
  topo.output_dim = 1;
  topo.activation = Activation::relu;
  std::mt19937_64 rng(77);
  QFunction<OneHotPairEncoder> qf(init_params(topo, rng), enc);

  const int n = m.num_states * m.num_actions;
  Eigen::MatrixXd inputs(enc.input_dim(), n);
  Eigen::VectorXd targets(n);
  std::vector<int> out_idx(n, 0);
  int col = 0;
  for (int x = 0; x < m.num_states; ++x) {
    for (int u = 0; u < m.num_actions; ++u, ++col) {
      qf.encode_into_column(x, u, inputs, col);
      targets[col] = qstar.at(x, u);
    }
  }

  QNetwork::BatchWorkspace ws;
  Eigen::VectorXd grad, coeffs(n);
  const double lr = 0.05;
  for (int epoch = 0; epoch < 4000; ++epoch) {
    qf.net().forward_batch(inputs, ws);
    const Eigen::MatrixXd& out = qf.net().batch_outputs(ws);
    for (int k = 0; k < n; ++k) coeffs[k] = 2.0 * (out(0, k) - targets[k]) / n;
    qf.net().backward_weighted(ws, out_idx, coeffs, grad);
    qf.net().params() -= lr * grad;
  }
  EXPECT_EQ(greedy_policy_of_net(qf, m.num_states).action, pi_star.action);
}

TEST(MovingAverageTest, ClosedForms) {
  EXPECT_EQ(moving_average({2.0, 2.0, 2.0}, 2), (std::vector<double>{2.0, 2.0, 2.0}));
  EXPECT_EQ(moving_average({1.0, 5.0, 9.0}, 1), (std::vector<double>{1.0, 5.0, 9.0}));
  EXPECT_EQ(moving_average({0.0, 200.0}, 2), (std::vector<double>{0.0, 100.0}));
}

TEST(RunningMeanTest, PrefixMeans) {
  EXPECT_EQ(running_mean({2.0, 4.0, 9.0}), (std::vector<double>{2.0, 3.0, 5.0}));
}

TEST(HammingSubsampleTest, StrideSemantics) {
  const std::vector<double> s{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(hamming_subsample(s, 1), s);
  EXPECT_EQ(hamming_subsample(s, 4), (std::vector<double>{0, 4, 8}));
  std::vector<double> long_series(101, 1.0);
  EXPECT_EQ(hamming_subsample(long_series, 50).size(), 3u);  // ceil(101/50)
}

TEST(AggregateRunsTest, IdenticalRunsHaveZeroSpread) {
  const std::vector<std::vector<double>> runs = {{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};
  const AggregateStats s = aggregate_runs(runs);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(s.mean[i], runs[0][i]);
    EXPECT_DOUBLE_EQ(s.stddev[i], 0.0);
    EXPECT_DOUBLE_EQ(s.ci_half[i], 0.0);
  }
}

TEST(AggregateRunsTest, TwoRunClosedForm) {
  const AggregateStats s = aggregate_runs({{0.0}, {2.0}});
  EXPECT_DOUBLE_EQ(s.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(s.stddev[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.ci_half[0], 1.96);
}

TEST(AggregateRunsTest, OrderInvariantAndTruncating) {
  const std::vector<std::vector<double>> runs = {{1, 2, 3, 4}, {3, 2, 1}, {2, 2, 2, 9, 9}};
  std::vector<std::vector<double>> permuted = {runs[2], runs[0], runs[1]};
  const AggregateStats a = aggregate_runs(runs);
  const AggregateStats b = aggregate_runs(permuted);
  ASSERT_EQ(a.mean.size(), 3u);  // shortest run wins
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    EXPECT_DOUBLE_EQ(a.mean[i], b.mean[i]);
    EXPECT_DOUBLE_EQ(a.stddev[i], b.stddev[i]);
  }
  EXPECT_THROW(aggregate_runs({{1.0}}), std::invalid_argument);
}

}  // namespace
