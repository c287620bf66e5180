#include "fgdqn/envs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

using namespace fgdqn;

namespace {

TEST(ForestMdpTest, WaitAtMaximumAgeStaysUnlessFire) {
  const double p = 0.05;
  const TabularMdp m = forest_build_mdp({10, p, 0.8});
  const int top = m.num_states - 1;
  EXPECT_DOUBLE_EQ(m.p(top, kForestWait, top), 1.0 - p);
  EXPECT_DOUBLE_EQ(m.p(top, kForestWait, 0), p);
}

TEST(ForestMdpTest, CutAtAgeZero) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  EXPECT_DOUBLE_EQ(m.r(0, kForestCut), 0.0);
  EXPECT_DOUBLE_EQ(m.p(0, kForestCut, 0), 1.0);
}

TEST(ForestMdpTest, RowStochasticAcrossFireProbabilities) {
  for (double p : {0.0, 0.01, 0.05, 0.5, 1.0}) {
    const TabularMdp m = forest_build_mdp({10, p, 0.8});
    EXPECT_NO_THROW(m.validate()) << "p = " << p;
  }
}

TEST(ForestMdpTest, RejectsBadParameters) {
  EXPECT_THROW(forest_build_mdp({1, 0.05, 0.8}), std::invalid_argument);
  EXPECT_THROW(forest_build_mdp({10, -0.1, 0.8}), std::invalid_argument);
  EXPECT_THROW(forest_build_mdp({10, 0.05, 1.0}), std::invalid_argument);
}

TEST(CartPoleResetTest, ComponentsStayInTheInitBox) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const CartPoleState s = cartpole_reset(rng);
    for (double v : {s.cart_position, s.cart_velocity, s.pole_angle, s.angular_velocity}) {
      EXPECT_GE(v, -0.05);
      EXPECT_LE(v, 0.05);
    }
  }
}

TEST(CartPoleResetTest, SeededResetIsReproducible) {
  std::mt19937_64 a(77), b(77);
  for (int i = 0; i < 100; ++i) {
    const CartPoleState sa = cartpole_reset(a);
    const CartPoleState sb = cartpole_reset(b);
    EXPECT_EQ(sa.cart_position, sb.cart_position);
    EXPECT_EQ(sa.cart_velocity, sb.cart_velocity);
    EXPECT_EQ(sa.pole_angle, sb.pole_angle);
    EXPECT_EQ(sa.angular_velocity, sb.angular_velocity);
  }
}

TEST(CartPoleResetTest, ComponentMeansAreCentred) {
  std::mt19937_64 rng(5);
  const int n = 100000;
  double sums[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const CartPoleState s = cartpole_reset(rng);
    sums[0] += s.cart_position;
    sums[1] += s.cart_velocity;
    sums[2] += s.pole_angle;
    sums[3] += s.angular_velocity;
  }
  // sd of U[-0.05, 0.05] is 0.1/sqrt(12)
  const double se = 0.1 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  for (double sum : sums) EXPECT_NEAR(sum / n, 0.0, 3.0 * se);
}

TEST(CartPoleStepTest, MirrorSymmetryIsExact) {
  const CartPoleParams params;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    CartPoleState s{unif(rng), unif(rng), unif(rng), unif(rng)};
    CartPoleState mirrored{-s.cart_position, -s.cart_velocity, -s.pole_angle, -s.angular_velocity};
    const CartPoleState a = cartpole_dynamics(s, kCartPoleRight, params);
    const CartPoleState b = cartpole_dynamics(mirrored, kCartPoleLeft, params);
    EXPECT_EQ(a.cart_position, -b.cart_position);
    EXPECT_EQ(a.cart_velocity, -b.cart_velocity);
    EXPECT_EQ(a.pole_angle, -b.pole_angle);
    EXPECT_EQ(a.angular_velocity, -b.angular_velocity);
  }
}

TEST(CartPoleStepTest, OutOfTrackIsTerminal) {
  const CartPoleParams params;
  const CartPoleState s{2.45, 0.0, 0.0, 0.0};
  const auto out = cartpole_step(s, kCartPoleRight, params, 1);
  EXPECT_TRUE(out.terminal);
  EXPECT_DOUBLE_EQ(out.reward, 1.0);
}

TEST(CartPoleStepTest, ZeroForceZeroGravityDriftsLinearly) {
  CartPoleParams params;
  params.gravity = 0.0;
  params.force_magnitude = 0.0;
  const CartPoleState s{0.3, -0.7, 0.1, 0.0};
  const CartPoleState next = cartpole_dynamics(s, kCartPoleLeft, params);
  EXPECT_DOUBLE_EQ(next.cart_position, s.cart_position + params.time_step * s.cart_velocity);
  EXPECT_DOUBLE_EQ(next.cart_velocity, s.cart_velocity);
  EXPECT_DOUBLE_EQ(next.pole_angle, s.pole_angle);
  EXPECT_DOUBLE_EQ(next.angular_velocity, 0.0);
}

TEST(CartPoleStepTest, DynamicsAreDeterministic) {
  const CartPoleParams params;
  const CartPoleState s{0.01, -0.02, 0.03, 0.04};
  const CartPoleState a = cartpole_dynamics(s, kCartPoleRight, params);
  const CartPoleState b = cartpole_dynamics(s, kCartPoleRight, params);
  EXPECT_EQ(a.cart_position, b.cart_position);
  EXPECT_EQ(a.cart_velocity, b.cart_velocity);
  EXPECT_EQ(a.pole_angle, b.pole_angle);
  EXPECT_EQ(a.angular_velocity, b.angular_velocity);
}

TEST(CartPoleEnvTest, EpisodesNeverExceedTheStepCap) {
  CartPoleEnv env({}, 11);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> act(0, 1);
  for (int ep = 0; ep < 50; ++ep) {
    env.reset();
    int steps = 0;
    for (;;) {
      const auto out = env.step(act(rng));
      ++steps;
      if (out.terminal) break;
    }
    EXPECT_LE(steps, env.params().max_episode_steps);
    EXPECT_EQ(steps, env.steps_taken());
  }
}

TEST(CartPoleEnvTest, SteppingAFinishedEpisodeThrows) {
  CartPoleEnv env({}, 1);
  EXPECT_THROW(env.step(kCartPoleLeft), std::logic_error);  // never reset
  env.reset();
  for (;;) {
    if (env.step(kCartPoleLeft).terminal) break;
  }
  EXPECT_THROW(env.step(kCartPoleLeft), std::logic_error);
}

TEST(RoundRobinSamplerTest, OneCycleHitsEveryPairOnce) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  RoundRobinSampler sampler(m);
  std::mt19937_64 rng(21);
  std::map<std::pair<int, int>, int> counts;
  for (long i = 0; i < sampler.cycle_length(); ++i) {
    const SampledTriple t = sampler.next(rng);
    counts[{t.state, t.action}]++;
  }
  EXPECT_EQ(static_cast<long>(counts.size()), sampler.cycle_length());
  for (const auto& [pair, c] : counts) EXPECT_EQ(c, 1);
}

TEST(RoundRobinSamplerTest, CutAlwaysResetsTheForest) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  RoundRobinSampler sampler(m);
  std::mt19937_64 rng(22);
  for (long i = 0; i < 50 * sampler.cycle_length(); ++i) {
    const SampledTriple t = sampler.next(rng);
    if (t.action == kForestCut) EXPECT_EQ(t.next_state, 0);
  }
}

TEST(RoundRobinSamplerTest, EmpiricalNextStateLawMatchesTheKernel) {
  const TabularMdp m = forest_build_mdp({6, 0.1, 0.8});
  RoundRobinSampler sampler(m);
  std::mt19937_64 rng(23);
  const long cycles = 100000;
  std::vector<std::vector<long>> counts(
      static_cast<std::size_t>(m.num_states) * m.num_actions, std::vector<long>(m.num_states, 0));
  for (long c = 0; c < cycles; ++c) {
    for (long k = 0; k < sampler.cycle_length(); ++k) {
      const SampledTriple t = sampler.next(rng);
      counts[static_cast<std::size_t>(t.state) * m.num_actions + t.action][t.next_state]++;
    }
  }
  for (int x = 0; x < m.num_states; ++x) {
    for (int u = 0; u < m.num_actions; ++u) {
      for (int y = 0; y < m.num_states; ++y) {
        const double p = m.p(x, u, y);
        const double phat =
            static_cast<double>(counts[static_cast<std::size_t>(x) * m.num_actions + u][y]) / cycles;
        const double se = std::sqrt(p * (1.0 - p) / cycles);
        EXPECT_NEAR(phat, p, 3.0 * se + 1e-12) << "x=" << x << " u=" << u << " y=" << y;
      }
    }
  }
}

}  // namespace
