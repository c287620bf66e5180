#pragma once

#include "fgdqn/mdp.hpp"

#include <random>
#include <vector>

namespace fgdqn::testing {

/// Random dense MDP with Dirichlet(1) transition rows.
inline TabularMdp random_mdp(std::mt19937_64& rng, int max_states = 20, int max_actions = 5,
                             double gamma_min = 0.05, double gamma_max = 0.95) {
  std::uniform_int_distribution<int> s_dist(2, max_states);
  std::uniform_int_distribution<int> a_dist(2, max_actions);
  std::uniform_real_distribution<double> g_dist(gamma_min, gamma_max);
  std::uniform_real_distribution<double> r_dist(-1.0, 1.0);
  std::exponential_distribution<double> e_dist(1.0);

  TabularMdp m(s_dist(rng), a_dist(rng), g_dist(rng));
  for (int x = 0; x < m.num_states; ++x) {
    for (int u = 0; u < m.num_actions; ++u) {
      double total = 0.0;
      std::vector<double> row(m.num_states);
      for (int y = 0; y < m.num_states; ++y) {
        row[y] = e_dist(rng);
        total += row[y];
      }
      for (int y = 0; y < m.num_states; ++y) m.p(x, u, y) = row[y] / total;
      m.r(x, u) = r_dist(rng);
    }
  }
  return m;
}

/// Random stationary randomized policy with strictly positive probabilities.
inline RandomizedPolicy random_policy(std::mt19937_64& rng, int num_states, int num_actions) {
  std::exponential_distribution<double> e_dist(1.0);
  RandomizedPolicy phi(num_states, num_actions);
  for (int x = 0; x < num_states; ++x) {
    double total = 0.0;
    for (int u = 0; u < num_actions; ++u) {
      phi.at(x, u) = 0.05 + e_dist(rng);
      total += phi.at(x, u);
    }
    for (int u = 0; u < num_actions; ++u) phi.at(x, u) /= total;
  }
  return phi;
}

}  // namespace fgdqn::testing
