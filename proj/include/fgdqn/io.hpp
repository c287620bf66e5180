#pragma once

#include "fgdqn/mdp.hpp"
#include "fgdqn/metrics.hpp"
#include "fgdqn/qnet.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgdqn {

/// Deterministic shortest-exact formatting for CSV cells; metric files must be
/// byte-stable across reruns.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

/// FNV-1a, hex string; used to stamp metric files with their configuration.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- MDP <-> JSON -----------------------------------------------------------

inline nlohmann::json mdp_to_json(const TabularMdp& m) {
  nlohmann::json j;
  j["num_states"] = m.num_states;
  j["num_actions"] = m.num_actions;
  j["discount"] = m.discount;
  nlohmann::json trans = nlohmann::json::array();
  nlohmann::json rew = nlohmann::json::array();
  for (int x = 0; x < m.num_states; ++x) {
    nlohmann::json tx = nlohmann::json::array();
    nlohmann::json rx = nlohmann::json::array();
    for (int u = 0; u < m.num_actions; ++u) {
      nlohmann::json row = nlohmann::json::array();
      for (int y = 0; y < m.num_states; ++y) row.push_back(m.p(x, u, y));
      tx.push_back(std::move(row));
      rx.push_back(m.r(x, u));
    }
    trans.push_back(std::move(tx));
    rew.push_back(std::move(rx));
  }
  j["transition"] = std::move(trans);
  j["reward"] = std::move(rew);
  return j;
}

inline TabularMdp mdp_from_json(const nlohmann::json& j) {
  TabularMdp m(j.at("num_states").get<int>(), j.at("num_actions").get<int>(),
               j.at("discount").get<double>());
  const auto& trans = j.at("transition");
  const auto& rew = j.at("reward");
  for (int x = 0; x < m.num_states; ++x) {
    for (int u = 0; u < m.num_actions; ++u) {
      for (int y = 0; y < m.num_states; ++y) m.p(x, u, y) = trans.at(x).at(u).at(y).get<double>();
      m.r(x, u) = rew.at(x).at(u).get<double>();
    }
  }
  m.validate();
  return m;
}

// ---- network checkpoints ------------------------------------------------------

inline nlohmann::json checkpoint_to_json(const QNetwork& net) {
  nlohmann::json j;
  const MlpTopology& t = net.topology();
  j["format"] = "fgdqn-checkpoint-v1";
  j["topology"] = {{"input_dim", t.input_dim},
                   {"hidden_dims", t.hidden_dims},
                   {"output_dim", t.output_dim},
                   {"activation", to_string(t.activation)},
                   {"with_bias", t.with_bias},
                   {"output_squash_scale", t.output_squash_scale}};
  std::vector<double> params(net.params().data(), net.params().data() + net.params().size());
  j["params"] = std::move(params);
  return j;
}

inline QNetwork checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "fgdqn-checkpoint-v1")
    throw std::runtime_error("checkpoint: unknown format tag");
  const auto& jt = j.at("topology");
  MlpTopology t;
  t.input_dim = jt.at("input_dim").get<int>();
  t.hidden_dims = jt.at("hidden_dims").get<std::vector<int>>();
  t.output_dim = jt.at("output_dim").get<int>();
  t.activation = activation_from_string(jt.at("activation").get<std::string>());
  t.with_bias = jt.at("with_bias").get<bool>();
  t.output_squash_scale = jt.at("output_squash_scale").get<double>();
  QNetwork net(t);
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<long>(params.size()) != net.param_count())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (long i = 0; i < net.param_count(); ++i) net.params()[i] = params[i];
  return net;
}

inline void save_checkpoint(const std::string& path, const QNetwork& net) {
  write_text_file(path, checkpoint_to_json(net).dump());
}

inline QNetwork load_checkpoint(const std::string& path) {
  return checkpoint_from_json(nlohmann::json::parse(read_text_file(path)));
}

// ---- metric CSV files -----------------------------------------------------------

/// One row per iteration (off-policy runs) or per episode (on-policy runs);
/// a zero-budget run still gets its header.
inline std::string run_csv_text(const RunMetrics& m) {
  std::string out;
  if (m.kind == RunKind::off_policy) {
    out = "iter,dqn_bellman_error,true_bellman_error,hamming_distance\n";
    for (std::size_t i = 0; i < m.dqn_bellman_error.size(); ++i) {
      out += std::to_string(i);
      out += ',';
      out += format_double(m.dqn_bellman_error[i]);
      out += ',';
      out += i < m.true_bellman_error.size() ? format_double(m.true_bellman_error[i]) : "";
      out += ',';
      out += i < m.hamming_distance.size() ? format_double(m.hamming_distance[i]) : "";
      out += '\n';
    }
  } else {
    out =
        "episode,episode_reward,episode_length,episode_discounted_reward,episode_mean_bellman_"
        "error\n";
    for (std::size_t i = 0; i < m.episode_reward.size(); ++i) {
      out += std::to_string(i);
      out += ',';
      out += format_double(m.episode_reward[i]);
      out += ',';
      out += format_double(m.episode_length[i]);
      out += ',';
      out += format_double(m.episode_discounted_reward[i]);
      out += ',';
      out += format_double(m.episode_mean_bellman_error[i]);
      out += '\n';
    }
  }
  return out;
}

inline void write_run_csv(const std::string& path, const RunMetrics& m) {
  write_text_file(path, run_csv_text(m));
}

struct CompareRow {
  long iter = 0;
  std::string alg;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline void write_compare_csv(const std::string& path, const std::vector<CompareRow>& rows) {
  std::string out = "iter,alg,mean,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    out += r.alg;
    out += ',';
    out += format_double(r.mean);
    out += ',';
    out += format_double(r.ci_low);
    out += ',';
    out += format_double(r.ci_high);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---- solver outputs ---------------------------------------------------------------

inline nlohmann::json policy_to_json(const DeterministicPolicy& pi) {
  return nlohmann::json(pi.action);
}

inline nlohmann::json value_to_json(const ValueFunction& v) { return nlohmann::json(v.values); }

inline nlohmann::json qtable_to_json(const QTable& q) {
  nlohmann::json rows = nlohmann::json::array();
  for (int x = 0; x < q.num_states; ++x) {
    nlohmann::json row = nlohmann::json::array();
    for (int u = 0; u < q.num_actions; ++u) row.push_back(q.at(x, u));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fgdqn
