#pragma once

#include "fgdqn/envs.hpp"
#include "fgdqn/io.hpp"
#include "fgdqn/qnet.hpp"
#include "fgdqn/trainers.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgdqn {

/// Everything a batch run needs, loadable from one JSON document with
/// `--set dotted.path=value` overrides on top.
struct RunConfig {
  // environment
  std::string environment = "forest";  // "forest" | "cartpole"
  int forest_num_states = 10;
  double forest_fire_prob = 0.05;
  CartPoleParams cartpole;
  double discount = 0.8;

  // algorithm
  Algorithm algorithm = Algorithm::fgdqn;
  StepSizeSchedule schedule{ScheduleKind::polynomial, 1e-3, 0.6, 1e4};
  int batch_size = 25;
  int target_sync_period = 100;
  double epsilon = 0.1;
  double noise_amplitude = 0.0;
  bool conditional_replay = true;
  bool sequential_inner_updates = false;
  std::size_t replay_capacity = 100000;

  // network
  std::vector<int> hidden_dims = {200};
  std::string activation = "relu";

  // budget
  long iterations = 10000;  // off-policy
  int episodes = 1500;      // on-policy
  int max_steps = 200;

  // runs
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";

  void validate() const {
    if (environment != "forest" && environment != "cartpole")
      throw std::invalid_argument("RunConfig: environment must be 'forest' or 'cartpole'");
    if (environment == "forest")
      ForestParams{forest_num_states, forest_fire_prob, discount}.validate();
    else
      cartpole.validate();
    activation_from_string(activation);  // throws on unknown names
    if (iterations < 0 || episodes < 0)
      throw std::invalid_argument("RunConfig: budgets must be non-negative");
    if (seeds.empty()) throw std::invalid_argument("RunConfig: need at least one seed");
    trainer_config(seeds.front()).validate();
  }

  TrainerConfig trainer_config(std::uint64_t seed) const {
    TrainerConfig t;
    t.algorithm = algorithm;
    t.schedule = schedule;
    t.discount = discount;
    t.minibatch_size = batch_size;
    t.target_sync_period = target_sync_period;
    t.epsilon = epsilon;
    t.noise_amplitude = noise_amplitude;
    t.conditional_replay = conditional_replay;
    t.sequential_inner_updates = sequential_inner_updates;
    t.replay_capacity = replay_capacity;
    t.seed = seed;
    return t;
  }

  MlpTopology topology() const {
    MlpTopology t;
    t.hidden_dims = hidden_dims;
    t.activation = activation_from_string(activation);
    return t;  // input/output dims are filled in by the training loops
  }

  ForestParams forest_params() const { return {forest_num_states, forest_fire_prob, discount}; }
};

inline std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::constant ? "constant" : "polynomial";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "polynomial") return ScheduleKind::polynomial;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["environment"] = {{"name", c.environment}};
  if (c.environment == "forest") {
    j["environment"]["num_states"] = c.forest_num_states;
    j["environment"]["fire_prob"] = c.forest_fire_prob;
  } else {
    j["environment"]["gravity"] = c.cartpole.gravity;
    j["environment"]["cart_mass"] = c.cartpole.cart_mass;
    j["environment"]["pole_mass"] = c.cartpole.pole_mass;
    j["environment"]["pole_half_length"] = c.cartpole.pole_half_length;
    j["environment"]["force_magnitude"] = c.cartpole.force_magnitude;
    j["environment"]["time_step"] = c.cartpole.time_step;
    j["environment"]["angle_limit"] = c.cartpole.angle_limit;
    j["environment"]["position_limit"] = c.cartpole.position_limit;
    j["environment"]["max_episode_steps"] = c.cartpole.max_episode_steps;
  }
  j["discount"] = c.discount;
  j["algorithm"] = to_string(c.algorithm);
  j["schedule"] = {{"kind", to_string(c.schedule.kind)},
                   {"a0", c.schedule.base},
                   {"exponent", c.schedule.exponent},
                   {"offset", c.schedule.offset}};
  j["batch_size"] = c.batch_size;
  j["target_sync_period"] = c.target_sync_period;
  j["epsilon"] = c.epsilon;
  j["noise_amplitude"] = c.noise_amplitude;
  j["conditional_replay"] = c.conditional_replay;
  j["sequential_inner_updates"] = c.sequential_inner_updates;
  j["replay_capacity"] = c.replay_capacity;
  j["network"] = {{"hidden_dims", c.hidden_dims}, {"activation", c.activation}};
  j["iterations"] = c.iterations;
  j["episodes"] = c.episodes;
  j["max_steps"] = c.max_steps;
  j["seeds"] = c.seeds;
  j["out_dir"] = c.out_dir;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("environment")) {
    const auto& e = j.at("environment");
    c.environment = e.value("name", c.environment);
    c.forest_num_states = e.value("num_states", c.forest_num_states);
    c.forest_fire_prob = e.value("fire_prob", c.forest_fire_prob);
    c.cartpole.gravity = e.value("gravity", c.cartpole.gravity);
    c.cartpole.cart_mass = e.value("cart_mass", c.cartpole.cart_mass);
    c.cartpole.pole_mass = e.value("pole_mass", c.cartpole.pole_mass);
    c.cartpole.pole_half_length = e.value("pole_half_length", c.cartpole.pole_half_length);
    c.cartpole.force_magnitude = e.value("force_magnitude", c.cartpole.force_magnitude);
    c.cartpole.time_step = e.value("time_step", c.cartpole.time_step);
    c.cartpole.angle_limit = e.value("angle_limit", c.cartpole.angle_limit);
    c.cartpole.position_limit = e.value("position_limit", c.cartpole.position_limit);
    c.cartpole.max_episode_steps = e.value("max_episode_steps", c.cartpole.max_episode_steps);
  }
  c.discount = j.value("discount", c.discount);
  if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("kind")) c.schedule.kind = schedule_kind_from_string(s.at("kind").get<std::string>());
    c.schedule.base = s.value("a0", c.schedule.base);
    c.schedule.exponent = s.value("exponent", c.schedule.exponent);
    c.schedule.offset = s.value("offset", c.schedule.offset);
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.target_sync_period = j.value("target_sync_period", c.target_sync_period);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.noise_amplitude = j.value("noise_amplitude", c.noise_amplitude);
  c.conditional_replay = j.value("conditional_replay", c.conditional_replay);
  c.sequential_inner_updates = j.value("sequential_inner_updates", c.sequential_inner_updates);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  if (j.contains("network")) {
    const auto& n = j.at("network");
    if (n.contains("hidden_dims")) c.hidden_dims = n.at("hidden_dims").get<std::vector<int>>();
    c.activation = n.value("activation", c.activation);
  }
  c.iterations = j.value("iterations", c.iterations);
  c.episodes = j.value("episodes", c.episodes);
  c.max_steps = j.value("max_steps", c.max_steps);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

/// Sensible starting points for the two benchmark problems.
inline RunConfig default_forest_config() { return RunConfig{}; }

inline RunConfig default_cartpole_config() {
  RunConfig c;
  c.environment = "cartpole";
  c.discount = 0.99;
  c.schedule = {ScheduleKind::constant, 1e-3, 1.0, 1.0};
  c.batch_size = 128;
  c.target_sync_period = 10;  // episodes
  c.epsilon = 0.1;
  c.conditional_replay = false;  // continuous states: per-sample targets
  c.hidden_dims = {16, 32, 32};
  c.episodes = 1500;
  c.max_steps = 200;
  return c;
}

/// Applies one `path.to.key=value` override onto a config JSON document.
/// The value text is parsed as JSON when possible, else taken as a string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(value_text);
  } catch (const nlohmann::json::parse_error&) {
    value = value_text;
  }

  nlohmann::json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw std::invalid_argument("override has an empty path segment: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(config_to_json(c).dump()); }

}  // namespace fgdqn
