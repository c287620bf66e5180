// Batch front-end: solve exact models, train/compare the learners, check
// gradients and evaluate checkpoints.

#include "fgdqn/config.hpp"
#include "fgdqn/envs.hpp"
#include "fgdqn/gradcheck.hpp"
#include "fgdqn/io.hpp"
#include "fgdqn/mdp.hpp"
#include "fgdqn/metrics.hpp"
#include "fgdqn/svg.hpp"
#include "fgdqn/trainers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  int parallel = 1;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "key.path=value overrides applied on top of the config");
  cmd->add_option("--out", args.out_dir, "output directory (overrides config out_dir)");
  cmd->add_option("--seeds", args.seeds, "comma-separated seed list (overrides config seeds)")
      ->delimiter(',');
  cmd->add_option("--parallel", args.parallel, "worker threads for independent seeds")
      ->check(CLI::PositiveNumber);
}

fgdqn::RunConfig resolve_config(const CommonArgs& args) {
  json j;
  if (!args.config_path.empty()) {
    j = json::parse(fgdqn::read_text_file(args.config_path));
  } else {
    j = fgdqn::config_to_json(fgdqn::default_forest_config());
  }
  // Re-seat defaults when the environment is switched by an override.
  for (const auto& ov : args.overrides) {
    if (ov.rfind("environment.name=", 0) == 0 && args.config_path.empty()) {
      const std::string env = ov.substr(std::string("environment.name=").size());
      if (env == "cartpole") j = fgdqn::config_to_json(fgdqn::default_cartpole_config());
    }
  }
  for (const auto& ov : args.overrides) fgdqn::apply_override(j, ov);
  fgdqn::RunConfig cfg = fgdqn::config_from_json(j);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (!args.seeds.empty()) cfg.seeds = args.seeds;
  cfg.validate();
  return cfg;
}

struct SeedRun {
  fgdqn::RunMetrics metrics;
  fgdqn::QNetwork net;
  fgdqn::QTable qtable;
};

SeedRun run_one_seed(const fgdqn::RunConfig& cfg, std::uint64_t seed) {
  SeedRun out;
  const fgdqn::TrainerConfig tcfg = cfg.trainer_config(seed);
  if (cfg.environment == "forest") {
    const fgdqn::TabularMdp mdp = fgdqn::forest_build_mdp(cfg.forest_params());
    fgdqn::OffPolicyResult res =
        fgdqn::train_off_policy(mdp, tcfg, cfg.topology(), cfg.iterations);
    out.metrics = std::move(res.metrics);
    out.net = std::move(res.net);
    out.qtable = std::move(res.qtable);
  } else {
    fgdqn::CartPoleEnv env(cfg.cartpole, fgdqn::split_seed(seed, /*salt=*/1));
    fgdqn::CartPoleEncoder enc;
    fgdqn::OnPolicyResult res =
        fgdqn::train_on_policy(env, enc, tcfg, cfg.topology(), cfg.episodes, cfg.max_steps);
    out.metrics = std::move(res.metrics);
    out.net = std::move(res.net);
  }
  out.metrics.config_hash = fgdqn::config_hash(cfg);
  return out;
}

/// Runs fn(i) for every seed index, at most `parallel` at a time. Each run is
/// self-contained, so scheduling cannot change any result.
void for_each_index_parallel(std::size_t count, int parallel, const std::function<void(std::size_t)>& fn) {
  if (parallel <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min<std::size_t>(parallel, count);
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<SeedRun> run_all_seeds(const fgdqn::RunConfig& cfg, int parallel) {
  std::vector<SeedRun> runs(cfg.seeds.size());
  for_each_index_parallel(cfg.seeds.size(), parallel,
                          [&](std::size_t i) { runs[i] = run_one_seed(cfg, cfg.seeds[i]); });
  return runs;
}

// ---- solve ------------------------------------------------------------------

int cmd_solve(const CommonArgs& args) {
  const fgdqn::RunConfig cfg = resolve_config(args);
  if (cfg.environment != "forest") {
    std::cerr << "solve: only tabular environments are supported\n";
    return 1;
  }
  const fgdqn::TabularMdp mdp = fgdqn::forest_build_mdp(cfg.forest_params());
  const fgdqn::PolicyIterationResult pi = fgdqn::policy_iteration(mdp);
  const fgdqn::QTable qstar = fgdqn::q_value_iteration(mdp, 1e-10, 1000000);

  fs::create_directories(cfg.out_dir);
  fgdqn::write_text_file(cfg.out_dir + "/policy.json", fgdqn::policy_to_json(pi.policy).dump());
  fgdqn::write_text_file(cfg.out_dir + "/value.json", fgdqn::value_to_json(pi.value).dump());
  fgdqn::write_text_file(cfg.out_dir + "/qtable.json", fgdqn::qtable_to_json(qstar).dump());
  std::cout << fgdqn::policy_to_json(pi.policy).dump() << "\n";
  return 0;
}

// ---- train ------------------------------------------------------------------

json summarize_run(const fgdqn::RunConfig& cfg, std::uint64_t seed, const fgdqn::RunMetrics& m) {
  json s;
  s["seed"] = seed;
  s["diverged"] = m.diverged;
  if (!m.hamming_distance.empty()) s["final_hamming_distance"] = m.hamming_distance.back();
  if (!m.true_bellman_error.empty()) s["final_true_bellman_error"] = m.true_bellman_error.back();
  if (!m.dqn_bellman_error.empty()) {
    s["final_running_bellman_error"] = fgdqn::running_mean(m.dqn_bellman_error).back();
  }
  if (!m.episode_reward.empty()) {
    s["final_episode_reward"] = m.episode_reward.back();
    s["final_moving_avg_reward"] = fgdqn::moving_average(m.episode_reward, 100).back();
  }
  (void)cfg;
  return s;
}

int cmd_train(const CommonArgs& args) {
  const fgdqn::RunConfig cfg = resolve_config(args);
  fs::create_directories(cfg.out_dir);
  const std::vector<SeedRun> runs = run_all_seeds(cfg, args.parallel);

  json summary;
  summary["config"] = fgdqn::config_to_json(cfg);
  summary["config_hash"] = fgdqn::config_hash(cfg);
  summary["runs"] = json::array();
  bool any_diverged = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::uint64_t seed = cfg.seeds[i];
    fgdqn::write_run_csv(cfg.out_dir + "/run_" + std::to_string(seed) + ".csv", runs[i].metrics);
    if (cfg.algorithm == fgdqn::Algorithm::tabular_q) {
      fgdqn::write_text_file(cfg.out_dir + "/qtable_" + std::to_string(seed) + ".json",
                             fgdqn::qtable_to_json(runs[i].qtable).dump());
    } else {
      fgdqn::save_checkpoint(cfg.out_dir + "/checkpoint_" + std::to_string(seed) + ".json",
                             runs[i].net);
    }
    summary["runs"].push_back(summarize_run(cfg, seed, runs[i].metrics));
    any_diverged = any_diverged || runs[i].metrics.diverged;
  }
  summary["ok"] = !any_diverged;
  fgdqn::write_text_file(cfg.out_dir + "/summary.json", summary.dump(2));
  if (any_diverged) {
    std::cerr << "train: at least one run diverged (non-finite parameters)\n";
    return 2;
  }
  std::cout << "wrote " << runs.size() << " run(s) to " << cfg.out_dir << "\n";
  return 0;
}

// ---- compare ----------------------------------------------------------------

std::vector<double> index_series(std::size_t n, double stride = 1.0) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i) * stride;
  return xs;
}

void append_compare_rows(std::vector<fgdqn::CompareRow>& rows, const std::string& alg,
                         const fgdqn::AggregateStats& agg, long stride = 1) {
  for (std::size_t i = 0; i < agg.mean.size(); ++i) {
    rows.push_back({static_cast<long>(i) * stride, alg, agg.mean[i],
                    agg.mean[i] - agg.ci_half[i], agg.mean[i] + agg.ci_half[i]});
  }
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& algorithms) {
  fgdqn::RunConfig base = resolve_config(args);
  if (base.seeds.size() < 2) {
    std::cerr << "compare: need at least two seeds per algorithm\n";
    return 1;
  }
  fs::create_directories(base.out_dir);

  struct AlgSeries {
    std::string name;
    std::vector<std::vector<double>> loss, hamming, reward;
  };
  std::vector<AlgSeries> all;
  bool any_diverged = false;

  for (const std::string& alg : algorithms) {
    fgdqn::RunConfig cfg = base;
    cfg.algorithm = fgdqn::algorithm_from_string(alg);
    cfg.out_dir = base.out_dir + "/" + alg;
    fs::create_directories(cfg.out_dir);
    const std::vector<SeedRun> runs = run_all_seeds(cfg, args.parallel);

    AlgSeries series;
    series.name = alg;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      fgdqn::write_run_csv(cfg.out_dir + "/run_" + std::to_string(cfg.seeds[i]) + ".csv",
                           runs[i].metrics);
      any_diverged = any_diverged || runs[i].metrics.diverged;
      series.loss.push_back(fgdqn::running_mean(runs[i].metrics.dqn_bellman_error));
      if (!runs[i].metrics.hamming_distance.empty())
        series.hamming.push_back(runs[i].metrics.hamming_distance);
      if (!runs[i].metrics.episode_reward.empty())
        series.reward.push_back(fgdqn::moving_average(runs[i].metrics.episode_reward, 100));
    }
    all.push_back(std::move(series));
  }

  // loss curves (all environments)
  {
    std::vector<fgdqn::CompareRow> rows;
    fgdqn::LinePlotSvg plot("Running average Bellman error", "iteration", "loss");
    for (const auto& s : all) {
      const fgdqn::AggregateStats agg = fgdqn::aggregate_runs(s.loss);
      append_compare_rows(rows, s.name, agg);
      plot.add_series(s.name, index_series(agg.mean.size()), agg.mean);
      std::vector<double> lo(agg.mean.size()), hi(agg.mean.size());
      for (std::size_t i = 0; i < agg.mean.size(); ++i) {
        lo[i] = agg.mean[i] - agg.ci_half[i];
        hi[i] = agg.mean[i] + agg.ci_half[i];
      }
      plot.add_band(std::move(lo), std::move(hi));
    }
    fgdqn::write_compare_csv(base.out_dir + "/compare_loss.csv", rows);
    plot.write(base.out_dir + "/loss.svg");
  }

  if (!all.front().hamming.empty()) {
    std::vector<fgdqn::CompareRow> rows;
    fgdqn::LinePlotSvg plot("Average Hamming distance to the optimal policy", "iteration",
                            "Hamming distance");
    const int stride = 50;
    for (const auto& s : all) {
      const fgdqn::AggregateStats agg = fgdqn::aggregate_runs(s.hamming);
      append_compare_rows(rows, s.name, agg);
      const std::vector<double> sub = fgdqn::hamming_subsample(agg.mean, stride);
      std::vector<double> lo(agg.mean.size()), hi(agg.mean.size());
      for (std::size_t i = 0; i < agg.mean.size(); ++i) {
        lo[i] = agg.mean[i] - agg.ci_half[i];
        hi[i] = agg.mean[i] + agg.ci_half[i];
      }
      plot.add_series(s.name, index_series(sub.size(), stride), sub);
      plot.add_band(fgdqn::hamming_subsample(lo, stride), fgdqn::hamming_subsample(hi, stride));
    }
    fgdqn::write_compare_csv(base.out_dir + "/compare_hamming.csv", rows);
    plot.write(base.out_dir + "/hamming.svg");
  }

  if (!all.front().reward.empty()) {
    std::vector<fgdqn::CompareRow> rows;
    fgdqn::LinePlotSvg plot("Moving-average episode reward (window 100)", "episode", "reward");
    for (const auto& s : all) {
      const fgdqn::AggregateStats agg = fgdqn::aggregate_runs(s.reward);
      append_compare_rows(rows, s.name, agg);
      plot.add_series(s.name, index_series(agg.mean.size()), agg.mean);
      std::vector<double> lo(agg.mean.size()), hi(agg.mean.size());
      for (std::size_t i = 0; i < agg.mean.size(); ++i) {
        lo[i] = agg.mean[i] - agg.ci_half[i];
        hi[i] = agg.mean[i] + agg.ci_half[i];
      }
      plot.add_band(std::move(lo), std::move(hi));
    }
    fgdqn::write_compare_csv(base.out_dir + "/compare_reward.csv", rows);
    plot.write(base.out_dir + "/reward.svg");
  }

  if (any_diverged) {
    std::cerr << "compare: at least one run diverged\n";
    return 2;
  }
  std::cout << "comparison written to " << base.out_dir << "\n";
  return 0;
}

// ---- gradcheck ----------------------------------------------------------------

int cmd_gradcheck(int probes, std::uint64_t seed, double net_tol, double full_tol) {
  const fgdqn::GradCheckReport report = fgdqn::run_gradcheck(probes, seed);
  std::cout << "gradient check over " << report.probes << " probes\n";
  std::cout << "  network gradients vs central differences: max rel error = "
            << report.max_rel_error_network << " (tol " << net_tol << ")\n";
  std::cout << "  full-gradient direction vs d(0.5*delta^2): max rel error = "
            << report.max_rel_error_full_gradient << " (tol " << full_tol << ")\n";
  std::cout << "  worst coordinate per layer (network suite):\n";
  for (const auto& w : report.per_layer) {
    std::cout << "    layer " << w.layer << ": flat index " << w.flat_index
              << ", analytic " << w.analytic << ", numeric " << w.numeric << ", rel "
              << w.rel_error << "\n";
  }
  if (!report.passed(net_tol, full_tol)) {
    std::cerr << "gradcheck: tolerance exceeded\n";
    return 2;
  }
  std::cout << "gradcheck: ok\n";
  return 0;
}

// ---- eval ---------------------------------------------------------------------

int cmd_eval(const CommonArgs& args, const std::string& checkpoint_path, int episodes) {
  const fgdqn::RunConfig cfg = resolve_config(args);
  fgdqn::QNetwork net = fgdqn::load_checkpoint(checkpoint_path);
  if (cfg.environment == "forest") {
    const fgdqn::TabularMdp mdp = fgdqn::forest_build_mdp(cfg.forest_params());
    fgdqn::OneHotPairEncoder enc{mdp.num_states, mdp.num_actions};
    fgdqn::QFunction<fgdqn::OneHotPairEncoder> qf(std::move(net), enc);
    const fgdqn::DeterministicPolicy pi = fgdqn::greedy_policy_of_net(qf, mdp.num_states);
    const fgdqn::DeterministicPolicy pi_star = fgdqn::policy_iteration(mdp).policy;
    std::cout << "greedy policy: " << fgdqn::policy_to_json(pi).dump() << "\n";
    std::cout << "hamming distance to optimal: " << fgdqn::hamming_distance(pi, pi_star) << "\n";
  } else {
    fgdqn::CartPoleEncoder enc;
    fgdqn::QFunction<fgdqn::CartPoleEncoder> qf(std::move(net), enc);
    const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();
    fgdqn::CartPoleEnv env(cfg.cartpole, fgdqn::split_seed(seed, 2));
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
      fgdqn::CartPoleState x = env.reset();
      double reward = 0.0;
      for (;;) {
        const auto sr = env.step(qf.argmax(x).index);
        reward += sr.reward;
        x = sr.next_state;
        if (sr.terminal) break;
      }
      std::cout << "episode " << ep << ": reward " << reward << "\n";
      total += reward;
    }
    std::cout << "mean greedy reward over " << episodes << " episodes: " << total / episodes
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bellman-error minimization benchmarks: exact solvers, DQN variants and the "
               "full-gradient learner"};
  app.require_subcommand(1);

  CommonArgs solve_args, train_args, compare_args, eval_args;
  std::vector<std::string> compare_algorithms = {"dqn", "fgdqn"};
  std::string checkpoint_path;
  int eval_episodes = 10;
  int gc_probes = 50;
  std::uint64_t gc_seed = 7;
  double gc_net_tol = 1e-5;
  double gc_full_tol = 1e-4;

  CLI::App* solve = app.add_subcommand("solve", "exact policy for a tabular environment");
  attach_common(solve, solve_args);

  CLI::App* train = app.add_subcommand("train", "train one algorithm over a seed list");
  attach_common(train, train_args);

  CLI::App* compare = app.add_subcommand("compare", "train several algorithms and aggregate");
  attach_common(compare, compare_args);
  compare->add_option("--algorithms", compare_algorithms, "algorithms to compare")->delimiter(',');

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient validation");
  gradcheck->add_option("--probes", gc_probes, "random probes per suite");
  gradcheck->add_option("--seed", gc_seed, "probe RNG seed");
  gradcheck->add_option("--net-tol", gc_net_tol, "tolerance for network gradients");
  gradcheck->add_option("--full-tol", gc_full_tol, "tolerance for the update direction");

  CLI::App* eval = app.add_subcommand("eval", "inspect a trained checkpoint");
  attach_common(eval, eval_args);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint JSON file")->required();
  eval->add_option("--episodes", eval_episodes, "greedy rollout episodes (cartpole)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (train->parsed()) return cmd_train(train_args);
    if (compare->parsed()) return cmd_compare(compare_args, compare_algorithms);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_probes, gc_seed, gc_net_tol, gc_full_tol);
    if (eval->parsed()) return cmd_eval(eval_args, checkpoint_path, eval_episodes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
