#include "fgdqn/config.hpp"
#include "fgdqn/io.hpp"
#include "fgdqn/svg.hpp"

#include "fgdqn/envs.hpp"
#include "fgdqn/trainers.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <random>
#include <string>

using namespace fgdqn;
using nlohmann::json;

namespace {

TEST(MdpJsonTest, RoundTripPreservesEverything) {
  const TabularMdp m = forest_build_mdp({10, 0.05, 0.8});
  const TabularMdp back = mdp_from_json(mdp_to_json(m));
  EXPECT_EQ(back.num_states, m.num_states);
  EXPECT_EQ(back.num_actions, m.num_actions);
  EXPECT_EQ(back.discount, m.discount);
  EXPECT_EQ(back.transition, m.transition);
  EXPECT_EQ(back.reward, m.reward);
}

TEST(MdpJsonTest, SchemaKeys) {
  const json j = mdp_to_json(forest_build_mdp({4, 0.1, 0.9}));
  for (const char* key : {"num_states", "num_actions", "transition", "reward", "discount"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["transition"].size(), 4u);
  EXPECT_EQ(j["transition"][0].size(), 2u);
  EXPECT_EQ(j["transition"][0][0].size(), 4u);
}

TEST(CheckpointTest, RoundTripIsExact) {
  MlpTopology t;
  t.input_dim = 12;
  t.hidden_dims = {16, 8};
  t.output_dim = 2;
  t.activation = Activation::gelu;
  std::mt19937_64 rng(81);
  const QNetwork net = init_params(t, rng);
  const QNetwork back = checkpoint_from_json(checkpoint_to_json(net));
  EXPECT_EQ(back.topology(), net.topology());
  for (long i = 0; i < net.param_count(); ++i) EXPECT_EQ(back.params()[i], net.params()[i]);
}

TEST(ConfigTest, JsonRoundTripIsIdentity) {
  for (const RunConfig& cfg : {default_forest_config(), default_cartpole_config()}) {
    const json j = config_to_json(cfg);
    const RunConfig back = config_from_json(j);
    EXPECT_EQ(config_to_json(back).dump(), j.dump());
  }
}

TEST(ConfigTest, OverridesReachNestedKeys) {
  json j = config_to_json(default_forest_config());
  apply_override(j, "environment.fire_prob=0.01");
  apply_override(j, "discount=0.95");
  apply_override(j, "schedule.kind=constant");
  apply_override(j, "seeds=[3,4,5]");
  apply_override(j, "algorithm=dqn");
  const RunConfig cfg = config_from_json(j);
  EXPECT_DOUBLE_EQ(cfg.forest_fire_prob, 0.01);
  EXPECT_DOUBLE_EQ(cfg.discount, 0.95);
  EXPECT_EQ(cfg.schedule.kind, ScheduleKind::constant);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(cfg.algorithm, Algorithm::dqn);
  EXPECT_THROW(apply_override(j, "novalue"), std::invalid_argument);
}

TEST(ConfigTest, ValidationRejectsNonsense) {
  RunConfig cfg = default_forest_config();
  cfg.environment = "gridworld";
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = default_forest_config();
  cfg.epsilon = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = default_forest_config();
  cfg.seeds.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_NO_THROW(default_cartpole_config().validate());
}

TEST(ConfigTest, HashIsStableAndSensitive) {
  const RunConfig a = default_forest_config();
  RunConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.discount = 0.95;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunCsvTest, HeaderOnlyForZeroBudget) {
  RunMetrics m;
  m.kind = RunKind::off_policy;
  EXPECT_EQ(run_csv_text(m), "iter,dqn_bellman_error,true_bellman_error,hamming_distance\n");
  m.kind = RunKind::on_policy;
  EXPECT_EQ(run_csv_text(m),
            "episode,episode_reward,episode_length,episode_discounted_reward,"
            "episode_mean_bellman_error\n");
}

TEST(RunCsvTest, RowsAndDeterminism) {
  RunMetrics m;
  m.kind = RunKind::off_policy;
  m.dqn_bellman_error = {1.5, 0.25};
  m.true_bellman_error = {1.0, 0.5};
  m.hamming_distance = {3, 1};
  const std::string text = run_csv_text(m);
  EXPECT_EQ(text,
            "iter,dqn_bellman_error,true_bellman_error,hamming_distance\n"
            "0,1.5,1,3\n"
            "1,0.25,0.5,1\n");
  EXPECT_EQ(run_csv_text(m), text);
}

TEST(CompareCsvTest, Schema) {
  const std::string path = ::testing::TempDir() + "/compare.csv";
  write_compare_csv(path, {{0, "dqn", 1.0, 0.5, 1.5}, {0, "fgdqn", 0.5, 0.25, 0.75}});
  const std::string text = read_text_file(path);
  EXPECT_EQ(text.rfind("iter,alg,mean,ci_low,ci_high\n", 0), 0u);
  EXPECT_NE(text.find("0,dqn,1,0.5,1.5\n"), std::string::npos);
  std::remove(path.c_str());
}

TEST(SvgTest, OnePolylinePerSeries) {
  LinePlotSvg plot("demo", "x", "y");
  plot.add_series("dqn", {0, 1, 2}, {3, 2, 1});
  plot.add_series("fgdqn", {0, 1, 2}, {1, 1, 0.5});
  plot.add_band({0.9, 0.9, 0.4}, {1.1, 1.1, 0.6});
  const std::string svg = plot.render();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    ++polylines;
  EXPECT_EQ(polylines, 2u);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);  // the band
}

TEST(FormatDoubleTest, ExactRoundTrip) {
  for (double v : {1.0 / 3.0, 1e-20, 123456.789, 0.0, -2.5e300}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
