// Copyright 2026 The ncl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>

#include <gtest/gtest.h>

#include "ncl/commands.hpp"
#include "ncl/config.hpp"

namespace ncl {
namespace {

TEST(Config, DefaultsAreValid) {
  const auto cfg = parse_config_string("");
  EXPECT_DOUBLE_EQ(cfg.test.a0, 0.74);
  EXPECT_FALSE(cfg.execution.seed.has_value());
  EXPECT_THROW(cfg.seed(), InvalidArgument);
}

TEST(Config, ParsesAllSections) {
  const auto cfg = parse_config_string(R"(
; comment
[test]
a0 = 0.8
alpha = 55 deg
beta = 5/12 pi
state_angle = 0.1 rad
[source]
kind = poissonian
mu = 0.3
background_prob = 0.01
[chain]
tau = 0.2
misalignment_sigma = 1 deg
accidental_rate_per_ns = 1e-3
[execution]
seed = 12
gates_per_setting = 2e6
blocks = 20
threads = 2
[optimize]
a0_min = 0.5
beta_max = 90 deg
d_min_floor = 0.01
grid_points = 7
[output]
dir = out/run1
)");
  EXPECT_DOUBLE_EQ(cfg.test.a0, 0.8);
  EXPECT_DOUBLE_EQ(cfg.test.alpha, degrees(55.0));
  EXPECT_DOUBLE_EQ(cfg.test.beta, 5.0 / 12.0 * kPi);
  EXPECT_DOUBLE_EQ(cfg.state_angle, 0.1);
  EXPECT_EQ(cfg.chain.source.kind, SourceKind::poissonian);
  EXPECT_DOUBLE_EQ(cfg.chain.source.mu, 0.3);
  EXPECT_DOUBLE_EQ(cfg.chain.misalignment_sigma, degrees(1.0));
  EXPECT_EQ(cfg.seed(), 12u);
  EXPECT_EQ(cfg.execution.gates_per_setting, 2'000'000u);
  EXPECT_EQ(cfg.execution.blocks, 20);
  EXPECT_EQ(cfg.execution.threads, 2u);
  EXPECT_DOUBLE_EQ(cfg.optimize.bounds.a0.lo, 0.5);
  EXPECT_DOUBLE_EQ(cfg.optimize.bounds.beta.hi, kPi / 2);
  EXPECT_EQ(cfg.optimize.grid_points, 7);
  EXPECT_EQ(cfg.output_dir, "out/run1");
}

TEST(Config, RejectsUnknownOrInvalidEntries) {
  for (const char* bad : {"[tset]\na0 = 1\n", "[test]\nA0 = 1\n", "a0 = 1\n", "[test]\na0 = abc\n",
                          "[test]\na0 = -1\n", "[test]\np1 = 1.5\n", "[source]\nkind = laser\n",
                          "[source]\nbackground_prob = 0.1\n", "[chain]\ntau = 2\n", "[chain]\npeak_lo_ns = 9.3\n",
                          "[execution]\nblocks = 0\n", "[execution]\nblocks = 2.5\n", "[execution]\nseed = -3\n",
                          "[execution]\ngates_per_setting = 0\n", "[optimize]\nd_min_floor = 0\n",
                          "[test]\nalpha = 1/0 pi\n", "[test\n"}) {
    EXPECT_THROW(parse_config_string(bad), InvalidArgument) << bad;
  }
  EXPECT_THROW(load_config("/nonexistent.ini"), InvalidArgument);
}

TEST(Config, BundledFilesLoad) {
  for (const char* name : {"paper.ini", "paper_like.ini", "characterize_ideal.ini", "characterize_poissonian.ini"}) {
    EXPECT_NO_THROW(load_config(std::string(NCL_DATA_DIR) + "/" + name)) << name;
  }
}

TEST(Commands, PredictReport) {
  const auto out = cmd_predict(parse_config_string(""));
  const auto& q = out.report["prediction"];
  EXPECT_NEAR(q["diff_first"].get<double>(), 0.0685, 5e-5);
  EXPECT_NEAR(q["diff_second"].get<double>(), -0.0449, 5e-5);
  EXPECT_NEAR(q["d_minus"].get<double>(), 0.0189, 5e-5);
  EXPECT_TRUE(q["violates"].get<bool>());
  EXPECT_NEAR(out.report["parameters"]["p2"].get<double>(), 16.0 / 17.0, 1e-15);
  const auto table = render_table(out.report);
  EXPECT_NE(table.find("-0.044901"), std::string::npos);
  const auto csv = render_csv(out.report);
  EXPECT_EQ(csv.rfind("quantity,value,sigma_stat,sigma_total,qm_prediction\n", 0), 0u);
}

TEST(Commands, PredictNonViolatingCase) {
  const auto out = cmd_predict(parse_config_string("[test]\na0 = 1\nb0 = 1\np1 = 1\nalpha = 0.3\nbeta = 0.3\n"));
  EXPECT_NEAR(out.report["prediction"]["diff_second"].get<double>(), 0.0, 1e-15);
  EXPECT_FALSE(out.report["prediction"]["violates"].get<bool>());
}

TEST(Commands, PredictWithOptimizer) {
  const auto out = cmd_predict(parse_config_string("[optimize]\ngrid_points = 12\n"), true);
  EXPECT_GE(out.report["optimization"]["violation"].get<double>(), 0.0449);
  EXPECT_GE(out.report["optimization"]["prediction"]["d_minus"].get<double>(), 0.0189);
}

TEST(Commands, OptimizeInfeasible) {
  EXPECT_THROW(cmd_optimize(parse_config_string("[optimize]\nd_min_floor = 5\ngrid_points = 4\n")), InfeasibleError);
}

TEST(Commands, LrtSummary) {
  const auto out = cmd_lrt(counterexample_model(TestParameters::paper()));
  EXPECT_EQ(out.report["dominance"]["summary"].get<std::string>(), "dominance violated on (0.066987, 0.328990]");
  EXPECT_TRUE(out.report["theorem_check"].get<bool>());
}

TEST(Commands, SimulateIsDeterministic) {
  const auto cfg = parse_config_string(
      "[chain]\nmisalignment_sigma = 2.5 deg\nswitch_bias_sigma = 0.01\n"
      "[execution]\nseed = 5\ngates_per_setting = 20000\nblocks = 4\nmisalignment_draws = 50\n"
      "characterize_gates = 20000\n");
  const auto a = cmd_simulate(cfg);
  auto cfg_threads = cfg;
  cfg_threads.execution.threads = 3;
  const auto b = cmd_simulate(cfg_threads);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.files, b.files);
  EXPECT_TRUE(a.files.contains("counts.json"));
  EXPECT_TRUE(a.files.contains("histogram_beta_p2_arm_II.csv"));
  EXPECT_EQ(a.files.at("histogram_alpha_p1_arm_I.csv").rfind("bin_start_ns,count\n0,", 0), 0u);
  EXPECT_NE(render_table(a.report).find("violation significance"), std::string::npos);
}

TEST(Commands, CharacterizeIdealSource) {
  const auto out = cmd_characterize(load_config(std::string(NCL_DATA_DIR) + "/characterize_ideal.ini"));
  const auto& g2 = out.report["metrics"]["gamma2"];
  EXPECT_LE(g2["value"].get<double>(), 4 * g2["sigma_stat"].get<double>());
  EXPECT_TRUE(out.files.contains("histogram_arm_I.csv"));
  EXPECT_THROW(cmd_characterize(parse_config_string("")), InvalidArgument);
}

}  // namespace
}  // namespace ncl
