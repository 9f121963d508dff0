/*
 * Copyright (c) The heavytrace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "heavytrace/cli.hpp"

namespace heavytrace::cli {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "heavytrace_cli_tests" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write_trace(const EventLog& log, const std::string& name = "trace.csv") {
    std::ofstream out(dir_ / name);
    serialize_log(out, log);
    return dir_ / name;
  }

  static EventLog sample_log() {
    GeneratorConfig c;
    c.n_streams = 300;
    c.k = 0.5;
    c.a = 1.0;
    c.b = 1e5;
    c.warmup = 1e5;
    c.horizon = 2e5;
    c.seed = 9;
    c.size_model = SizeModel{};
    return simulate(c);
  }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  static void expect_manifest_lists(const fs::path& manifest, const std::vector<std::string>& names,
                                    const fs::path& dir) {
    ASSERT_TRUE(fs::exists(manifest));
    const auto m = read_json(manifest);
    std::vector<std::string> outputs = m["outputs"];
    for (const auto& n : names) {
      const auto full = (dir / n).string();
      EXPECT_NE(std::find(outputs.begin(), outputs.end(), full), outputs.end()) << n;
      EXPECT_TRUE(fs::exists(full)) << n;
    }
    for (const auto& key : {"command", "parameters", "input_digest", "tool_version", "outputs", "created_at"})
      EXPECT_TRUE(m.contains(key)) << key;
  }

  fs::path dir_;
  std::ostringstream err_;
};

TEST_F(CliTest, AnalyzeWritesContract) {
  AnalyzeOptions opt;
  opt.input = write_trace(sample_log());
  opt.out = dir_ / "out";
  ASSERT_EQ(cmd_analyze(opt, err_), kOk) << err_.str();
  expect_manifest_lists(opt.out / "manifest.json",
                        {"summary.json", "density_S0.csv", "density_S10000.csv", "density_S100000.csv",
                         "density_S1000000.csv", "rates.json", "ccdf.csv", "qexp_fit.json"},
                        opt.out);
  const auto m = read_json(opt.out / "manifest.json");
  EXPECT_EQ(m["command"], "analyze");
  EXPECT_EQ(m["input_digest"], "sha256:" + sha256_hex(read_file(opt.input)));

  std::ifstream density(opt.out / "density_S0.csv");
  std::string header;
  std::getline(density, header);
  EXPECT_EQ(header, "bin_left,bin_right,bin_center_geometric,count,density");
  const auto fit = read_json(opt.out / "qexp_fit.json");
  EXPECT_EQ(fit["model"], "q_exponential");
}

TEST_F(CliTest, AnalyzeRerunIsIdentical) {
  AnalyzeOptions opt;
  opt.input = write_trace(sample_log());
  opt.out = dir_ / "a";
  ASSERT_EQ(cmd_analyze(opt, err_), kOk);
  opt.out = dir_ / "b";
  ASSERT_EQ(cmd_analyze(opt, err_), kOk);
  for (const auto* name : {"summary.json", "density_S0.csv", "rates.json", "ccdf.csv", "qexp_fit.json"})
    EXPECT_EQ(read_file(dir_ / "a" / name), read_file(dir_ / "b" / name)) << name;
}

TEST_F(CliTest, ThresholdAboveAllSizesIsInsufficient) {
  AnalyzeOptions opt;
  opt.input = write_trace(sample_log());
  opt.thresholds = "0,1e19";
  opt.out = dir_ / "out";
  EXPECT_EQ(cmd_analyze(opt, err_), kInsufficient);
  EXPECT_NE(err_.str().find("10000000000000000000"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MalformedInputIsBadInput) {
  std::ofstream(dir_ / "bad.csv") << "timestamp,user,size,printer\n1,u,5,p\nabc,u,5,p\n";
  AnalyzeOptions opt;
  opt.input = dir_ / "bad.csv";
  opt.out = dir_ / "out";
  EXPECT_EQ(cmd_analyze(opt, err_), kBadInput);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos) << err_.str();
  opt.input = dir_ / "missing.csv";
  EXPECT_EQ(cmd_analyze(opt, err_), kBadInput);
  std::ofstream(dir_ / "empty.csv") << "timestamp,user,size,printer\n";
  opt.input = dir_ / "empty.csv";
  EXPECT_EQ(cmd_analyze(opt, err_), kInsufficient);
}

TEST_F(CliTest, CollapseWritesContract) {
  CollapseOptions opt;
  opt.input = write_trace(sample_log());
  opt.thresholds = "0,1e5,1e6";
  opt.out = dir_ / "out";
  ASSERT_EQ(cmd_collapse(opt, err_), kOk) << err_.str();
  expect_manifest_lists(opt.out / "manifest.json",
                        {"rescaled_S0.csv", "rescaled_S100000.csv", "rescaled_S1000000.csv",
                         "collapse.json", "lognormal_fit.json"},
                        opt.out);
  const auto c = read_json(opt.out / "collapse.json");
  EXPECT_GE(c["score"].get<double>(), 0.0);
  EXPECT_EQ(c["min_count"], 20);
  EXPECT_EQ(read_json(opt.out / "lognormal_fit.json")["model"], "lognormal");
}

TEST_F(CliTest, UserStatsShuffleOnlyWithSeed) {
  UserStatsOptions opt;
  opt.input = write_trace(sample_log());
  opt.max_lag = 50;
  opt.out = dir_ / "plain";
  ASSERT_EQ(cmd_user_stats(opt, err_), kOk) << err_.str();
  expect_manifest_lists(opt.out / "manifest.json",
                        {"user_density.csv", "user_stats.json", "autocorrelation.csv", "autocorrelation.json"},
                        opt.out);
  EXPECT_FALSE(fs::exists(opt.out / "autocorrelation_shuffled.csv"));

  opt.shuffle_seed = 4;
  opt.out = dir_ / "shuffled";
  ASSERT_EQ(cmd_user_stats(opt, err_), kOk) << err_.str();
  EXPECT_TRUE(fs::exists(opt.out / "autocorrelation_shuffled.csv"));
  const auto side = read_json(opt.out / "autocorrelation.json");
  EXPECT_TRUE(side.contains("shuffled_fraction_in_band"));
  EXPECT_EQ(read_file(dir_ / "plain" / "autocorrelation.csv"), read_file(opt.out / "autocorrelation.csv"));
}

TEST_F(CliTest, UserStatsUnknownUser) {
  UserStatsOptions opt;
  opt.input = write_trace(sample_log());
  opt.user = "nobody";
  opt.out = dir_ / "out";
  EXPECT_EQ(cmd_user_stats(opt, err_), kInsufficient);
  EXPECT_NE(err_.str().find("nobody"), std::string::npos);
}

TEST_F(CliTest, UserStatsClampsLag) {
  UserStatsOptions opt;
  opt.input = write_trace(sample_log());
  opt.max_lag = 100000000;
  opt.out = dir_ / "out";
  ASSERT_EQ(cmd_user_stats(opt, err_), kOk) << err_.str();
  const auto side = read_json(opt.out / "autocorrelation.json");
  EXPECT_TRUE(side["lag_clamped"].get<bool>());
  EXPECT_EQ(side["max_lag"].get<std::size_t>() + 1, side["n"].get<std::size_t>());
}

TEST_F(CliTest, SpectrumWritesContract) {
  SpectrumOptions opt;
  opt.input = write_trace(sample_log());
  opt.segment = "2^14";
  opt.fit_lo = 1e-4;
  opt.fit_hi = 1e-1;
  opt.out = dir_ / "out";
  ASSERT_EQ(cmd_spectrum(opt, err_), kOk) << err_.str();
  expect_manifest_lists(opt.out / "manifest.json", {"spectrum.csv", "spectrum.json"}, opt.out);
  opt.segment = "2^30";
  opt.out = dir_ / "too_long";
  EXPECT_EQ(cmd_spectrum(opt, err_), kInsufficient);
  opt.segment = "1000";
  EXPECT_EQ(cmd_spectrum(opt, err_), kInsufficient);
}

TEST_F(CliTest, GenerateRejectsDegenerateCutoffs) {
  GenerateOptions opt;
  opt.config.a = opt.config.b = 10.0;
  opt.out = dir_ / "trace.csv";
  EXPECT_EQ(cmd_generate(opt, err_), kInsufficient);
  EXPECT_FALSE(fs::exists(opt.out));
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(HEAVYTRACE_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, ToolGenerateIsDeterministic) {
  const std::string common = "generate --streams 50 --k 0.5 --a 1 --b 1e4 --warmup-years 0.001 --years 0.001 --seed 7";
  ASSERT_EQ(run_tool(common + " --out " + (dir_ / "a.csv").string()), 0);
  ASSERT_EQ(run_tool(common + " --out " + (dir_ / "b.csv").string()), 0);
  EXPECT_EQ(read_file(dir_ / "a.csv"), read_file(dir_ / "b.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a.csv.manifest.json"));
  std::istringstream in(read_file(dir_ / "a.csv"));
  EXPECT_GT(parse_log(in).size(), 100u);
}

TEST_F(CliTest, ToolExitCodes) {
  EXPECT_EQ(run_tool("generate --a 10 --b 5 --out " + (dir_ / "x.csv").string()), 2);
  EXPECT_EQ(run_tool("generate --k 0 --out " + (dir_ / "x.csv").string()), 2);
  EXPECT_EQ(run_tool("analyze --input " + (dir_ / "missing.csv").string() + " --out " + dir_.string()), 1);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  EXPECT_EQ(run_tool("--help"), 0);
}

}  // namespace
}  // namespace heavytrace::cli
