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

// heavytrace: workload characterization and synthetic arrival generation.
//
//   heavytrace analyze    --input trace.csv --out DIR
//   heavytrace collapse   --input trace.csv --out DIR
//   heavytrace user-stats --input trace.csv --out DIR
//   heavytrace spectrum   --input trace.csv --out DIR
//   heavytrace generate   --seed 7 --out trace.csv

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "heavytrace/cli.hpp"

namespace cli = heavytrace::cli;

namespace {

heavytrace::SizeModel parse_size_model(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("--sizes expects 's_star,gamma_minus_1', got '" + text + "'");
  heavytrace::SizeModel m;
  m.s_star = std::stod(text.substr(0, comma));
  m.gamma_minus_1 = std::stod(text.substr(comma + 1));
  m.validate();
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed request trace analysis and synthetic arrival generation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  cli::AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Thresholded interval densities, rates, summary, size CCDF fit");
  a->add_option("--input", analyze.input, "Trace CSV (timestamp,user,size,printer)")->required();
  a->add_option("--printer", analyze.printer, "Keep only this printer");
  a->add_option("--thresholds", analyze.thresholds, "Size thresholds in bytes")->capture_default_str();
  a->add_option("--bin-ratio", analyze.bin_ratio, "Geometric bin ratio")->capture_default_str();
  a->add_option("--t-min", analyze.t_min, "First bin edge in seconds")->capture_default_str();
  a->add_option("--bootstrap", analyze.bootstrap, "Bootstrap resamples for CCDF fit errors (0 = off)")
      ->capture_default_str();
  a->add_option("--bootstrap-seed", analyze.bootstrap_seed, "Seed for bootstrap resampling")
      ->capture_default_str();
  a->add_option("--out", analyze.out, "Output directory")->required();

  cli::CollapseOptions collapse;
  auto* c = app.add_subcommand("collapse", "Rate-rescaled densities, collapse score, log-normal fit");
  c->add_option("--input", collapse.input, "Trace CSV")->required();
  c->add_option("--thresholds", collapse.thresholds, "Size thresholds in bytes")->capture_default_str();
  c->add_option("--bin-ratio", collapse.bin_ratio, "Geometric bin ratio")->capture_default_str();
  c->add_option("--t-min", collapse.t_min, "First bin edge in seconds")->capture_default_str();
  c->add_option("--min-count", collapse.min_count, "Minimum bin count for scoring")->capture_default_str();
  c->add_option("--out", collapse.out, "Output directory")->required();

  cli::UserStatsOptions users;
  std::uint64_t shuffle_seed = 0;
  auto* u = app.add_subcommand("user-stats", "Per-user intervals, power-law slope, autocorrelation");
  u->add_option("--input", users.input, "Trace CSV")->required();
  u->add_option("--min-requests", users.min_requests, "Users need at least this many requests")
      ->capture_default_str();
  u->add_option("--user", users.user, "User for the autocorrelation (default: busiest)");
  u->add_option("--max-lag", users.max_lag, "Largest autocorrelation lag")->capture_default_str();
  auto* seed_opt = u->add_option("--shuffle-seed", shuffle_seed, "Emit a shuffled control with this seed");
  u->add_option("--bin-ratio", users.bin_ratio, "Geometric bin ratio")->capture_default_str();
  u->add_option("--fit-lo", users.fit_lo, "Slope fit lower bound (s)")->capture_default_str();
  u->add_option("--fit-hi", users.fit_hi, "Slope fit upper bound (s)")->capture_default_str();
  u->add_option("--out", users.out, "Output directory")->required();

  cli::SpectrumOptions spectrum;
  auto* s = app.add_subcommand("spectrum", "Power spectrum of the counts-per-second series");
  s->add_option("--input", spectrum.input, "Trace CSV")->required();
  s->add_option("--segment", spectrum.segment, "Segment length (power of two, e.g. 2^20)")
      ->capture_default_str();
  s->add_option("--bins-per-decade", spectrum.bins_per_decade, "Frequency bins per decade")
      ->capture_default_str();
  s->add_option("--fit-lo", spectrum.fit_lo, "Slope fit lower frequency (Hz)")->capture_default_str();
  s->add_option("--fit-hi", spectrum.fit_hi, "Slope fit upper frequency (Hz)")->capture_default_str();
  s->add_option("--out", spectrum.out, "Output directory")->required();

  cli::GenerateOptions generate;
  heavytrace::GeneratorConfig defaults;
  std::uint64_t streams = defaults.n_streams;
  double k = defaults.k;
  double lo = defaults.a;
  double hi = defaults.b;
  double warmup_years = defaults.warmup / heavytrace::kSecondsPerYear;
  double years = defaults.horizon / heavytrace::kSecondsPerYear;
  std::uint64_t seed = defaults.seed;
  std::string sizes;
  std::string config_path;
  auto* g = app.add_subcommand("generate", "Simulate N truncated-Pareto renewal streams");
  auto* o_config = g->add_option("--config", config_path, "JSON config (keys as GeneratorConfig)");
  auto* o_streams = g->add_option("--streams", streams, "Number of streams")->capture_default_str();
  auto* o_k = g->add_option("--k", k, "Tail exponent")->capture_default_str();
  auto* o_a = g->add_option("--a", lo, "Lower cutoff (s)")->capture_default_str();
  auto* o_b = g->add_option("--b", hi, "Upper cutoff (s)")->capture_default_str();
  auto* o_warm = g->add_option("--warmup-years", warmup_years, "Discarded warm-up (years of 365 d)")
                     ->capture_default_str();
  auto* o_years = g->add_option("--years", years, "Recorded horizon (years of 365 d)")->capture_default_str();
  auto* o_seed = g->add_option("--seed", seed, "Master seed")->capture_default_str();
  auto* o_sizes = g->add_option("--sizes", sizes, "Attach q-exponential sizes: s_star,gamma_minus_1");
  g->add_option("--out", generate.out, "Output trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInsufficient;
  }

  if (*a) return cli::cmd_analyze(analyze, std::cerr);
  if (*c) return cli::cmd_collapse(collapse, std::cerr);
  if (*u) {
    if (*seed_opt) users.shuffle_seed = shuffle_seed;
    return cli::cmd_user_stats(users, std::cerr);
  }
  if (*s) return cli::cmd_spectrum(spectrum, std::cerr);
  if (*g) {
    // Config file first, then any explicitly given flag on top.
    auto& cfg = generate.config;
    try {
      if (*o_config) {
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "error: cannot read '" << config_path << "'\n";
          return cli::kBadInput;
        }
        cfg = heavytrace::generator_config_from_json(heavytrace::json::parse(in));
      }
      if (!*o_config || *o_streams) cfg.n_streams = streams;
      if (!*o_config || *o_k) cfg.k = k;
      if (!*o_config || *o_a) cfg.a = lo;
      if (!*o_config || *o_b) cfg.b = hi;
      if (!*o_config || *o_warm) cfg.warmup = warmup_years * heavytrace::kSecondsPerYear;
      if (!*o_config || *o_years) cfg.horizon = years * heavytrace::kSecondsPerYear;
      if (!*o_config || *o_seed) cfg.seed = seed;
      if (*o_sizes) cfg.size_model = parse_size_model(sizes);
    } catch (const heavytrace::json::exception& e) {
      std::cerr << "error: config: " << e.what() << '\n';
      return cli::kBadInput;
    } catch (const std::exception& e) {
      std::cerr << "error: invalid parameter: " << e.what() << '\n';
      return cli::kInsufficient;
    }
    return cli::cmd_generate(generate, std::cerr);
  }
  return cli::kInsufficient;
}
