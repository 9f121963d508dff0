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

#ifndef HEAVYTRACE_CLI_HPP
#define HEAVYTRACE_CLI_HPP

// Batch commands behind the `heavytrace` executable. Each command reads a
// trace, writes CSV/JSON artifacts and finishes with a manifest.json that
// lists them. Exit codes: 0 success, 1 malformed or unreadable input,
// 2 insufficient data or invalid parameters.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "heavytrace/distributions.hpp"
#include "heavytrace/error.hpp"
#include "heavytrace/estimators.hpp"
#include "heavytrace/generator.hpp"
#include "heavytrace/ingest.hpp"
#include "heavytrace/io.hpp"
#include "heavytrace/signal.hpp"

namespace heavytrace::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kBadInput = 1, kInsufficient = 2 };

/// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace fs = std::filesystem;

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Record of one command run; written last, after every output it lists.
class RunManifest {
 public:
  RunManifest(std::string command, fs::path manifest_path)
      : command_(std::move(command)), path_(std::move(manifest_path)) {}

  void set_param(const std::string& key, const std::string& value) { params_[key] = value; }
  void set_input_digest(std::string digest) { input_digest_ = std::move(digest); }

  /// Writes `content` to `path` and records it.
  void write_output(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
    outputs_.push_back(path.string());
  }

  const std::vector<std::string>& outputs() const noexcept { return outputs_; }

  void finish() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");

    json params = json::object();
    for (const auto& [k, v] : params_) params[k] = v;
    json j = {{"command", command_},
              {"parameters", params},
              {"input_digest", input_digest_ ? json(*input_digest_) : json(nullptr)},
              {"tool_version", kToolVersion},
              {"outputs", outputs_},
              {"created_at", ts.str()}};
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path_.string() + "'");
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path path_;
  std::map<std::string, std::string> params_;
  std::optional<std::string> input_digest_;
  std::vector<std::string> outputs_;
};

// -- argument helpers ----------------------------------------------------------

/// "0,1e4,1e5,1e6" -> {0, 10000, 100000, 1000000}. Each entry must be a
/// non-negative whole number of bytes.
inline std::vector<Bytes> parse_thresholds(const std::string& text) {
  std::vector<Bytes> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v) || v < 0.0 || v != std::floor(v) ||
        v >= 1.8e19)
      throw std::invalid_argument("invalid threshold '" + item + "'");
    out.push_back(static_cast<Bytes>(v));
  }
  if (out.empty()) throw std::invalid_argument("empty threshold list");
  return out;
}

/// "1048576" or "2^20".
inline std::size_t parse_segment_length(const std::string& text) {
  std::size_t value = 0;
  if (text.rfind("2^", 0) == 0) {
    unsigned exponent = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + 2, text.data() + text.size(), exponent);
    if (ec != std::errc{} || ptr != text.data() + text.size() || exponent > 40)
      throw std::invalid_argument("invalid segment length '" + text + "'");
    value = std::size_t{1} << exponent;
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw std::invalid_argument("invalid segment length '" + text + "'");
  }
  if (!detail::is_power_of_two(value) || value < 2)
    throw std::invalid_argument("segment length must be a power of two, got '" + text + "'");
  return value;
}

inline std::string threshold_tag(Bytes s) { return "S" + std::to_string(s); }

inline EventLog load_trace(const fs::path& path, std::string* digest) {
  const std::string bytes = read_file(path);
  if (digest) *digest = "sha256:" + sha256_hex(bytes);
  std::istringstream in(bytes);
  return parse_log(in);
}

inline void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

template <class Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const ParseError& e) {
    err << "error: parse: " << e.what() << '\n';
    return kBadInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const InsufficientDataError& e) {
    err << "error: insufficient data: " << e.what() << '\n';
    return kInsufficient;
  } catch (const FitError& e) {
    err << "error: fit: " << e.what() << '\n';
    return kInsufficient;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid parameter: " << e.what() << '\n';
    return kInsufficient;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

// -- analyze -----------------------------------------------------------------

struct AnalyzeOptions {
  fs::path input;
  std::optional<std::string> printer;
  std::string thresholds = "0,1e4,1e5,1e6";
  double bin_ratio = 1.2;
  double t_min = 1.0;
  std::size_t bootstrap = 0;  // resamples for q-exponential errors; 0 = Gauss-Newton
  std::uint64_t bootstrap_seed = 1;
  fs::path out;
};

/// Per-threshold densities, rate table, trace summary, size CCDF and the
/// modified power-law fit of the CCDF.
inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto thresholds = parse_thresholds(opt.thresholds);
    std::string digest;
    EventLog log = load_trace(opt.input, &digest);
    if (opt.printer) {
      EventFilter f;
      f.printer = opt.printer;
      f.min_size.reset();
      log = filter_events(log, f);
    }
    prepare_out_dir(opt.out);

    std::vector<IntervalSet> sets;
    for (Bytes s : thresholds) sets.push_back(thresholded_intervals(log, s));

    RunManifest manifest("analyze", opt.out / "manifest.json");
    manifest.set_input_digest(digest);
    manifest.set_param("input", opt.input.string());
    manifest.set_param("printer", opt.printer.value_or(""));
    manifest.set_param("thresholds", opt.thresholds);
    manifest.set_param("bin_ratio", format_double(opt.bin_ratio));
    manifest.set_param("t_min", format_double(opt.t_min));
    manifest.set_param("bootstrap", std::to_string(opt.bootstrap));

    manifest.write_output(opt.out / "summary.json", to_json(summarize(log)).dump(2) + "\n");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      std::ostringstream csv;
      write_density_csv(csv, log_binned_density(sets[i], opt.bin_ratio, opt.t_min));
      manifest.write_output(opt.out / ("density_" + threshold_tag(thresholds[i]) + ".csv"), csv.str());
    }
    json rates = to_json(rate_table(log, thresholds));
    manifest.write_output(opt.out / "rates.json", rates.dump(2) + "\n");

    const auto ccdf = size_ccdf(log);
    std::ostringstream ccdf_csv;
    write_ccdf_csv(ccdf_csv, ccdf);
    manifest.write_output(opt.out / "ccdf.csv", ccdf_csv.str());
    try {
      QExpFit fit;
      if (opt.bootstrap > 0) {
        std::vector<Bytes> sizes;
        for (const auto& e : log) sizes.push_back(e.size);
        fit = fit_q_exponential_bootstrap(sizes, opt.bootstrap, opt.bootstrap_seed);
      } else {
        fit = fit_q_exponential(ccdf);
      }
      manifest.write_output(opt.out / "qexp_fit.json", to_json(fit).dump(2) + "\n");
    } catch (const Error& e) {
      err << "warning: size CCDF not fitted: " << e.what() << '\n';
    }
    manifest.finish();
  });
}

// -- collapse ----------------------------------------------------------------

struct CollapseOptions {
  fs::path input;
  std::string thresholds = "0,1e4,1e5,1e6";
  double bin_ratio = 1.2;
  double t_min = 1.0;
  std::size_t min_count = 20;
  fs::path out;
};

/// Densities rescaled by R(S), their collapse score and a log-normal fit of
/// the pooled rescaled intervals.
inline int cmd_collapse(const CollapseOptions& opt, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto thresholds = parse_thresholds(opt.thresholds);
    if (thresholds.size() < 2) throw std::invalid_argument("collapse needs at least 2 thresholds");
    std::string digest;
    const EventLog log = load_trace(opt.input, &digest);
    prepare_out_dir(opt.out);

    std::vector<LogBinnedDensity> curves;
    std::vector<double> pooled;
    json per_threshold = json::array();
    for (Bytes s : thresholds) {
      const auto set = thresholded_intervals(log, s);
      const auto rate = event_rate(log, s);
      curves.push_back(rescale_density(log_binned_density(set, opt.bin_ratio, opt.t_min), rate.rate));
      for (double t : set.intervals) pooled.push_back(t * rate.rate);
      per_threshold.push_back(to_json(rate));
    }
    const auto score = collapse_score(curves, opt.min_count);
    const auto lognormal = fit_lognormal(pooled);

    RunManifest manifest("collapse", opt.out / "manifest.json");
    manifest.set_input_digest(digest);
    manifest.set_param("input", opt.input.string());
    manifest.set_param("thresholds", opt.thresholds);
    manifest.set_param("bin_ratio", format_double(opt.bin_ratio));
    manifest.set_param("t_min", format_double(opt.t_min));
    manifest.set_param("min_count", std::to_string(opt.min_count));

    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      std::ostringstream csv;
      write_density_csv(csv, curves[i]);
      manifest.write_output(opt.out / ("rescaled_" + threshold_tag(thresholds[i]) + ".csv"), csv.str());
    }
    json report = {{"thresholds", thresholds},
                   {"score", score.score},
                   {"common_support", {score.support_lo, score.support_hi}},
                   {"n_common_bins", score.n_common_bins},
                   {"min_count", opt.min_count},
                   {"rates", per_threshold}};
    manifest.write_output(opt.out / "collapse.json", report.dump(2) + "\n");
    manifest.write_output(opt.out / "lognormal_fit.json", to_json(lognormal).dump(2) + "\n");
    manifest.finish();
  });
}

// -- user-stats --------------------------------------------------------------

struct UserStatsOptions {
  fs::path input;
  std::size_t min_requests = 4;
  std::optional<std::string> user;
  std::size_t max_lag = 1000;
  std::optional<std::uint64_t> shuffle_seed;
  double bin_ratio = 1.2;
  double t_min = 1.0;
  double fit_lo = 60.0;
  double fit_hi = 86400.0;
  std::size_t min_count = 20;
  fs::path out;
};

/// Pooled per-user interval density and its power-law slope, plus the lag
/// autocorrelation of one user's intervals (the busiest by default) and an
/// optional shuffled control.
inline int cmd_user_stats(const UserStatsOptions& opt, std::ostream& err) {
  return run_guarded(err, [&] {
    std::string digest;
    const EventLog log = load_trace(opt.input, &digest);
    const auto pooled = per_user_intervals(log, opt.min_requests);
    const std::string user = opt.user.value_or(busiest_user(log));
    const auto mine = user_intervals(log, user);  // throws naming the user if absent
    prepare_out_dir(opt.out);

    RunManifest manifest("user-stats", opt.out / "manifest.json");
    manifest.set_input_digest(digest);
    manifest.set_param("input", opt.input.string());
    manifest.set_param("min_requests", std::to_string(opt.min_requests));
    manifest.set_param("user", opt.user.value_or(""));
    manifest.set_param("max_lag", std::to_string(opt.max_lag));
    manifest.set_param("shuffle_seed", opt.shuffle_seed ? std::to_string(*opt.shuffle_seed) : "");
    manifest.set_param("bin_ratio", format_double(opt.bin_ratio));
    manifest.set_param("fit_lo", format_double(opt.fit_lo));
    manifest.set_param("fit_hi", format_double(opt.fit_hi));

    const auto density = log_binned_density(pooled, opt.bin_ratio, opt.t_min);
    std::ostringstream dcsv;
    write_density_csv(dcsv, density);
    manifest.write_output(opt.out / "user_density.csv", dcsv.str());

    json summary = {{"n_qualifying_users", user_timelines(log, opt.min_requests).size()},
                    {"n_intervals", pooled.size()},
                    {"n_dropped_zero", pooled.n_dropped_zero},
                    {"user", user}};
    std::size_t user_events = 0;
    Seconds first = 0;
    Seconds last = 0;
    for (const auto& e : log) {
      if (e.user != user) continue;
      if (user_events++ == 0) first = e.timestamp;
      last = e.timestamp;
    }
    summary["user_requests"] = user_events;
    summary["user_rate"] = last > first ? json(static_cast<double>(user_events) /
                                               static_cast<double>(last - first))
                                        : json(nullptr);
    try {
      summary["pooled_slope"] = to_json(fit_density_slope(density, {opt.fit_lo, opt.fit_hi}, opt.min_count));
    } catch (const InsufficientDataError& e) {
      err << "warning: pooled slope not fitted: " << e.what() << '\n';
      summary["pooled_slope"] = nullptr;
    }
    manifest.write_output(opt.out / "user_stats.json", summary.dump(2) + "\n");

    if (mine.size() < 2)
      throw InsufficientDataError("user '" + user + "' has fewer than 2 positive intervals");
    const std::size_t lag = std::min(opt.max_lag, mine.size() - 1);
    const auto ac = autocorrelation(mine, lag);
    std::ostringstream acsv;
    write_autocorrelation_csv(acsv, ac);
    manifest.write_output(opt.out / "autocorrelation.csv", acsv.str());

    json sidecar = {{"user", user},
                    {"n", ac.n},
                    {"max_lag", lag},
                    {"max_lag_requested", opt.max_lag},
                    {"lag_clamped", lag != opt.max_lag},
                    {"noise_band", 3.0 * ac.values[0] / std::sqrt(static_cast<double>(ac.n))},
                    {"shuffle_seed", opt.shuffle_seed ? json(*opt.shuffle_seed) : json(nullptr)}};
    {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t tau = 1; tau <= lag; ++tau)
        if (ac.values[tau] > 0.0) {
          x.push_back(static_cast<double>(tau));
          y.push_back(ac.values[tau]);
        }
      try {
        sidecar["decay_fit"] = to_json(fit_slope(x, y, {1.0, static_cast<double>(lag)}));
      } catch (const InsufficientDataError&) {
        sidecar["decay_fit"] = nullptr;
      }
    }
    if (opt.shuffle_seed) {
      const auto shuffled = autocorrelation(shuffle_intervals(mine, *opt.shuffle_seed), lag);
      std::ostringstream scsv;
      write_autocorrelation_csv(scsv, shuffled);
      manifest.write_output(opt.out / "autocorrelation_shuffled.csv", scsv.str());
      const double band = 3.0 * shuffled.values[0] / std::sqrt(static_cast<double>(shuffled.n));
      std::size_t inside = 0;
      for (std::size_t tau = 1; tau <= lag; ++tau)
        if (std::abs(shuffled.values[tau]) < band) ++inside;
      sidecar["shuffled_fraction_in_band"] = static_cast<double>(inside) / static_cast<double>(lag);
    }
    manifest.write_output(opt.out / "autocorrelation.json", sidecar.dump(2) + "\n");
    manifest.finish();
  });
}

// -- spectrum ----------------------------------------------------------------

struct SpectrumOptions {
  fs::path input;
  std::string segment = "2^20";
  std::size_t bins_per_decade = 10;
  double fit_lo = 1e-6;
  double fit_hi = 1e-3;
  fs::path out;
};

/// Segmented power spectrum of the counts-per-second series and its slope
/// over [fit_lo, fit_hi].
inline int cmd_spectrum(const SpectrumOptions& opt, std::ostream& err) {
  return run_guarded(err, [&] {
    const std::size_t segment = parse_segment_length(opt.segment);
    std::string digest;
    const EventLog log = load_trace(opt.input, &digest);
    const auto series = counts_per_second(log);
    const auto ps = power_spectrum(series, segment, opt.bins_per_decade);
    const auto fit = fit_slope(ps.freqs, ps.power, {opt.fit_lo, opt.fit_hi});
    prepare_out_dir(opt.out);

    RunManifest manifest("spectrum", opt.out / "manifest.json");
    manifest.set_input_digest(digest);
    manifest.set_param("input", opt.input.string());
    manifest.set_param("segment", std::to_string(segment));
    manifest.set_param("bins_per_decade", std::to_string(opt.bins_per_decade));
    manifest.set_param("fit_lo", format_double(opt.fit_lo));
    manifest.set_param("fit_hi", format_double(opt.fit_hi));

    std::ostringstream csv;
    write_spectrum_csv(csv, ps);
    manifest.write_output(opt.out / "spectrum.csv", csv.str());
    json sidecar = {{"segment_length", ps.segment_length},
                    {"n_segments", ps.n_segments},
                    {"bins_per_decade", ps.bins_per_decade},
                    {"series_length", series.length()},
                    {"fit_band", {opt.fit_lo, opt.fit_hi}},
                    {"fit", to_json(fit)}};
    manifest.write_output(opt.out / "spectrum.json", sidecar.dump(2) + "\n");
    manifest.finish();
  });
}

// -- generate ----------------------------------------------------------------

struct GenerateOptions {
  GeneratorConfig config;
  fs::path out;
};

/// Writes a simulated trace to opt.out and its manifest next to it
/// (<out>.manifest.json). Requires a < b and k > 0.
inline int cmd_generate(const GenerateOptions& opt, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto& c = opt.config;
    if (!(c.k > 0.0)) throw std::invalid_argument("k must be > 0");
    if (!(c.a < c.b)) throw std::invalid_argument("a must be smaller than b");
    const EventLog log = simulate(c);

    if (opt.out.has_parent_path()) prepare_out_dir(opt.out.parent_path());
    RunManifest manifest("generate", fs::path(opt.out.string() + ".manifest.json"));
    const json cfg = to_json(c);
    for (const auto& [k, v] : cfg.items()) manifest.set_param(k, v.dump());
    std::ostringstream csv;
    serialize_log(csv, log);
    manifest.write_output(opt.out, csv.str());
    manifest.finish();
  });
}

}  // namespace heavytrace::cli

#endif  // HEAVYTRACE_CLI_HPP
