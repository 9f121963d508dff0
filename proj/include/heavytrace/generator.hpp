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

#ifndef HEAVYTRACE_GENERATOR_HPP
#define HEAVYTRACE_GENERATOR_HPP

// Synthetic arrivals: N independent renewal streams whose inter-arrival
// times follow the truncated Pareto density
//
//   p(x) = k x^(-1-k) / C,   a <= x <= b,   C = a^-k - b^-k,
//
// plus an optional i.i.d. request-size model with CCDF
// (1 + s / s_star)^-(gamma - 1). Sizes are independent of the arrival
// times; they exist so that the thresholding pipeline can be exercised on
// synthetic traces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytrace/ingest.hpp"
#include "heavytrace/random.hpp"

namespace heavytrace {

inline constexpr double kSecondsPerYear = 365.0 * 86400.0;

/// Truncated Pareto law on [a, b] with tail exponent k. a == b is accepted
/// as a point mass at a.
struct ParetoLaw {
  double k = 0.3;
  double a = 2.5;
  double b = 2.524e8;  // 8 years of 365.25 d

  void validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("pareto: k must be > 0");
    if (!(a >= 1.0)) throw std::invalid_argument("pareto: a must be >= 1");
    if (!(b >= a) || !std::isfinite(b)) throw std::invalid_argument("pareto: need a <= b < inf");
  }
};

/// Inverse CDF: x = (a^-k - u (a^-k - b^-k))^(-1/k). u = 0 gives a and
/// u = 1 gives b exactly.
inline double pareto_inverse_cdf(double u, const ParetoLaw& law) {
  law.validate();
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("pareto_inverse_cdf: u outside [0, 1]");
  if (u == 0.0 || law.a == law.b) return law.a;
  if (u == 1.0) return law.b;
  const double ak = std::pow(law.a, -law.k);
  const double bk = std::pow(law.b, -law.k);
  const double x = std::pow(ak - u * (ak - bk), -1.0 / law.k);
  return std::clamp(x, law.a, law.b);
}

inline double pareto_cdf(double x, const ParetoLaw& law) {
  law.validate();
  if (law.a == law.b) return x < law.a ? 0.0 : 1.0;
  if (x <= law.a) return 0.0;
  if (x >= law.b) return 1.0;
  const double ak = std::pow(law.a, -law.k);
  const double bk = std::pow(law.b, -law.k);
  return (ak - std::pow(x, -law.k)) / (ak - bk);
}

/// Mean of the truncated Pareto law.
///
///   k != 1:  (k / (1 - k)) (b^(1-k) - a^(1-k)) / (a^-k - b^-k)
///   k == 1:  ln(b / a) / (a^-1 - b^-1)
///
/// Differences are formed with expm1 so that b -> a stays accurate.
inline double pareto_mean(const ParetoLaw& law) {
  law.validate();
  const double k = law.k;
  const double a = law.a;
  if (law.a == law.b) return a;
  const double log_ratio = std::log(law.b / a);
  const double c = -std::pow(a, -k) * std::expm1(-k * log_ratio);  // a^-k - b^-k
  if (k == 1.0) return log_ratio / c;
  const double diff = std::pow(a, 1.0 - k) * std::expm1((1.0 - k) * log_ratio);
  return k / (1.0 - k) * diff / c;
}

/// Request-size law with CCDF (1 + s / s_star)^-(gamma_minus_1).
struct SizeModel {
  double s_star = 7.9e5;
  double gamma_minus_1 = 0.76;

  void validate() const {
    if (!(s_star > 0.0) || !std::isfinite(s_star))
      throw std::invalid_argument("size model: s_star must be > 0");
    if (!(gamma_minus_1 > 0.0) || !std::isfinite(gamma_minus_1))
      throw std::invalid_argument("size model: gamma_minus_1 must be > 0");
  }
};

inline double q_exponential_ccdf(double s, const SizeModel& m) {
  return s <= 0.0 ? 1.0 : std::pow(1.0 + s / m.s_star, -m.gamma_minus_1);
}

/// s = s_star (u^(-1 / (gamma - 1)) - 1) for u in (0, 1], rounded to whole
/// bytes. Saturates at the largest Bytes value.
inline Bytes sample_q_exponential_size(double u, const SizeModel& m) {
  m.validate();
  if (!(u > 0.0 && u <= 1.0))
    throw std::invalid_argument("sample_q_exponential_size: u must be in (0, 1]");
  const double s = m.s_star * std::expm1(-std::log(u) / m.gamma_minus_1);
  constexpr double kMax = 18446744073709549568.0;  // largest double below 2^64
  if (!(s < kMax)) return std::numeric_limits<Bytes>::max();
  return static_cast<Bytes>(std::round(s));
}

/// Substream id reserved for size attachment.
inline constexpr std::uint64_t kSizeSubstream = 0x5123'0000'0000'0001ULL;

/// Replaces every size by an i.i.d. draw from `model`; timestamps, users and
/// printers are untouched.
inline EventLog attach_sizes(const EventLog& log, const SizeModel& model, std::uint64_t seed) {
  model.validate();
  auto eng = make_substream(seed, kSizeSubstream);
  std::vector<PrintEvent> events = log.events();
  for (auto& e : events) e.size = sample_q_exponential_size(uniform01_open_low(eng), model);
  return EventLog(std::move(events));
}

struct GeneratorConfig {
  std::uint64_t n_streams = 1000;
  double k = 0.3;
  double a = 2.5;                        // seconds
  double b = 2.524e8;                    // seconds, 8 years of 365.25 d
  double warmup = 5.0 * kSecondsPerYear; // seconds discarded
  double horizon = kSecondsPerYear;      // seconds recorded
  std::uint64_t seed = 1;
  std::optional<SizeModel> size_model;

  ParetoLaw law() const { return {k, a, b}; }

  void validate() const {
    if (n_streams < 1) throw std::invalid_argument("generator: n_streams must be >= 1");
    law().validate();
    if (!(warmup >= 0.0) || !std::isfinite(warmup))
      throw std::invalid_argument("generator: warmup must be >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("generator: horizon must be > 0");
    if (size_model) size_model->validate();
  }
};

/// Per-stream scheduling state.
struct StreamState {
  std::uint64_t stream_id = 0;
  double next_arrival = 0.0;  // absolute seconds since simulation start
  Engine rng;
};

struct Arrival {
  double time = 0.0;  // seconds since the end of warm-up
  std::uint64_t stream = 0;
};

/// Event-driven sweep over all streams in time order. Every stream starts
/// at t = 0 with a first arrival one Pareto draw away; each arrival
/// schedules the next one with a fresh draw. Arrivals in
/// [warmup, warmup + horizon) are returned, shifted so warm-up ends at 0.
/// Equal times are ordered by stream id.
inline std::vector<Arrival> simulate_arrivals(const GeneratorConfig& config) {
  config.validate();
  const ParetoLaw law = config.law();
  const double end = config.warmup + config.horizon;

  std::vector<StreamState> streams;
  streams.reserve(config.n_streams);
  for (std::uint64_t id = 0; id < config.n_streams; ++id) {
    StreamState s{id, 0.0, make_substream(config.seed, id)};
    s.next_arrival = pareto_inverse_cdf(uniform01(s.rng), law);
    streams.push_back(std::move(s));
  }

  auto later = [&](std::size_t lhs, std::size_t rhs) {
    const auto& l = streams[lhs];
    const auto& r = streams[rhs];
    return l.next_arrival != r.next_arrival ? l.next_arrival > r.next_arrival
                                            : l.stream_id > r.stream_id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> queue(later);
  for (std::size_t i = 0; i < streams.size(); ++i) queue.push(i);

  std::vector<Arrival> out;
  while (!queue.empty()) {
    const std::size_t i = queue.top();
    queue.pop();
    auto& s = streams[i];
    if (s.next_arrival >= end) continue;  // stream finished
    if (s.next_arrival >= config.warmup)
      out.push_back({s.next_arrival - config.warmup, s.stream_id});
    s.next_arrival += pareto_inverse_cdf(uniform01(s.rng), law);
    queue.push(i);
  }
  return out;
}

/// Simulated trace at one-second resolution. user is the stream id, printer
/// is "simulated", size is 0 unless config.size_model is set.
inline EventLog simulate(const GeneratorConfig& config) {
  const auto arrivals = simulate_arrivals(config);
  std::vector<PrintEvent> events;
  events.reserve(arrivals.size());
  for (const auto& a : arrivals)
    events.push_back({static_cast<Seconds>(std::floor(a.time)), std::to_string(a.stream), 0,
                      "simulated"});
  EventLog log(std::move(events));
  if (config.size_model) return attach_sizes(log, *config.size_model, config.seed);
  return log;
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_GENERATOR_HPP
