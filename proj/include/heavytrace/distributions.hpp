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

#ifndef HEAVYTRACE_DISTRIBUTIONS_HPP
#define HEAVYTRACE_DISTRIBUTIONS_HPP

// Inter-arrival interval sets, log-binned densities, the size CCDF, event
// rates and the rescaling used for scaling-collapse analysis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytrace/error.hpp"
#include "heavytrace/ingest.hpp"

namespace heavytrace {

enum class IntervalSource { threshold, user, concatenated_users, simulated };

/// Positive inter-arrival durations in seconds (or any unit after
/// rescaling). Zero-length gaps are removed and counted in n_dropped_zero.
struct IntervalSet {
  std::vector<double> intervals;
  IntervalSource source = IntervalSource::simulated;
  std::optional<Bytes> threshold;  // set for IntervalSource::threshold
  std::optional<std::string> user; // set for IntervalSource::user
  std::size_t n_dropped_zero = 0;

  std::size_t size() const noexcept { return intervals.size(); }
  bool empty() const noexcept { return intervals.empty(); }
};

namespace detail {

inline void append_gaps(const std::vector<Seconds>& times, IntervalSet& out) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    const Seconds gap = times[i] - times[i - 1];
    if (gap > 0)
      out.intervals.push_back(static_cast<double>(gap));
    else
      ++out.n_dropped_zero;
  }
}

}  // namespace detail

/// Gaps between consecutive events with size > threshold.
inline IntervalSet thresholded_intervals(const EventLog& log, Bytes threshold) {
  std::vector<Seconds> times;
  for (const auto& e : log)
    if (e.size > threshold) times.push_back(e.timestamp);
  if (times.size() < 2)
    throw InsufficientDataError("threshold " + std::to_string(threshold) + ": " +
                                std::to_string(times.size()) +
                                " qualifying events, need at least 2");
  IntervalSet out;
  out.source = IntervalSource::threshold;
  out.threshold = threshold;
  detail::append_gaps(times, out);
  return out;
}

/// Timestamps of every user with at least `min_requests` events.
inline std::map<std::string, std::vector<Seconds>> user_timelines(const EventLog& log,
                                                                  std::size_t min_requests) {
  std::map<std::string, std::vector<Seconds>> by_user;
  for (const auto& e : log) by_user[e.user].push_back(e.timestamp);
  std::erase_if(by_user, [&](const auto& kv) { return kv.second.size() < min_requests; });
  return by_user;
}

/// Per-user gaps concatenated over all users with >= min_requests events,
/// in user-name order. Never differences across users.
inline IntervalSet per_user_intervals(const EventLog& log, std::size_t min_requests = 4) {
  const auto timelines = user_timelines(log, min_requests);
  if (timelines.empty())
    throw InsufficientDataError("no user has at least " + std::to_string(min_requests) +
                                " requests");
  IntervalSet out;
  out.source = IntervalSource::concatenated_users;
  for (const auto& [user, times] : timelines) detail::append_gaps(times, out);
  return out;
}

/// Gaps of a single user.
inline IntervalSet user_intervals(const EventLog& log, const std::string& user) {
  std::vector<Seconds> times;
  for (const auto& e : log)
    if (e.user == user) times.push_back(e.timestamp);
  if (times.empty()) throw InsufficientDataError("user '" + user + "' not found in trace");
  if (times.size() < 2)
    throw InsufficientDataError("user '" + user + "' has fewer than 2 requests");
  IntervalSet out;
  out.source = IntervalSource::user;
  out.user = user;
  detail::append_gaps(times, out);
  return out;
}

/// User with the most requests; ties go to the smallest name.
inline std::string busiest_user(const EventLog& log) {
  if (log.empty()) throw InsufficientDataError("busiest_user: empty log");
  const auto counts = requests_per_user(log);
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

/// Histogram on geometric bins edges[j] = edges[0] * bin_ratio^j with
/// densities count / (total * width), so that sum(density * width) == 1.
struct LogBinnedDensity {
  std::vector<double> bin_edges;   // size = counts.size() + 1
  std::vector<double> densities;
  std::vector<std::size_t> counts;
  double bin_ratio = 1.2;
  std::size_t total = 0;    // samples inside the binned range
  std::size_t n_below = 0;  // samples below bin_edges[0], not binned

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t j) const { return bin_edges[j + 1] - bin_edges[j]; }
  double geometric_center(std::size_t j) const {
    return std::sqrt(bin_edges[j] * bin_edges[j + 1]);
  }
  double integral() const {
    double s = 0.0;
    for (std::size_t j = 0; j < bins(); ++j) s += densities[j] * width(j);
    return s;
  }
};

/// Log-binned density of `set` on bins starting at t_min and growing by
/// bin_ratio until the largest interval is covered. Empty bins carry 0.
inline LogBinnedDensity log_binned_density(const IntervalSet& set, double bin_ratio = 1.2,
                                           double t_min = 1.0) {
  if (!(bin_ratio > 1.0)) throw std::invalid_argument("log_binned_density: bin_ratio must be > 1");
  if (!(t_min > 0.0)) throw std::invalid_argument("log_binned_density: t_min must be > 0");
  if (set.empty()) throw InsufficientDataError("log_binned_density: empty interval set");

  const double max_value = *std::max_element(set.intervals.begin(), set.intervals.end());
  if (max_value < t_min)
    throw InsufficientDataError("log_binned_density: every interval is below t_min");

  LogBinnedDensity d;
  d.bin_ratio = bin_ratio;
  const double log_ratio = std::log(bin_ratio);
  auto edge = [&](std::size_t j) { return t_min * std::pow(bin_ratio, static_cast<double>(j)); };

  std::size_t n_bins = static_cast<std::size_t>(std::floor(std::log(max_value / t_min) / log_ratio)) + 1;
  while (edge(n_bins) <= max_value) ++n_bins;
  while (n_bins > 1 && edge(n_bins - 1) > max_value) --n_bins;

  d.bin_edges.resize(n_bins + 1);
  for (std::size_t j = 0; j <= n_bins; ++j) d.bin_edges[j] = edge(j);
  d.counts.assign(n_bins, 0);

  for (double x : set.intervals) {
    if (x < t_min) {
      ++d.n_below;
      continue;
    }
    auto j = static_cast<std::size_t>(std::floor(std::log(x / t_min) / log_ratio));
    // guard against rounding at bin boundaries
    if (j >= n_bins) j = n_bins - 1;
    while (j > 0 && x < d.bin_edges[j]) --j;
    while (j + 1 < n_bins && x >= d.bin_edges[j + 1]) ++j;
    ++d.counts[j];
    ++d.total;
  }

  d.densities.resize(n_bins);
  for (std::size_t j = 0; j < n_bins; ++j)
    d.densities[j] = static_cast<double>(d.counts[j]) /
                     (static_cast<double>(d.total) * d.width(j));
  return d;
}

/// Rescaling x -> x * rate, density -> density / rate. The integral is
/// unchanged.
inline LogBinnedDensity rescale_density(const LogBinnedDensity& d, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("rescale_density: rate must be > 0");
  LogBinnedDensity out = d;
  for (auto& e : out.bin_edges) e *= rate;
  for (auto& v : out.densities) v /= rate;
  return out;
}

struct CcdfPoint {
  Bytes size = 0;
  std::size_t n_gt = 0;  // events with size strictly greater than `size`

  friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

/// Complementary cumulative count N(>S) at every distinct observed size.
struct SizeCCDF {
  std::vector<CcdfPoint> points;  // ascending in size
  std::size_t total = 0;          // N(>0)
  std::size_t n_events = 0;

  /// N(>s) for an arbitrary s.
  std::size_t n_greater(double s) const {
    auto it = std::upper_bound(points.begin(), points.end(), s, [](double v, const CcdfPoint& p) {
      return v < static_cast<double>(p.size);
    });
    return it == points.begin() ? n_events : std::prev(it)->n_gt;
  }
};

/// CCDF of raw sizes.
inline SizeCCDF size_ccdf(std::span<const Bytes> raw) {
  if (raw.empty()) throw InsufficientDataError("size_ccdf: no sizes");
  std::vector<Bytes> sizes(raw.begin(), raw.end());
  std::sort(sizes.begin(), sizes.end());

  SizeCCDF c;
  const std::size_t n = sizes.size();
  c.n_events = n;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sizes[j] == sizes[i]) ++j;
    c.points.push_back({sizes[i], n - j});
    i = j;
  }
  c.total = static_cast<std::size_t>(
      std::count_if(sizes.begin(), sizes.end(), [](Bytes s) { return s > 0; }));
  return c;
}

inline SizeCCDF size_ccdf(const EventLog& log) {
  if (log.empty()) throw InsufficientDataError("size_ccdf: empty log");
  std::vector<Bytes> sizes;
  sizes.reserve(log.size());
  for (const auto& e : log) sizes.push_back(e.size);
  return size_ccdf(sizes);
}

/// R(S) = N(>S) / T over the full log span, and its inverse <t>_S.
struct RateEntry {
  Bytes threshold = 0;
  std::size_t n_gt = 0;
  double span = 0.0;           // seconds
  double rate = 0.0;           // events per second
  double mean_interval = 0.0;  // seconds
};

inline RateEntry event_rate(const EventLog& log, Bytes threshold) {
  const Seconds span = log.span();
  if (span <= 0) throw InsufficientDataError("event_rate: log span is zero");
  const auto n = static_cast<std::size_t>(std::count_if(
      log.begin(), log.end(), [&](const PrintEvent& e) { return e.size > threshold; }));
  if (n == 0)
    throw InsufficientDataError("event_rate: no events larger than " + std::to_string(threshold));
  RateEntry r;
  r.threshold = threshold;
  r.n_gt = n;
  r.span = static_cast<double>(span);
  r.rate = static_cast<double>(n) / r.span;
  r.mean_interval = 1.0 / r.rate;
  return r;
}

using RateTable = std::vector<RateEntry>;

inline RateTable rate_table(const EventLog& log, std::vector<Bytes> thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  RateTable table;
  for (Bytes s : thresholds) table.push_back(event_rate(log, s));
  return table;
}

struct CollapseScore {
  double score = 0.0;
  double support_lo = 0.0;  // first and last common grid point
  double support_hi = 0.0;
  std::size_t n_common_bins = 0;
};

/// Quantifies how well rescaled densities fall on one curve.
///
/// The curves are sampled on the grid x_j = r^(j + 1/2), r the smallest
/// bin ratio among them. A grid point is common when it falls inside a bin
/// with at least `min_count` counts in every curve. At each common point the
/// natural-log densities L_c give (max L - min L) / |mean L|; the score is
/// the median over common points. Zero means perfect collapse. The result
/// does not depend on the order of `curves`.
inline CollapseScore collapse_score(const std::vector<LogBinnedDensity>& curves,
                                    std::size_t min_count = 20) {
  if (curves.size() < 2) throw std::invalid_argument("collapse_score: need at least 2 curves");
  double ratio = curves.front().bin_ratio;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    if (c.bins() == 0) throw InsufficientDataError("collapse_score: empty curve");
    ratio = std::min(ratio, c.bin_ratio);
    lo = std::max(lo, c.bin_edges.front());
    hi = std::min(hi, c.bin_edges.back());
  }
  if (!(ratio > 1.0)) throw std::invalid_argument("collapse_score: bin ratio must be > 1");
  if (!(lo < hi)) throw InsufficientDataError("collapse_score: curves have no common support");

  const double log_r = std::log(ratio);
  const auto j_lo = static_cast<long long>(std::floor(std::log(lo) / log_r - 0.5));
  const auto j_hi = static_cast<long long>(std::ceil(std::log(hi) / log_r - 0.5));

  CollapseScore result;
  std::vector<double> spreads;
  std::vector<double> logs(curves.size());
  for (long long j = j_lo; j <= j_hi; ++j) {
    const double x = std::exp((static_cast<double>(j) + 0.5) * log_r);
    if (x < lo || x >= hi) continue;
    bool ok = true;
    for (std::size_t c = 0; c < curves.size() && ok; ++c) {
      const auto& e = curves[c].bin_edges;
      const auto it = std::upper_bound(e.begin(), e.end(), x);
      const auto bin = static_cast<std::size_t>(it - e.begin()) - 1;
      if (bin >= curves[c].bins() || curves[c].counts[bin] < min_count) {
        ok = false;
      } else {
        logs[c] = std::log(curves[c].densities[bin]);
      }
    }
    if (!ok) continue;
    std::vector<double> sorted = logs;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    const double mean = sum / static_cast<double>(sorted.size());
    const double spread = sorted.back() - sorted.front();
    spreads.push_back(spread == 0.0 ? 0.0 : spread / std::abs(mean));
    if (result.n_common_bins == 0) result.support_lo = x;
    result.support_hi = x;
    ++result.n_common_bins;
  }
  if (spreads.empty())
    throw InsufficientDataError("collapse_score: no common bin has at least " +
                                std::to_string(min_count) + " counts in every curve");

  std::sort(spreads.begin(), spreads.end());
  const std::size_t n = spreads.size();
  result.score = n % 2 == 1 ? spreads[n / 2] : 0.5 * (spreads[n / 2 - 1] + spreads[n / 2]);
  return result;
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_DISTRIBUTIONS_HPP
