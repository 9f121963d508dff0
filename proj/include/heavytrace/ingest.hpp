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

#ifndef HEAVYTRACE_INGEST_HPP
#define HEAVYTRACE_INGEST_HPP

// Request traces: the canonical CSV format, filtering and summary
// statistics.
//
// Trace format (UTF-8, '\n' line endings, header mandatory):
//
//   timestamp,user,size,printer
//   1041379200,alice,183402,chrome
//
// timestamp is integer Unix seconds, size is integer bytes. user and
// printer are free text without commas; user must be nonempty.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heavytrace/error.hpp"

namespace heavytrace {

using Seconds = std::int64_t;
using Bytes = std::uint64_t;

inline constexpr std::string_view kTraceHeader = "timestamp,user,size,printer";

struct PrintEvent {
  Seconds timestamp = 0;
  std::string user;
  Bytes size = 0;
  std::string printer;

  friend bool operator==(const PrintEvent&, const PrintEvent&) = default;
};

/// Events sorted by timestamp. Ties keep insertion order.
class EventLog {
 public:
  EventLog() = default;

  explicit EventLog(std::vector<PrintEvent> events) : events_(std::move(events)) {
    for (const auto& e : events_) {
      if (e.timestamp < 0) throw std::invalid_argument("negative timestamp");
      if (e.user.empty()) throw std::invalid_argument("empty user");
    }
    std::stable_sort(events_.begin(), events_.end(),
                     [](const PrintEvent& a, const PrintEvent& b) {
                       return a.timestamp < b.timestamp;
                     });
  }

  const std::vector<PrintEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }
  const PrintEvent& operator[](std::size_t i) const { return events_[i]; }

  /// Last minus first timestamp; 0 for fewer than two events.
  Seconds span() const noexcept {
    return events_.size() < 2 ? 0 : events_.back().timestamp - events_.front().timestamp;
  }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<PrintEvent> events_;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <class Int>
Int parse_integer(std::string_view field, std::size_t line, const char* name) {
  if (!field.empty() && field.front() == '-')
    throw ParseError(line, std::string("negative ") + name);
  Int value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty())
    throw ParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  return value;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Reads a trace in the canonical CSV format.
///
/// Throws ParseError (with the offending line number) on a missing or wrong
/// header, a wrong field count, a non-integer or negative timestamp/size, or
/// an empty user. Throws EmptyLogError when no event follows the header.
inline EventLog parse_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::strip_cr(line) != kTraceHeader)
    throw ParseError(1, "expected header '" + std::string(kTraceHeader) + "'");

  std::vector<PrintEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::strip_cr(line);
    const auto fields = detail::split_fields(text);
    if (fields.size() != 4)
      throw ParseError(lineno, "expected 4 fields, found " + std::to_string(fields.size()));
    PrintEvent ev;
    ev.timestamp = detail::parse_integer<Seconds>(fields[0], lineno, "timestamp");
    ev.user = std::string(fields[1]);
    if (ev.user.empty()) throw ParseError(lineno, "empty user");
    ev.size = detail::parse_integer<Bytes>(fields[2], lineno, "size");
    ev.printer = std::string(fields[3]);
    events.push_back(std::move(ev));
  }
  if (events.empty()) throw EmptyLogError();
  return EventLog(std::move(events));
}

/// Writes `log` in the canonical CSV format; parse_log reads it back unchanged.
inline void serialize_log(std::ostream& out, const EventLog& log) {
  out << kTraceHeader << '\n';
  for (const auto& e : log)
    out << e.timestamp << ',' << e.user << ',' << e.size << ',' << e.printer << '\n';
}

/// Predicates for filter_events. Unset fields do not filter. min_size keeps
/// events with size strictly greater than it, and defaults to 0, so size-0
/// events are dropped unless min_size is reset.
struct EventFilter {
  std::optional<std::string> printer;
  std::optional<Seconds> t_min;
  std::optional<Seconds> t_max;
  std::optional<Bytes> min_size = Bytes{0};
};

inline EventLog filter_events(const EventLog& log, const EventFilter& filter) {
  if (filter.t_min && filter.t_max && *filter.t_min > *filter.t_max)
    throw std::invalid_argument("filter_events: t_min > t_max");
  std::vector<PrintEvent> kept;
  for (const auto& e : log) {
    if (filter.printer && e.printer != *filter.printer) continue;
    if (filter.t_min && e.timestamp < *filter.t_min) continue;
    if (filter.t_max && e.timestamp > *filter.t_max) continue;
    if (filter.min_size && !(e.size > *filter.min_size)) continue;
    kept.push_back(e);
  }
  return EventLog(std::move(kept));
}

struct SummaryStats {
  std::size_t n_users = 0;
  std::size_t n_users_gt3 = 0;  // users with more than three requests
  std::size_t n_requests = 0;
  double mean_size = 0.0;       // bytes
  double mean_interval = 0.0;   // seconds, span / (n_requests - 1)
  double min_resolution = 0.0;  // smallest positive gap between timestamps
};

/// Per-user event counts, ordered by user name.
inline std::map<std::string, std::size_t> requests_per_user(const EventLog& log) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : log) ++counts[e.user];
  return counts;
}

inline SummaryStats summarize(const EventLog& log) {
  if (log.size() < 2)
    throw InsufficientDataError("summarize needs at least 2 events, got " +
                                std::to_string(log.size()));
  SummaryStats s;
  const auto counts = requests_per_user(log);
  s.n_users = counts.size();
  s.n_users_gt3 = static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](const auto& kv) { return kv.second > 3; }));
  s.n_requests = log.size();

  long double size_sum = 0;
  for (const auto& e : log) size_sum += static_cast<long double>(e.size);
  s.mean_size = static_cast<double>(size_sum / static_cast<long double>(log.size()));
  s.mean_interval = static_cast<double>(log.span()) / static_cast<double>(log.size() - 1);

  Seconds min_gap = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    const Seconds gap = log[i].timestamp - log[i - 1].timestamp;
    if (gap > 0 && (min_gap == 0 || gap < min_gap)) min_gap = gap;
  }
  s.min_resolution = static_cast<double>(min_gap);
  return s;
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_INGEST_HPP
