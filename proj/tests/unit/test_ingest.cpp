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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "heavytrace/ingest.hpp"

namespace heavytrace {
namespace {

EventLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_log(in);
}

TEST(ParseLog, SortsByTimestamp) {
  const auto log = parse(
      "timestamp,user,size,printer\n"
      "10,alice,100,chrome\n"
      "5,bob,200,chrome\n"
      "20,carol,300,ink\n");
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].timestamp, 5);
  EXPECT_EQ(log[1].timestamp, 10);
  EXPECT_EQ(log[2].timestamp, 20);
  EXPECT_EQ(log[0].user, "bob");
  EXPECT_EQ(log.span(), 15);
}

TEST(ParseLog, TiesKeepFileOrder) {
  const auto log = parse(
      "timestamp,user,size,printer\n"
      "7,first,1,p\n"
      "3,x,1,p\n"
      "7,second,1,p\n"
      "7,third,1,p\n");
  EXPECT_EQ(log[1].user, "first");
  EXPECT_EQ(log[2].user, "second");
  EXPECT_EQ(log[3].user, "third");
}

TEST(ParseLog, NonIntegerTimestampReportsLine) {
  try {
    parse("timestamp,user,size,printer\n1,u0,5,chrome\nabc,u1,100,chrome\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseLog, RejectsMalformedLines) {
  const std::string header = "timestamp,user,size,printer\n";
  EXPECT_THROW(parse(header + "1,u,5\n"), ParseError);            // field count
  EXPECT_THROW(parse(header + "1,u,5,p,extra\n"), ParseError);    // field count
  EXPECT_THROW(parse(header + "-1,u,5,p\n"), ParseError);         // negative
  EXPECT_THROW(parse(header + "1,u,-5,p\n"), ParseError);         // negative
  EXPECT_THROW(parse(header + "1,u,5.5,p\n"), ParseError);        // non-integer
  EXPECT_THROW(parse(header + "1,,5,p\n"), ParseError);           // empty user
  EXPECT_THROW(parse("time,user,size,printer\n1,u,5,p\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(ParseLog, HeaderOnlyIsEmptyLogError) {
  EXPECT_THROW(parse("timestamp,user,size,printer\n"), EmptyLogError);
  EXPECT_THROW(parse("timestamp,user,size,printer\n"), InsufficientDataError);
}

TEST(ParseLog, RoundTripProperty) {
  std::mt19937_64 eng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PrintEvent> events;
    const int n = 1 + static_cast<int>(eng() % 200);
    for (int i = 0; i < n; ++i)
      events.push_back({static_cast<Seconds>(eng() % 1000000), "u" + std::to_string(eng() % 17),
                        eng() % 5000000, (eng() % 2) ? "chrome" : "ink"});
    const EventLog log(events);
    std::ostringstream out;
    serialize_log(out, log);
    EXPECT_EQ(parse(out.str()), log);
  }
}

EventLog two_printer_log() {
  return EventLog({{0, "a", 0, "chrome"},
                   {5, "b", 10, "ink"},
                   {5, "a", 20, "chrome"},
                   {9, "c", 30, "chrome"},
                   {12, "a", 40, "ink"}});
}

TEST(FilterEvents, PrinterPredicate) {
  EventFilter f;
  f.printer = "chrome";
  f.min_size.reset();
  const auto out = filter_events(two_printer_log(), f);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& e : out) EXPECT_EQ(e.printer, "chrome");
}

TEST(FilterEvents, DefaultMinSizeIsStrictZero) {
  const auto out = filter_events(two_printer_log(), EventFilter{});
  EXPECT_EQ(out.size(), 4u);
  for (const auto& e : out) EXPECT_GT(e.size, 0u);
}

TEST(FilterEvents, EqualTimeBounds) {
  EventFilter f;
  f.t_min = 5;
  f.t_max = 5;
  f.min_size.reset();
  const auto out = filter_events(two_printer_log(), f);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].user, "b");
  EXPECT_EQ(out[1].user, "a");
}

TEST(FilterEvents, InvertedBoundsRejected) {
  EventFilter f;
  f.t_min = 6;
  f.t_max = 5;
  EXPECT_THROW(filter_events(two_printer_log(), f), std::invalid_argument);
}

TEST(FilterEvents, Idempotent) {
  EventFilter f;
  f.printer = "chrome";
  f.t_min = 1;
  f.min_size = 15;
  const auto once = filter_events(two_printer_log(), f);
  EXPECT_EQ(filter_events(once, f), once);
}

TEST(Summarize, HandComputed) {
  const EventLog log({{0, "a", 1000, "p"}, {60, "b", 2000, "p"}, {120, "a", 3000, "p"}});
  const auto s = summarize(log);
  EXPECT_EQ(s.n_requests, 3u);
  EXPECT_EQ(s.n_users, 2u);
  EXPECT_EQ(s.n_users_gt3, 0u);
  EXPECT_DOUBLE_EQ(s.mean_size, 2000.0);
  EXPECT_DOUBLE_EQ(s.mean_interval, 60.0);
  EXPECT_DOUBLE_EQ(s.min_resolution, 60.0);
}

TEST(Summarize, CountsUsersWithMoreThanThreeRequests) {
  std::vector<PrintEvent> ev;
  for (int i = 0; i < 4; ++i) ev.push_back({i, "busy", 1, "p"});
  for (int i = 0; i < 3; ++i) ev.push_back({10 + i, "casual", 1, "p"});
  const auto s = summarize(EventLog(ev));
  EXPECT_EQ(s.n_users, 2u);
  EXPECT_EQ(s.n_users_gt3, 1u);
  EXPECT_DOUBLE_EQ(s.min_resolution, 1.0);
}

TEST(Summarize, SingleEventIsError) {
  EXPECT_THROW(summarize(EventLog({{0, "a", 1, "p"}})), InsufficientDataError);
}

TEST(Summarize, MeanIntervalTimesGapsIsSpan) {
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PrintEvent> ev;
    const int n = 2 + static_cast<int>(eng() % 500);
    for (int i = 0; i < n; ++i) ev.push_back({static_cast<Seconds>(eng() % 31536000), "u", 1, "p"});
    const EventLog log(ev);
    const auto s = summarize(log);
    EXPECT_NEAR(s.mean_interval * static_cast<double>(s.n_requests - 1),
                static_cast<double>(log.span()), 1e-12 * static_cast<double>(log.span()) + 1e-12);
    EXPECT_LE(s.n_users_gt3, s.n_users);
    EXPECT_GE(s.n_requests, s.n_users);
  }
}

}  // namespace
}  // namespace heavytrace
