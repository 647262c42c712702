#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "amiroar/common/http.hpp"
#include "amiroar/common/ipv4.hpp"
#include "amiroar/common/time.hpp"
#include "amiroar/sim/virtual_clock.hpp"
#include "fixtures.hpp"

using namespace amiroar;
using fixtures::at;

TEST(Time, Iso8601RoundTrip) {
  auto t = parse_iso8601("2023-07-15T11:33:00.250Z");
  EXPECT_EQ(format_iso8601(t), "2023-07-15T11:33:00.250Z");
  EXPECT_EQ(format_iso8601(parse_iso8601("2023-07-15T11:33:00Z")), "2023-07-15T11:33:00.000Z");
  EXPECT_THROW(parse_iso8601("2023-07-15 11:33"), std::invalid_argument);
  EXPECT_THROW(parse_iso8601("2023-13-15T11:33:00Z"), std::invalid_argument);
}

TEST(Time, CalendarMonthsClampToMonthEnd) {
  EXPECT_EQ(add_calendar_months(at("2023-01-31T10:00:00Z"), 1), at("2023-02-28T10:00:00Z"));
  EXPECT_EQ(add_calendar_months(at("2024-01-31T10:00:00Z"), 1), at("2024-02-29T10:00:00Z"));
  EXPECT_EQ(add_calendar_months(at("2023-07-15T11:33:00Z"), 1), at("2023-08-15T11:33:00Z"));
  EXPECT_EQ(add_calendar_months(at("2023-12-15T00:00:00Z"), 1), at("2024-01-15T00:00:00Z"));
}

TEST(Time, DayOfYearAndMonth) {
  EXPECT_EQ(day_of_year(at("2023-01-01T00:00:00Z")), 1u);
  EXPECT_EQ(day_of_year(at("2023-07-15T23:59:59Z")), 196u);
  EXPECT_EQ(day_of_year(at("2024-12-31T12:00:00Z")), 366u);
  EXPECT_EQ(month_of(at("2023-07-15T11:00:00Z")), 7u);
}

TEST(Time, DurationFormatting) {
  EXPECT_EQ(format_duration(std::chrono::hours{23} + std::chrono::minutes{55}), "23h 55m 00s");
  EXPECT_EQ(seconds_to_duration(1.5), Duration{1500});
}

TEST(Ipv4, ParseAndNormalize) {
  auto a = Ipv4Address::parse("010.000.000.007");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->to_string(), "10.0.0.7");
  EXPECT_FALSE(Ipv4Address::parse("10.0.0.256"));
  EXPECT_FALSE(Ipv4Address::parse("10.0.0"));
  EXPECT_FALSE(Ipv4Address::parse("10.0.0.1.2"));
  EXPECT_FALSE(Ipv4Address::parse(""));
  EXPECT_THROW(Ipv4Address::from_string("a.b.c.d"), std::invalid_argument);
  EXPECT_LT(Ipv4Address::from_string("10.0.0.9"), Ipv4Address::from_string("10.0.0.10"));
}

TEST(Http, UrlPath) {
  EXPECT_EQ(url_path("https://sdn-switch.com:10443/stats/flowentry/add"), "/stats/flowentry/add");
  EXPECT_EQ(url_path("https://h/a/b?x=1"), "/a/b");
  EXPECT_EQ(url_path("/topology"), "/topology");
}

TEST(VirtualClock, TiesFireInInsertionOrder) {
  sim::VirtualClock clock(at("2023-07-15T11:00:00Z"));
  std::vector<int> order;
  const auto t = clock.now() + std::chrono::seconds{5};
  for (int i = 0; i < 5; ++i) clock.schedule_at(t, [&order, i] { order.push_back(i); });
  clock.schedule_at(clock.now() + std::chrono::seconds{1}, [&order] { order.push_back(-1); });
  clock.run();
  EXPECT_EQ(order, (std::vector<int>{-1, 0, 1, 2, 3, 4}));
  EXPECT_EQ(clock.now(), t);
}

TEST(VirtualClock, RejectsPastAndCancels) {
  sim::VirtualClock clock(at("2023-07-15T11:00:00Z"));
  EXPECT_THROW(clock.schedule_at(clock.now() - Duration{1}, [] {}), std::invalid_argument);
  bool fired = false;
  auto id = clock.schedule_after(std::chrono::seconds{1}, [&] { fired = true; });
  EXPECT_TRUE(clock.cancel(id));
  EXPECT_FALSE(clock.cancel(id));
  clock.run();
  EXPECT_FALSE(fired);
  EXPECT_EQ(clock.pending(), 0u);
}

TEST(VirtualClock, RunUntilAdvancesAndNestedScheduling) {
  sim::VirtualClock clock(at("2023-07-15T11:00:00Z"));
  std::vector<TimePoint> seen;
  clock.schedule_after(std::chrono::seconds{1}, [&] {
    seen.push_back(clock.now());
    clock.schedule_after(std::chrono::seconds{1}, [&] { seen.push_back(clock.now()); });
  });
  clock.run_until(at("2023-07-15T11:00:01.500Z"));
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(clock.now(), at("2023-07-15T11:00:01.500Z"));
  clock.run();
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[1], at("2023-07-15T11:00:02Z"));
  EXPECT_EQ(clock.fired(), 2u);
}

TEST(VirtualClock, NowNeverDecreases) {
  sim::VirtualClock clock(at("2023-07-15T11:00:00Z"));
  std::mt19937_64 rng(7);
  TimePoint last = clock.now();
  bool monotone = true;
  for (int i = 0; i < 200; ++i)
    clock.schedule_after(Duration{static_cast<long>(rng() % 10000)}, [&] {
      monotone = monotone && clock.now() >= last;
      last = clock.now();
    });
  clock.run();
  EXPECT_TRUE(monotone);
}
