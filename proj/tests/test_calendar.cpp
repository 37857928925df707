#include <doctest.h>

#include <random>

#include "msts/calendar.hpp"

using namespace msts;

namespace {

// Zeller's congruence, independent day-of-week oracle (1 = Sunday).
int zeller(const CalendarDate& d) {
  int q = d.day, m = d.month, y = d.year;
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  int K = y % 100, J = y / 100;
  int h = (q + 13 * (m + 1) / 5 + K + K / 4 + J / 4 + 5 * J) % 7;
  // h: 0 = Saturday, 1 = Sunday, ...
  return (h + 6) % 7 + 1;
}

}  // namespace

TEST_CASE("date_to_day") {
  CHECK(date_to_day({1, 1, 1999}) == 1);
  CHECK(date_to_day({1, 1, 2400}) == 1);
  CHECK(date_to_day({2, 28, 2020}) == 59);
  CHECK(date_to_day({12, 31, 2019}) == 365);
  CHECK(date_to_day({12, 31, 2020}) == 366);
}

TEST_CASE("day_to_date inverse and rollovers") {
  CHECK(day_to_date(0, 2020) == CalendarDate{12, 31, 2019});
  CHECK(day_to_date(53, 2020) == CalendarDate{2, 22, 2020});
  CHECK(day_to_date(366 + 31, 2020) == CalendarDate{1, 31, 2021});

  std::mt19937 rng(23);
  std::uniform_int_distribution<int> yr(1583, 2400), mo(1, 12), dy(1, 31);
  int done = 0;
  while (done < 1000) {
    CalendarDate d{mo(rng), dy(rng), yr(rng)};
    if (!is_valid_date(d)) continue;
    CHECK(day_to_date(date_to_day(d), d.year) == d);
    ++done;
  }
}

TEST_CASE("day_of_week") {
  CHECK(day_of_week({1, 1, 2020}) == 4);  // Wednesday
  CHECK(day_of_week({2, 28, 2020}) == 6);
  CHECK(day_of_week({7, 4, 1776}) == zeller({7, 4, 1776}));
  std::mt19937 rng(29);
  std::uniform_int_distribution<int> yr(1700, 2300), mo(1, 12), dy(1, 28);
  for (int i = 0; i < 300; ++i) {
    CalendarDate d{mo(rng), dy(rng), yr(rng)};
    CHECK(day_of_week(d) == zeller(d));
    CHECK(day_of_week(add_days(d, 7)) == day_of_week(d));
  }
}

TEST_CASE("weekly_to_date") {
  SUBCASE("Saturday-start week nine of 2020") {
    WeeklySpan span = weekly_to_date(7, 2020, 9, 1);
    CHECK(span.start == CalendarDate{2, 22, 2020});
    CHECK(span.end == CalendarDate{2, 28, 2020});
  }
  SUBCASE("week one with zero lead starts on January 1") {
    // January 1, 2006 was a Sunday.
    WeeklySpan span = weekly_to_date(1, 2006, 1, 10);
    CHECK(span.start == CalendarDate{1, 1, 2006});
    CHECK(day_difference(span.start, span.end) == 69);
  }
}

TEST_CASE("gethol") {
  SUBCASE("window length is fore + aft + 1") {
    std::vector<CalendarDate> dates{{6, 15, 2000}};
    DailyRegressor reg = gethol(dates, 7, 0, {6, 1, 2000}, {6, 30, 2000},
                                /*center=*/false);
    int nonzero = 0;
    for (int i = 0; i < reg.values.size(); ++i)
      if (reg.values(i) != 0.0) ++nonzero;
    CHECK(nonzero == 8);
    CHECK(reg.values(7) == 1.0);   // June 8
    CHECK(reg.values(14) == 1.0);  // June 15
    CHECK(reg.values(15) == 0.0);
  }
  SUBCASE("fixed-date holiday is zero after centering") {
    std::vector<CalendarDate> xmas;
    for (int y = 1900; y <= 2100; ++y) xmas.push_back({12, 25, y});
    DailyRegressor reg = gethol(xmas, 7, 0, {1, 1, 2019}, {12, 31, 2021});
    CHECK(reg.values.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("one-hot without centering") {
    std::vector<CalendarDate> dates{{3, 3, 2010}};
    DailyRegressor reg =
        gethol(dates, 0, 0, {3, 1, 2010}, {3, 5, 2010}, /*center=*/false);
    CHECK(reg.values.sum() == 1.0);
    CHECK(reg.values(2) == 1.0);
  }
  SUBCASE("long-run mean is zero over the centering span") {
    std::vector<CalendarDate> dates;
    for (int y = 1800; y <= 2200; ++y)
      dates.push_back(find_holiday({3, 2, 11}, y, y)[0]);  // 3rd Monday of Nov
    CalendarDate lo = add_days(dates.front(), -3);
    CalendarDate hi = add_days(dates.back(), 2);
    DailyRegressor reg = gethol(dates, 3, 2, lo, hi);
    CHECK(std::abs(reg.values.sum()) < 1e-9);
  }
  SUBCASE("empty list throws") {
    CHECK_THROWS(gethol({}, 1, 1, {1, 1, 2000}, {2, 1, 2000}));
  }
}

TEST_CASE("find_holiday") {
  // 3rd Monday of January 2012 (Monday = 2).
  auto d = find_holiday({3, 2, 1}, 2012, 2012);
  CHECK(d[0] == CalendarDate{1, 16, 2012});
  // First Sunday of any month falls on day <= 7.
  for (int y = 1990; y < 2010; ++y)
    for (int m = 1; m <= 12; ++m)
      CHECK(find_holiday({1, 1, m}, y, y)[0].day <= 7);
  // Last Thursday of November 2019.
  auto t = find_holiday({-1, 5, 11}, 2019, 2019);
  CHECK(t[0] == CalendarDate{11, 28, 2019});
  // Cross-check against a brute-force enumeration with the Zeller oracle.
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> yr(1950, 2050), wd(1, 7), mo(1, 12),
      nth(1, 4);
  for (int i = 0; i < 100; ++i) {
    HolidayRule rule{nth(rng), wd(rng), mo(rng)};
    int y = yr(rng);
    auto got = find_holiday(rule, y, y)[0];
    int count = 0, expect = -1;
    for (int day = 1; day <= 31; ++day) {
      CalendarDate cand{rule.month, day, y};
      if (!is_valid_date(cand)) break;
      if (zeller(cand) == rule.weekday && ++count == rule.nth) {
        expect = day;
        break;
      }
    }
    CHECK(got.day == expect);
  }
}

TEST_CASE("daily_to_weekly") {
  SUBCASE("Saturday-first embedding starting February 28, 2020") {
    Eigen::MatrixXd daily(10, 1);
    for (int i = 0; i < 10; ++i) daily(i, 0) = i + 1.0;
    TimeSeriesSample w = daily_to_weekly(daily, 7, {2, 28, 2020});
    CHECK(w.cols() == 7);
    CHECK(w.start_year == 2020);
    CHECK(w.start_index == 9);
    int leading = 0;
    for (int j = 0; j < 7 && is_na(w.values(0, j)); ++j) ++leading;
    CHECK(leading == 6);
    CHECK(w.values(0, 6) == 1.0);
    CHECK(w.observed_count() == 10);
    CHECK(w.rows() == (6 + 10 + 5) / 7);
  }
  SUBCASE("aligned start has no leading markers") {
    Eigen::MatrixXd daily = Eigen::MatrixXd::Ones(14, 1);
    // February 22, 2020 was a Saturday.
    TimeSeriesSample w = daily_to_weekly(daily, 7, {2, 22, 2020});
    CHECK(!is_na(w.values(0, 0)));
    CHECK(w.rows() == 2);
    CHECK(w.start_index == 9);
  }
  SUBCASE("Sunday-first embedding starting January 1, 2020") {
    Eigen::MatrixXd daily = Eigen::MatrixXd::Constant(5, 1, 2.0);
    TimeSeriesSample w = daily_to_weekly(daily, 1, {1, 1, 2020});
    int leading = 0;
    for (int j = 0; j < 7 && is_na(w.values(0, j)); ++j) ++leading;
    CHECK(leading == 3);
    CHECK(w.start_index == 1);
  }
  SUBCASE("row count and observation count invariants") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> len(1, 40), fd(1, 7), off(0, 400);
    for (int rep = 0; rep < 30; ++rep) {
      int Td = len(rng);
      Eigen::MatrixXd daily = Eigen::MatrixXd::Random(Td, 1);
      CalendarDate start = add_days({1, 15, 2015}, off(rng));
      int first_day = fd(rng);
      TimeSeriesSample w = daily_to_weekly(daily, first_day, start);
      int lead = ((day_of_week(start) - first_day) % 7 + 7) % 7;
      CHECK(w.rows() == (lead + Td + 6) / 7);
      CHECK(w.observed_count() == Td);
    }
  }
}

TEST_CASE("weekly_to_daily") {
  SUBCASE("round trip when first_day matches the start weekday") {
    std::mt19937 rng(37);
    std::normal_distribution<double> n;
    Eigen::MatrixXd daily(23, 1);
    for (int i = 0; i < 23; ++i) daily(i, 0) = n(rng);
    // February 23, 2020 was a Sunday.
    TimeSeriesSample w = daily_to_weekly(daily, 1, {2, 23, 2020});
    DailySeries back = weekly_to_daily(w, 1);
    CHECK(back.start == CalendarDate{2, 23, 2020});
    for (int i = 0; i < 23; ++i) CHECK(back.values(i, 0) == daily(i, 0));
    for (int i = 23; i < back.values.rows(); ++i)
      CHECK(is_na(back.values(i, 0)));
  }
  SUBCASE("week one can start in the prior year") {
    TimeSeriesSample w;
    w.values = Eigen::MatrixXd::Ones(2, 7);
    w.period = 52;
    w.start_year = 2020;
    w.start_index = 1;
    DailySeries d = weekly_to_daily(w, 1);  // Sunday weeks
    CHECK(d.start == CalendarDate{12, 29, 2019});
    CHECK(d.values.rows() == 14);
    CHECK(d.values.minCoeff() == 1.0);
  }
}
