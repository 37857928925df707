#ifndef MSTS_CALENDAR_HPP
#define MSTS_CALENDAR_HPP

#include <string>
#include <vector>
#include <Eigen/Dense>

#include "msts/timeseries.hpp"

// Gregorian date arithmetic, holiday regressor construction, and the
// daily <-> 7-variate weekly embedding.

namespace msts {

struct CalendarDate {
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int year = 2000;
  friend bool operator==(const CalendarDate&, const CalendarDate&) = default;
};

bool is_leap_year(int year);
int days_in_year(int year);
bool is_valid_date(const CalendarDate& d);

// Ordinal day within the year, 1..366.
int date_to_day(const CalendarDate& d);

// Inverse of date_to_day relative to a reference year.  Indices <= 0 roll
// into prior years; indices beyond the year length roll forward.
CalendarDate day_to_date(int day_index, int year);

// Day of week, 1 = Sunday .. 7 = Saturday.
int day_of_week(const CalendarDate& d);

// Date shifted by a (possibly negative) number of days.
CalendarDate add_days(const CalendarDate& d, int days);

// Signed day count from a to b (b - a in days).
long day_difference(const CalendarDate& a, const CalendarDate& b);

// First day of the first week and last day of the last week of a weekly
// series of length T starting at (year, week), where weeks begin on
// first_day (1 = Sunday).
struct WeeklySpan {
  CalendarDate start;
  CalendarDate end;
};
WeeklySpan weekly_to_date(int first_day, int year, int week, int T);

// A daily regressor over an inclusive date range.
struct DailyRegressor {
  Eigen::VectorXd values;
  CalendarDate start;
  CalendarDate end;
};

// Window indicator of width fore + aft + 1 around each holiday occurrence,
// with the long-run mean for each calendar day (taken over the full span of
// the supplied holiday list) subtracted, restricted to [start, end].  The
// holiday list should span many years beyond the sample.  Centering can be
// disabled.
DailyRegressor gethol(const std::vector<CalendarDate>& holiday_dates, int fore,
                      int aft, const CalendarDate& start,
                      const CalendarDate& end, bool center = true);

// Rule "nth weekday of month": nth = 1..4, or -1 for the last occurrence.
struct HolidayRule {
  int nth;      // 1..4, or -1 = last
  int weekday;  // 1 = Sunday .. 7 = Saturday
  int month;    // 1..12
};
std::vector<CalendarDate> find_holiday(const HolidayRule& rule, int year_from,
                                       int year_to);

// Holiday date file: one "MM DD YYYY" per line.
std::vector<CalendarDate> read_holiday_dates(const std::string& path);

// Embed a daily series as a 7-variate weekly series whose j-th component is
// the (first_day + j - 1)-th day of week.  Incomplete first/last weeks are
// padded with missing markers.  The result's start_index is the week index w
// of the first (padded) week, with period 52.
TimeSeriesSample daily_to_weekly(const Eigen::MatrixXd& daily, int first_day,
                                 const CalendarDate& start);

// Inverse unstacking of a 7-variate weekly series; also recovers the start
// date of the (padded) daily series.
struct DailySeries {
  Eigen::MatrixXd values;  // column per original daily column group
  CalendarDate start;
};
DailySeries weekly_to_daily(const TimeSeriesSample& weekly, int first_day);

}  // namespace msts

#endif  // MSTS_CALENDAR_HPP
