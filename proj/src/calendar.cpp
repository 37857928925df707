#include "msts/calendar.hpp"

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace msts {

namespace {

constexpr std::array<int, 12> kMonthDays = {31, 28, 31, 30, 31, 30,
                                            31, 31, 30, 31, 30, 31};

int month_length(int month, int year) {
  if (month == 2 && is_leap_year(year)) return 29;
  return kMonthDays[month - 1];
}

// Days since 1970-01-01 (proleptic Gregorian).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

bool is_valid_date(const CalendarDate& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
         d.day <= month_length(d.month, d.year);
}

int date_to_day(const CalendarDate& d) {
  if (!is_valid_date(d)) throw std::invalid_argument("date_to_day: bad date");
  int doy = d.day;
  for (int m = 1; m < d.month; ++m) doy += month_length(m, d.year);
  return doy;
}

CalendarDate day_to_date(int day_index, int year) {
  while (day_index <= 0) {
    --year;
    day_index += days_in_year(year);
  }
  while (day_index > days_in_year(year)) {
    day_index -= days_in_year(year);
    ++year;
  }
  int m = 1;
  while (day_index > month_length(m, year)) {
    day_index -= month_length(m, year);
    ++m;
  }
  return {m, day_index, year};
}

int day_of_week(const CalendarDate& d) {
  long days = days_from_civil(d.year, d.month, d.day);
  return static_cast<int>(((days % 7) + 7 + 4) % 7) + 1;  // epoch is Thursday
}

CalendarDate add_days(const CalendarDate& d, int days) {
  return day_to_date(date_to_day(d) + days, d.year);
}

long day_difference(const CalendarDate& a, const CalendarDate& b) {
  return days_from_civil(b.year, b.month, b.day) -
         days_from_civil(a.year, a.month, a.day);
}

WeeklySpan weekly_to_date(int first_day, int year, int week, int T) {
  if (week < 1 || week > 53)
    throw std::invalid_argument("weekly_to_date: week out of range");
  int lead = day_of_week({1, 1, year}) - first_day;
  if (lead < 0) lead += 7;
  int ell = 7 * (week - 1) - lead + 1;
  CalendarDate start = day_to_date(ell, year);
  return {start, add_days(start, 7 * T - 1)};
}

DailyRegressor gethol(const std::vector<CalendarDate>& holiday_dates, int fore,
                      int aft, const CalendarDate& start,
                      const CalendarDate& end, bool center) {
  if (holiday_dates.empty())
    throw std::invalid_argument("gethol: empty holiday list");
  CalendarDate lo = holiday_dates.front(), hi = holiday_dates.front();
  for (const auto& d : holiday_dates) {
    if (day_difference(lo, d) < 0) lo = d;
    if (day_difference(hi, d) > 0) hi = d;
  }
  const CalendarDate span_lo = add_days(lo, -fore);
  const CalendarDate span_hi = add_days(hi, aft);
  const long span_len = day_difference(span_lo, span_hi) + 1;
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(span_len);
  for (const auto& h : holiday_dates) {
    long base = day_difference(span_lo, h);
    for (int off = -fore; off <= aft; ++off) {
      long idx = base + off;
      if (idx >= 0 && idx < span_len) ind(idx) += 1.0;
    }
  }
  // Long-run mean per calendar day over the centering span.
  std::array<double, 12 * 31> sum{}, cnt{};
  if (center) {
    CalendarDate d = span_lo;
    for (long i = 0; i < span_len; ++i, d = add_days(d, 1)) {
      int cell = (d.month - 1) * 31 + (d.day - 1);
      sum[cell] += ind(i);
      cnt[cell] += 1.0;
    }
  }
  const long n = day_difference(start, end) + 1;
  if (n <= 0) throw std::invalid_argument("gethol: empty date range");
  DailyRegressor out;
  out.values = Eigen::VectorXd::Zero(n);
  out.start = start;
  out.end = end;
  CalendarDate d = start;
  for (long i = 0; i < n; ++i, d = add_days(d, 1)) {
    long idx = day_difference(span_lo, d);
    double v = (idx >= 0 && idx < span_len) ? ind(idx) : 0.0;
    if (center) {
      int cell = (d.month - 1) * 31 + (d.day - 1);
      if (cnt[cell] > 0) v -= sum[cell] / cnt[cell];
    }
    out.values(i) = v;
  }
  return out;
}

std::vector<CalendarDate> find_holiday(const HolidayRule& rule, int year_from,
                                       int year_to) {
  if (rule.weekday < 1 || rule.weekday > 7 || rule.month < 1 ||
      rule.month > 12 || rule.nth == 0 || rule.nth > 4 || rule.nth < -1)
    throw std::invalid_argument("find_holiday: bad rule");
  std::vector<CalendarDate> out;
  for (int y = year_from; y <= year_to; ++y) {
    std::vector<int> hits;
    for (int day = 1; day <= month_length(rule.month, y); ++day)
      if (day_of_week({rule.month, day, y}) == rule.weekday)
        hits.push_back(day);
    if (rule.nth > 0 && static_cast<int>(hits.size()) < rule.nth)
      throw std::runtime_error("find_holiday: rule not satisfiable");
    out.push_back(
        {rule.month, rule.nth > 0 ? hits[rule.nth - 1] : hits.back(), y});
  }
  return out;
}

std::vector<CalendarDate> read_holiday_dates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open holiday file: " + path);
  std::vector<CalendarDate> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ss(line);
    CalendarDate d;
    if (!(ss >> d.month >> d.day >> d.year))
      throw std::runtime_error("bad holiday date line: " + line);
    if (!is_valid_date(d))
      throw std::runtime_error("invalid holiday date: " + line);
    out.push_back(d);
  }
  return out;
}

TimeSeriesSample daily_to_weekly(const Eigen::MatrixXd& daily, int first_day,
                                 const CalendarDate& start) {
  if (daily.cols() != 1)
    throw std::invalid_argument("daily_to_weekly: univariate input expected");
  const int Td = static_cast<int>(daily.rows());
  int lead = ((day_of_week(start) - first_day) % 7 + 7) % 7;
  const int total = lead + Td;
  const int Tw = (total + 6) / 7;
  TimeSeriesSample out;
  out.values = Eigen::MatrixXd::Constant(Tw, 7, na_value());
  for (int i = 0; i < Td; ++i)
    out.values((lead + i) / 7, (lead + i) % 7) = daily(i, 0);
  const int ell = date_to_day(start) - lead;
  out.period = 52;
  out.start_year = start.year;
  out.start_index =
      static_cast<int>(std::ceil((ell - 1) / 7.0)) + 1;  // week index
  out.names.resize(7);
  static const char* kDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  for (int j = 0; j < 7; ++j)
    out.names[j] = kDays[(first_day - 1 + j) % 7];
  return out;
}

DailySeries weekly_to_daily(const TimeSeriesSample& weekly, int first_day) {
  if (weekly.cols() != 7)
    throw std::invalid_argument("weekly_to_daily: 7 columns expected");
  const int Tw = weekly.rows();
  DailySeries out;
  out.values = Eigen::MatrixXd(Tw * 7, 1);
  for (int t = 0; t < Tw; ++t)
    for (int j = 0; j < 7; ++j) out.values(7 * t + j, 0) = weekly.values(t, j);
  int lead = day_of_week({1, 1, weekly.start_year}) - first_day;
  if (lead < 0) lead += 7;
  int ell = 7 * (weekly.start_index - 1) - lead + 1;
  out.start = day_to_date(ell, weekly.start_year);
  return out;
}

}  // namespace msts
