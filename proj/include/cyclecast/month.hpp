#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace cyclecast {

// A calendar month. Ordered by (year, month).
class MonthStamp {
 public:
  MonthStamp() = default;
  MonthStamp(int year, int month);

  int year() const noexcept { return year_; }
  int month() const noexcept { return month_; }

  // Months elapsed since January of year 0; convenient for arithmetic.
  int ordinal() const noexcept { return year_ * 12 + (month_ - 1); }
  static MonthStamp from_ordinal(int ordinal);

  MonthStamp next() const { return plus(1); }
  MonthStamp prev() const { return plus(-1); }
  MonthStamp plus(int months) const { return from_ordinal(ordinal() + months); }

  // "YYYY-MM"
  std::string to_string() const;
  // Accepts "YYYY-MM" or "YYYY-M".
  static MonthStamp parse(std::string_view text);

  friend auto operator<=>(const MonthStamp&, const MonthStamp&) = default;

 private:
  int year_ = 1970;
  int month_ = 1;
};

inline int months_between(MonthStamp from, MonthStamp to) noexcept {
  return to.ordinal() - from.ordinal();
}

// Closed month interval [first, last].
struct MonthRange {
  MonthStamp first;
  MonthStamp last;

  bool contains(MonthStamp m) const noexcept { return first <= m && m <= last; }
  int size() const noexcept { return last < first ? 0 : months_between(first, last) + 1; }
};

}  // namespace cyclecast
