#include "cyclecast/month.hpp"

#include <charconv>
#include <cstdio>

#include "cyclecast/error.hpp"

namespace cyclecast {

MonthStamp::MonthStamp(int year, int month) : year_(year), month_(month) {
  if (month < 1 || month > 12) {
    throw Error(Errc::MalformedRow, "month out of range: " + std::to_string(month));
  }
}

MonthStamp MonthStamp::from_ordinal(int ordinal) {
  int year = ordinal >= 0 ? ordinal / 12 : -((-ordinal + 11) / 12);
  return MonthStamp(year, ordinal - year * 12 + 1);
}

std::string MonthStamp::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
  return buf;
}

MonthStamp MonthStamp::parse(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw Error(Errc::MalformedRow, "expected YYYY-MM, got '" + std::string(text) + "'");
  }
  int year = 0;
  int month = 0;
  auto ys = text.substr(0, dash);
  auto ms = text.substr(dash + 1);
  auto r1 = std::from_chars(ys.data(), ys.data() + ys.size(), year);
  auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), month);
  if (r1.ec != std::errc{} || r1.ptr != ys.data() + ys.size() || r2.ec != std::errc{} ||
      r2.ptr != ms.data() + ms.size()) {
    throw Error(Errc::MalformedRow, "expected YYYY-MM, got '" + std::string(text) + "'");
  }
  return MonthStamp(year, month);
}

}  // namespace cyclecast
