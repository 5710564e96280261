#include <algorithm>

#include "emopanel/aggregate.hpp"

namespace emopanel::aggregate {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
  std::sort(dates_.begin(), dates_.end());
  dates_.erase(std::unique(dates_.begin(), dates_.end()), dates_.end());
}

TradingCalendar TradingCalendar::from_factors(const std::vector<corpus::FactorRow>& factors) {
  std::vector<Date> d;
  d.reserve(factors.size());
  for (const auto& f : factors) d.push_back(f.date);
  return TradingCalendar(std::move(d));
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::on_or_after(Date d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::after(Date d) const {
  auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::size_t resolve_day0_index(const corpus::Announcement& ann, const TradingCalendar& cal) {
  const Date d = ann.announce_time.date();
  if (!cal.covers(d))
    throw DataError("announcement " + ann.key() + " on " + d.iso() + " lies outside the trading calendar");
  auto idx = ann.timing == corpus::Timing::before_open ? cal.on_or_after(d) : cal.after(d);
  if (!idx) throw DataError("announcement " + ann.key() + ": no trading day after " + d.iso());
  return *idx;
}

Date resolve_day0(const corpus::Announcement& ann, const TradingCalendar& cal) {
  return cal[resolve_day0_index(ann, cal)];
}

std::optional<std::size_t> message_day_index(const Timestamp& ts, const TradingCalendar& cal, int close_seconds) {
  const Date d = ts.date();
  if (cal.index_of(d) && ts.seconds_of_day() < close_seconds) return cal.index_of(d);
  return cal.after(d);
}

EventWindow make_window(const TradingCalendar& cal, std::size_t day0_index, int a, int b,
                        std::string announcement_key) {
  if (a > b) throw InvalidArgument("make_window: a must not exceed b");
  if (day0_index >= cal.size()) throw InvalidArgument("make_window: day0 outside calendar");
  EventWindow w{std::move(announcement_key), cal[day0_index], a, b, {}};
  const auto i0 = static_cast<std::int64_t>(day0_index);
  for (std::int64_t k = a; k <= b; ++k) {
    auto i = i0 + k;
    if (i >= 0 && i < static_cast<std::int64_t>(cal.size())) w.dates.push_back(cal[static_cast<std::size_t>(i)]);
  }
  return w;
}

}  // namespace emopanel::aggregate
