#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emopanel/common.hpp"
#include "emopanel/corpus.hpp"
#include "emopanel/emotion.hpp"
#include "emopanel/weaklabel.hpp"

/// Event windows and per-announcement aggregation into panel rows.
namespace emopanel::aggregate {

// ---------------------------------------------------------------------------
// Trading calendar

class TradingCalendar {
 public:
  TradingCalendar() = default;
  /// Dates are sorted and deduplicated.
  explicit TradingCalendar(std::vector<Date> dates);
  static TradingCalendar from_factors(const std::vector<corpus::FactorRow>& factors);

  const std::vector<Date>& dates() const { return dates_; }
  std::size_t size() const { return dates_.size(); }
  bool empty() const { return dates_.empty(); }
  const Date& operator[](std::size_t i) const { return dates_[i]; }

  bool covers(Date d) const { return !dates_.empty() && d >= dates_.front() && d <= dates_.back(); }
  std::optional<std::size_t> index_of(Date d) const;
  /// First trading day on or after d.
  std::optional<std::size_t> on_or_after(Date d) const;
  /// First trading day strictly after d.
  std::optional<std::size_t> after(Date d) const;

 private:
  std::vector<Date> dates_;
};

/// Seconds after midnight UTC at which the regular session closes (16:00 New York, EST).
inline constexpr int kDefaultCloseSeconds = 21 * 3600;

/// Index of day 0: the announcement's trading date when it reports before
/// the open, the next trading date when it reports after the close. Throws
/// DataError when the announcement falls outside the calendar.
std::size_t resolve_day0_index(const corpus::Announcement& ann, const TradingCalendar& cal);
Date resolve_day0(const corpus::Announcement& ann, const TradingCalendar& cal);

/// Trading day a message counts toward: its own date during trading days
/// before the close, otherwise the next trading day. nullopt past the calendar.
std::optional<std::size_t> message_day_index(const Timestamp& ts, const TradingCalendar& cal,
                                             int close_seconds = kDefaultCloseSeconds);

struct EventWindow {
  std::string announcement_key;
  Date day0;
  int a = 0, b = 0;
  std::vector<Date> dates;  // truncated where the calendar ends
};

EventWindow make_window(const TradingCalendar& cal, std::size_t day0_index, int a, int b,
                        std::string announcement_key = {});

// ---------------------------------------------------------------------------
// Weighted aggregation

enum class WeightScheme { follower, like, equal };
std::string_view to_string(WeightScheme s);
WeightScheme parse_weight_scheme(std::string_view s);

/// 1 + ln(1 + followers).
double follower_weight(double followers);
/// 1 + ln(1 + likes).
double like_weight(double likes);

/// One classified message ready for aggregation.
struct MessageObs {
  std::string message_id;
  std::string firm_id;
  std::size_t day_index = 0;
  std::int64_t likes = 0;
  corpus::UserProfile user;  // user_id always set; other fields default when unknown
  EmotionVector emotion{};
  weaklabel::SentimentScore sentiment;
  weaklabel::ChatType chat_type = weaklabel::ChatType::chat;
  corpus::Channel channel = corpus::Channel::original;
};

using MessageFilter = std::function<bool(const MessageObs&)>;

double message_weight(const MessageObs& m, WeightScheme scheme);

/// Componentwise weighted mean; nullopt when there is nothing to average.
std::optional<EmotionVector> aggregate_emotions(std::span<const EmotionVector> emotions,
                                                std::span<const double> weights);
std::optional<EmotionVector> aggregate_emotions(const std::vector<const MessageObs*>& messages, WeightScheme scheme);

/// (sum_P p_i w_i - sum_N (1 - p_i) w_i) / (1 + sum_{P u N} q_i) with q_i the
/// probability of the assigned class; neutral messages do not enter.
double aggregate_sentiment(std::span<const weaklabel::SentimentScore> scores, std::span<const double> weights);
double aggregate_sentiment(const std::vector<const MessageObs*>& messages, WeightScheme scheme);

/// Clamps to the nearest-rank quantiles x_(ceil(p n)) of the non-missing
/// values. Missing values stay missing. Throws InvalidArgument on an empty
/// series or bad limits.
std::vector<double> winsorize(const std::vector<double>& x, double lower = 0.01, double upper = 0.99);

/// Sample standard deviation; NaN with fewer than two returns.
double volatility(std::span<const double> returns);

// ---------------------------------------------------------------------------
// Panel

struct Window {
  int a = 0, b = 0;
};

struct PanelRow {
  std::string firm_id;
  std::string announcement_key;
  std::string quarter_id;
  Date day0;
  int industry_ff48 = 1;
  EmotionVector emo_pre{};  // [-10,-2]
  EmotionVector emo_evt{};  // [-1,1]; NaN when no message
  double sentiment_pre = kNaN, sentiment_evt = kNaN;
  double exret_m1_p1 = kNaN, exret_p2_p4 = kNaN, exret_m10_m2 = kNaN;  // percent
  double sue = kNaN, sue_lag = kNaN, loss = kNaN, analysts = kNaN, inst = kNaN, size = kNaN, mb = kNaN, q4 = kNaN;
  double volatility = kNaN;
  std::int64_t n_messages = 0, n_users = 0;

  int year() const { return day0.year(); }
  int month() const { return static_cast<int>(day0.month()); }
  int dow() const { return static_cast<int>(day0.weekday()); }
  std::string industry_quarter() const { return std::to_string(industry_ff48) + "|" + quarter_id; }
};

/// Column names of panel.csv, in order.
const std::vector<std::string>& panel_columns();
/// Numeric columns (everything except identifiers) as name/value pairs.
std::vector<std::pair<std::string, double>> numeric_fields(const PanelRow& row);
/// Categorical keys: firm, year, month, dow, industry_quarter, quarter.
std::map<std::string, std::string> key_fields(const PanelRow& row);

struct PanelConfig {
  Window pre{-10, -2};
  Window evt{-1, 1};
  Window vol{-135, -10};
  std::size_t min_users = 2;
  WeightScheme scheme = WeightScheme::follower;
  MessageFilter filter;  // empty keeps every message
  bool winsorize = true;
  double lower = 0.01, upper = 0.99;
  std::vector<std::string> winsorize_columns{"exret_m1_p1", "exret_p2_p4", "exret_m10_m2", "sue", "sue_lag",
                                             "size", "mb", "volatility"};
  int close_seconds = kDefaultCloseSeconds;
};

/// Excess returns (percent) per announcement key for (-1,1), (2,4), (-10,-2).
using ExretMap = std::map<std::string, std::array<double, 3>>;

struct PanelInputs {
  const std::vector<corpus::Announcement>* announcements = nullptr;
  const TradingCalendar* calendar = nullptr;
  const std::vector<MessageObs>* messages = nullptr;
  const std::vector<corpus::DailyQuote>* quotes = nullptr;
  const ExretMap* exret = nullptr;
};

struct PanelResult {
  std::vector<PanelRow> rows;
  std::size_t dropped_min_users = 0;
  std::size_t dropped_outside_calendar = 0;
};

/// One row per announcement whose pre-window holds messages from at least
/// `min_users` distinct users after filtering. Throws DataError listing
/// exret keys or message firms that match no announcement.
PanelResult assemble_panel(const PanelInputs& in, const PanelConfig& config);

struct Variant {
  std::string name;
  MessageFilter filter;
  WeightScheme scheme = WeightScheme::follower;
};

/// Subsets by chat type, information channel and user attribute, plus the
/// like- and equal-weighted aggregations.
std::vector<Variant> standard_variants();

void write_panel_csv(const std::string& path, const std::vector<PanelRow>& rows);
std::vector<PanelRow> read_panel_csv(const std::string& path);

}  // namespace emopanel::aggregate
