#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "emopanel/aggregate.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::aggregate;

namespace {

// Weekdays from Mon 2024-01-01 through Fri 2024-02-02.
TradingCalendar weekdays() {
  std::vector<Date> d;
  for (Date x(2024, 1, 1); x <= Date(2024, 2, 2); x = x.plus_days(1)) {
    if (!x.is_weekend()) d.push_back(x);
  }
  return TradingCalendar(d);
}

corpus::Announcement ann(std::string firm, std::string when, corpus::Timing t, std::string quarter = "2024Q1") {
  corpus::Announcement a;
  a.firm_id = std::move(firm);
  a.announce_time = Timestamp::parse(when);
  a.timing = t;
  a.quarter_id = std::move(quarter);
  return a;
}

weaklabel::SentimentScore score(double p) { return {p, weaklabel::sentiment_from_probability(p)}; }

MessageObs msg(std::string firm, std::size_t day, std::string user, Emotion e, std::int64_t followers = 0) {
  MessageObs m;
  m.message_id = firm + user + std::to_string(day);
  m.firm_id = std::move(firm);
  m.day_index = day;
  m.user.user_id = std::move(user);
  m.user.follower_count = followers;
  m.emotion = one_hot(e);
  return m;
}

}  // namespace

TEST_CASE("day 0 resolution by announcement timing") {
  auto cal = weekdays();
  using corpus::Timing;
  CHECK(resolve_day0(ann("A", "2024-01-09T12:00:00Z", Timing::before_open), cal) == Date(2024, 1, 9));
  CHECK(resolve_day0(ann("A", "2024-01-09T22:00:00Z", Timing::after_close), cal) == Date(2024, 1, 10));
  CHECK(resolve_day0(ann("A", "2024-01-12T22:00:00Z", Timing::after_close), cal) == Date(2024, 1, 15));
  CHECK(resolve_day0(ann("A", "2024-01-13T12:00:00Z", Timing::before_open), cal) == Date(2024, 1, 15));
  CHECK_THROWS_AS(resolve_day0(ann("A", "2024-03-05T12:00:00Z", Timing::before_open), cal), DataError);
  CHECK_THROWS_AS(resolve_day0(ann("A", "2024-02-02T22:00:00Z", Timing::after_close), cal), DataError);
}

TEST_CASE("message day assignment around the close and weekends") {
  auto cal = weekdays();
  CHECK(cal[*message_day_index(Timestamp::parse("2024-01-09T15:00:00Z"), cal)] == Date(2024, 1, 9));
  CHECK(cal[*message_day_index(Timestamp::parse("2024-01-09T21:00:00Z"), cal)] == Date(2024, 1, 10));
  CHECK(cal[*message_day_index(Timestamp::parse("2024-01-06T10:00:00Z"), cal)] == Date(2024, 1, 8));
  CHECK_FALSE(message_day_index(Timestamp::parse("2024-02-02T22:00:00Z"), cal).has_value());
}

TEST_CASE("event window dates and truncation") {
  auto cal = weekdays();
  auto w = make_window(cal, *cal.index_of(Date(2024, 1, 10)), -2, 1, "A|Q");
  REQUIRE(w.dates.size() == 4);
  CHECK(w.dates.front() == Date(2024, 1, 8));
  CHECK(w.dates.back() == Date(2024, 1, 11));
  CHECK(w.day0 == Date(2024, 1, 10));
  auto t = make_window(cal, cal.size() - 1, -1, 3);
  CHECK(t.dates.size() == 2);
}

TEST_CASE("follower weight") {
  CHECK(follower_weight(0) == 1.0);
  CHECK(follower_weight(std::exp(1.0) - 1) == doctest::Approx(2.0).epsilon(1e-15));
  double prev = 0;
  for (double f : {0.0, 1.0, 10.0, 1e3, 1e6}) {
    CHECK(follower_weight(f) > prev);
    prev = follower_weight(f);
  }
  CHECK(like_weight(0) == 1.0);
}

TEST_CASE("weighted emotion aggregate") {
  std::vector<EmotionVector> e{one_hot(Emotion::happy), one_hot(Emotion::sad)};
  std::vector<double> w{1, 3};
  auto a = *aggregate_emotions(e, w);
  CHECK(at(a, Emotion::happy) == doctest::Approx(0.25));
  CHECK(at(a, Emotion::sad) == doctest::Approx(0.75));
  CHECK_FALSE(aggregate_emotions(std::span<const EmotionVector>{}, std::span<const double>{}).has_value());

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EmotionVector> xs(5);
    std::vector<double> ws(5), scaled(5);
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0;
      for (auto& v : xs[i]) s += (v = rng.uniform(0, 1));
      for (auto& v : xs[i]) v /= s;
      ws[i] = rng.uniform(0.1, 5);
      scaled[i] = 7.5 * ws[i];
    }
    auto agg = *aggregate_emotions(xs, ws);
    auto agg2 = *aggregate_emotions(xs, scaled);
    CHECK(std::accumulate(agg.begin(), agg.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < kNumEmotions; ++k) {
      CHECK(agg[k] == doctest::Approx(agg2[k]).epsilon(1e-12));
      double lo = 1, hi = 0;
      for (const auto& x : xs) lo = std::min(lo, x[k]), hi = std::max(hi, x[k]);
      CHECK(agg[k] >= lo - 1e-12);
      CHECK(agg[k] <= hi + 1e-12);
    }
  }
}

TEST_CASE("sentiment aggregate") {
  std::vector<weaklabel::SentimentScore> s{score(0.9), score(0.1)};
  std::vector<double> w{1, 1};
  CHECK(aggregate_sentiment(s, w) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<weaklabel::SentimentScore> one{score(0.8)};
  std::vector<double> w1{1};
  CHECK(aggregate_sentiment(one, w1) == doctest::Approx(0.8 / 1.8).epsilon(1e-14));
  std::vector<weaklabel::SentimentScore> neutral{score(0.5), score(0.495)};
  CHECK(aggregate_sentiment(neutral, w) == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<weaklabel::SentimentScore> xs, flipped;
    std::vector<double> ws;
    for (int i = 0; i < 6; ++i) {
      double p = rng.uniform(0, 1);
      xs.push_back(score(p));
      flipped.push_back(score(1 - p));
      ws.push_back(rng.uniform(0.5, 3));
    }
    CHECK(aggregate_sentiment(flipped, ws) == doctest::Approx(-aggregate_sentiment(xs, ws)).epsilon(1e-12));
  }
}

TEST_CASE("winsorize at nearest-rank quantiles") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto w = winsorize(x, 0.1, 0.9);
  CHECK(w.front() == 1);
  CHECK(w.back() == 9);
  CHECK(w[8] == 9);
  CHECK(winsorize(w, 0.1, 0.9) == w);
  std::vector<double> c(8, 3.5);
  CHECK(winsorize(c) == c);
  std::vector<double> gap{kNaN, 100, 1, 2, 3};
  auto g = winsorize(gap, 0.25, 0.75);
  CHECK(std::isnan(g[0]));
  CHECK(g[1] == 3);
  CHECK(g[2] == 1);
  CHECK_THROWS_AS(winsorize({}), InvalidArgument);
  CHECK_THROWS_AS(winsorize(x, 0.9, 0.1), InvalidArgument);
}

TEST_CASE("return volatility") {
  std::vector<double> r{0, 0.02};
  CHECK(volatility(r) == doctest::Approx(0.0141421356).epsilon(1e-9));
  std::vector<double> c(5, 0.01);
  CHECK(volatility(c) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> one{0.1};
  CHECK(std::isnan(volatility(one)));
  std::vector<double> x{0.01, -0.03, 0.02, 0.005}, y;
  for (double v : x) y.push_back(3 * v + 0.7);
  CHECK(volatility(y) == doctest::Approx(3 * volatility(x)).epsilon(1e-12));
}

TEST_CASE("panel assembly") {
  auto cal = weekdays();
  std::vector<corpus::Announcement> anns{ann("A", "2024-01-24T12:00:00Z", corpus::Timing::before_open),
                                         ann("B", "2024-01-24T12:00:00Z", corpus::Timing::before_open)};
  auto d0 = *cal.index_of(Date(2024, 1, 24));
  std::vector<MessageObs> msgs{msg("A", d0 - 5, "u1", Emotion::happy, 0), msg("A", d0 - 3, "u2", Emotion::sad, 0),
                               msg("A", d0, "u1", Emotion::fear), msg("B", d0 - 4, "u9", Emotion::happy),
                               msg("B", d0 - 3, "u9", Emotion::sad)};
  PanelInputs in;
  in.announcements = &anns;
  in.calendar = &cal;
  in.messages = &msgs;
  PanelConfig cfg;
  cfg.winsorize = false;
  auto res = assemble_panel(in, cfg);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.dropped_min_users == 1);
  const auto& r = res.rows[0];
  CHECK(r.announcement_key == "A|2024Q1");
  CHECK(r.n_users == 2);
  CHECK(at(r.emo_pre, Emotion::happy) == doctest::Approx(0.5));
  CHECK(at(r.emo_evt, Emotion::fear) == doctest::Approx(1.0));

  cfg.scheme = WeightScheme::equal;
  auto eq = assemble_panel(in, cfg);
  CHECK(eq.rows[0].emo_pre == r.emo_pre);

  cfg.filter = [](const MessageObs& m) { return m.user.user_id != "u2"; };
  CHECK(assemble_panel(in, cfg).rows.empty());

  auto stray = msgs;
  stray.push_back(msg("Z", d0, "u3", Emotion::anger));
  in.messages = &stray;
  CHECK_THROWS_AS(assemble_panel(in, PanelConfig{}), DataError);
  in.messages = &msgs;
  ExretMap ex{{"Q|nope", {1, 2, 3}}};
  in.exret = &ex;
  CHECK_THROWS_AS(assemble_panel(in, PanelConfig{}), DataError);
}

TEST_CASE("panel CSV round trip") {
  PanelRow r;
  r.firm_id = "F1";
  r.quarter_id = "2024Q1";
  r.announcement_key = "F1|2024Q1";
  r.day0 = Date(2024, 1, 24);
  r.emo_pre = one_hot(Emotion::surprise);
  r.emo_evt.fill(kNaN);
  r.sentiment_pre = 0.125;
  r.sue = -1.5;
  r.n_messages = 4;
  r.n_users = 3;
  emopanel::testing::TempDir dir("panel");
  write_panel_csv(dir.file("p.csv"), {r});
  auto back = read_panel_csv(dir.file("p.csv"));
  REQUIRE(back.size() == 1);
  CHECK(back[0].announcement_key == r.announcement_key);
  CHECK(back[0].day0 == r.day0);
  CHECK(back[0].emo_pre == r.emo_pre);
  for (double v : back[0].emo_evt) CHECK(std::isnan(v));
  CHECK(std::isnan(back[0].volatility));
  CHECK(back[0].sue == -1.5);
  CHECK(back[0].n_users == 3);
  CHECK(read_csv(dir.file("p.csv")).header == panel_columns());
}

TEST_CASE("variant names") {
  auto v = standard_variants();
  std::set<std::string> names;
  for (const auto& x : v) names.insert(x.name);
  CHECK(names.count("weight_like"));
  CHECK(names.count("weight_equal"));
  CHECK(names.count("channel_original"));
  CHECK(names.size() == v.size());
}
