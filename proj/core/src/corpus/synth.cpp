#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "emopanel/corpus.hpp"
#include "emopanel/resources.hpp"

namespace emopanel::corpus {

namespace {

std::string fmt_id(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

Timestamp at_time(Date d, int seconds) {
  return Timestamp(std::chrono::sys_seconds(d.sys_days()) + std::chrono::seconds(seconds));
}

Date quarter_start(int year, int quarter) { return Date(year, static_cast<unsigned>(3 * (quarter - 1) + 1), 1); }

enum class Kind { emotional, neutral, chat };

struct Draft {
  std::string user_id;
  std::vector<std::string> tickers;
  std::string body;
  Timestamp ts;
  AuthorSentiment tag = AuthorSentiment::unclassified;
  std::optional<Emotion> truth;
  bool retweet = false;
  bool link = false;
  std::int64_t likes = 0;
};

class Generator {
 public:
  Generator(std::uint64_t seed, const SynthConfig& cfg)
      : cfg_(cfg), rng_(seed), text_rng_(derive_seed(seed, "text")), ret_rng_(derive_seed(seed, "returns")) {}

  SynthData run();

 private:
  void build_calendar();
  void build_users();
  void build_firms();
  void build_announcements();
  void build_messages();
  void add_noise();
  void balance_tags();
  void build_returns();
  SynthData finish();

  std::size_t trading_index_on_or_after(Date d) const {
    auto it = std::lower_bound(days_.begin(), days_.end(), d);
    if (it == days_.end()) throw InvalidArgument("synth: calendar too short");
    return static_cast<std::size_t>(it - days_.begin());
  }

  Timestamp market_time(std::size_t day) {
    // 14:30 to 21:00 UTC.
    return at_time(days_[day], static_cast<int>(rng_.uniform_int(52200, 75599)));
  }

  std::string compose(Kind kind, std::optional<Emotion> e, AuthorSentiment tag, const std::string& ticker);
  Draft make_post(Kind kind, std::optional<Emotion> e, const std::string& user, const std::string& ticker,
                  std::size_t day);
  Emotion draw_emotion(double happy_prob);
  AuthorSentiment natural_tag(Emotion e);

  SynthConfig cfg_;
  Rng rng_, text_rng_, ret_rng_;
  std::vector<Date> days_;
  Date first_quarter_;
  std::vector<UserProfile> users_;
  std::vector<std::string> firms_;
  std::vector<std::array<double, 4>> betas_;
  std::vector<int> industry_;
  std::vector<int> fiscal_q4_;  // calendar quarter in which the fiscal-year report lands
  struct Event {
    std::size_t firm;
    std::size_t day0;
    Announcement ann;
    double happy_prob;
    double planted_pct = 0;
  };
  std::vector<Event> events_;
  std::vector<Draft> drafts_;
  std::map<std::string, std::string> listing_;
  std::vector<DailyQuote> quotes_;
  std::vector<FactorRow> factors_;
  std::map<std::string, double> weight_of_user_;
};

void Generator::build_calendar() {
  Date d = cfg_.start_date;
  while (d.is_weekend()) d = d.plus_days(1);
  // Warm-up trading days, then calendar quarters for announcements.
  Date cur = d;
  for (std::size_t n = 0; n < cfg_.warmup_days; cur = cur.plus_days(1))
    if (!cur.is_weekend()) ++n;
  int y = cur.year();
  int q = static_cast<int>(cur.quarter()) + 1;
  if (q > 4) {
    q = 1;
    ++y;
  }
  first_quarter_ = quarter_start(y, q);
  int ly = y, lq = q + static_cast<int>(cfg_.n_quarters);
  ly += (lq - 1) / 4;
  lq = (lq - 1) % 4 + 1;
  Date end = quarter_start(ly, lq).plus_days(90);
  for (Date x = d; x < end; x = x.plus_days(1))
    if (!x.is_weekend()) days_.push_back(x);
}

void Generator::build_users() {
  for (std::size_t i = 0; i < cfg_.n_users; ++i) {
    UserProfile u;
    u.user_id = fmt_id("u", i, 4);
    u.follower_count = static_cast<std::int64_t>(std::floor(std::exp(rng_.normal(3.5, 1.8))));
    u.experience = static_cast<Experience>(rng_.uniform_int(0, 3));
    u.approach = static_cast<Approach>(rng_.uniform_int(0, 6));
    u.holding_period = static_cast<HoldingPeriod>(rng_.uniform_int(0, 4));
    double a = rng_.uniform();
    u.account_type = a < 0.1 ? AccountType::institution : (a < 0.9 ? AccountType::trader : AccountType::unknown);
    weight_of_user_[u.user_id] = 1.0 + std::log1p(static_cast<double>(u.follower_count));
    users_.push_back(u);
  }
}

void Generator::build_firms() {
  for (std::size_t f = 0; f < cfg_.n_firms; ++f) {
    firms_.push_back(fmt_id("F", f, 3));
    listing_[firms_.back()] = f % 2 == 0 ? "NASDAQ" : "NYSE";
    if (cfg_.fixed_betas) {
      betas_.push_back(*cfg_.fixed_betas);
    } else {
      betas_.push_back({rng_.uniform(0.6, 1.4), rng_.uniform(-0.5, 0.8), rng_.uniform(-0.5, 0.5),
                        rng_.uniform(-0.3, 0.3)});
    }
    industry_.push_back(static_cast<int>(rng_.uniform_int(1, 48)));
    fiscal_q4_.push_back(static_cast<int>(rng_.uniform_int(1, 4)));
  }
  for (std::size_t i = 0; i < std::max<std::size_t>(cfg_.n_unlisted, 1); ++i)
    listing_[fmt_id("OTC", i % 10, 3)] = "OTC";
  for (std::size_t i = 0; i < std::max<std::size_t>(cfg_.n_unmatched, 1); ++i)
    listing_[fmt_id("X", i % 10, 3)] = "NYSE";
}

void Generator::build_announcements() {
  for (std::size_t k = 0; k < cfg_.n_quarters; ++k) {
    int y = first_quarter_.year() + static_cast<int>((first_quarter_.quarter() - 1 + k) / 4);
    int q = static_cast<int>((first_quarter_.quarter() - 1 + k) % 4) + 1;
    Date qs = quarter_start(y, q);
    for (std::size_t f = 0; f < firms_.size(); ++f) {
      Date target = qs.plus_days(14 + static_cast<int>(rng_.uniform_int(0, 40)));
      std::size_t idx = trading_index_on_or_after(target);
      Announcement a;
      a.firm_id = firms_[f];
      a.timing = rng_.bernoulli(0.5) ? Timing::before_open : Timing::after_close;
      a.announce_time = at_time(days_[idx], a.timing == Timing::before_open ? 12 * 3600 + 1800 : 21 * 3600 + 1800);
      a.sue = rng_.normal();
      a.sue_lag = 0.3 * a.sue + rng_.normal(0, 0.9);
      a.loss = rng_.bernoulli(0.2) ? 1 : 0;
      a.analysts = std::log1p(static_cast<double>(rng_.uniform_int(0, 20)));
      a.inst = rng_.uniform();
      a.size = rng_.normal(7.0, 1.5);
      a.mb = std::exp(rng_.normal(1.0, 0.5));
      a.q4 = q == fiscal_q4_[f] ? 1 : 0;
      a.industry_ff48 = industry_[f];
      a.quarter_id = std::to_string(y) + "Q" + std::to_string(q);
      std::size_t day0 = a.timing == Timing::before_open ? idx : idx + 1;
      events_.push_back({f, day0, a, rng_.uniform(0.05, 0.6)});
    }
  }
}

Emotion Generator::draw_emotion(double happy_prob) {
  if (rng_.bernoulli(happy_prob)) return Emotion::happy;
  static const std::vector<Emotion> others = {Emotion::sad, Emotion::anger, Emotion::disgust, Emotion::surprise,
                                              Emotion::fear};
  return pick(rng_, others);
}

AuthorSentiment Generator::natural_tag(Emotion e) {
  switch (e) {
    case Emotion::happy:
      return AuthorSentiment::bullish;
    case Emotion::surprise:
      return rng_.bernoulli(0.5) ? AuthorSentiment::bullish : AuthorSentiment::bearish;
    case Emotion::neutral:
      return AuthorSentiment::unclassified;
    default:
      return AuthorSentiment::bearish;
  }
}

std::string Generator::compose(Kind kind, std::optional<Emotion> e, AuthorSentiment tag, const std::string& ticker) {
  const auto& w = cfg_.words;
  auto& r = text_rng_;
  std::vector<std::string> parts;
  auto fill = [&](const std::vector<std::string>& pool, int lo, int hi) {
    for (auto n = r.uniform_int(lo, hi); n > 0; --n) parts.push_back(pick(r, pool));
  };
  static const std::vector<std::string> topic = {"earnings", "eps", "guidance", "revenue",
                                                 "stock",    "shares", "price", "volume"};
  switch (kind) {
    case Kind::emotional: {
      fill(w.emotional_context, 0, 3);
      const auto& pool = w.emotion_phrases.at(*e);
      parts.push_back(pick(r, pool));
      // A glyph carries no sentiment evidence; pair it with a worded phrase.
      if (std::none_of(parts.back().begin(), parts.back().end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
        for (int tries = 0; tries < 20; ++tries) {
          const auto& p = pick(r, pool);
          if (std::any_of(p.begin(), p.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
            parts.push_back(p);
            break;
          }
        }
      }
      fill(w.emotional_context, 0, 3);
      if (r.bernoulli(0.3)) parts.push_back(pick(r, topic));
      break;
    }
    case Kind::neutral:
      fill(w.neutral_words, 2, 6);
      break;
    case Kind::chat:
      fill(w.emotional_context, 0, 3);
      fill(tag == AuthorSentiment::bearish ? w.bearish_chat : w.bullish_chat, 2, 4);
      fill(w.emotional_context, 0, 3);
      if (r.bernoulli(0.4)) parts.push_back(pick(r, topic));
      break;
  }
  for (auto& p : parts)
    for (const auto& [bad, good] : w.typos)
      if (p == good && r.bernoulli(cfg_.typo_prob)) p = bad;

  std::string cashtag = "$" + ticker;
  if (r.bernoulli(0.5))
    parts.insert(parts.begin(), cashtag);
  else
    parts.push_back(cashtag);
  std::string text;
  for (const auto& p : parts) {
    if (!text.empty()) text += ' ';
    text += p;
  }
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z' && r.bernoulli(0.5)) text[0] = static_cast<char>(text[0] - 32);
  static const std::vector<std::string> endings = {"", "", "!", ".", "!!"};
  return text + pick(r, endings);
}

Draft Generator::make_post(Kind kind, std::optional<Emotion> e, const std::string& user, const std::string& ticker,
                           std::size_t day) {
  Draft d;
  d.user_id = user;
  d.tickers = {ticker};
  d.ts = market_time(day);
  if (kind == Kind::emotional) {
    d.truth = *e;
    d.tag = natural_tag(*e);
  } else if (kind == Kind::neutral) {
    d.truth = Emotion::neutral;
  } else {
    d.tag = rng_.bernoulli(0.5) ? AuthorSentiment::bullish : AuthorSentiment::bearish;
  }
  d.body = compose(kind, e, d.tag, ticker);
  if (d.tag != AuthorSentiment::unclassified && rng_.bernoulli(cfg_.mislabeled_tag_prob))
    d.tag = d.tag == AuthorSentiment::bullish ? AuthorSentiment::bearish : AuthorSentiment::bullish;
  d.retweet = rng_.bernoulli(cfg_.retweet_prob);
  d.link = rng_.bernoulli(cfg_.hyperlink_prob);
  d.likes = rng_.uniform_int(0, 3) == 0 ? rng_.uniform_int(1, 50) : 0;
  return d;
}

void Generator::build_messages() {
  auto random_kind = [&]() {
    double u = rng_.uniform();
    return u < 0.55 ? Kind::emotional : (u < 0.75 ? Kind::neutral : Kind::chat);
  };
  for (auto& ev : events_) {
    const std::string& ticker = firms_[ev.firm];
    bool single_user = rng_.bernoulli(cfg_.single_user_window_prob);
    std::string lone = pick(rng_, users_).user_id;
    double wsum = 0, happy = 0;
    auto n_pre = rng_.uniform_int(cfg_.pre_window_min_msgs, cfg_.pre_window_max_msgs);
    for (std::int64_t i = 0; i < n_pre; ++i) {
      std::size_t day = ev.day0 - static_cast<std::size_t>(rng_.uniform_int(2, 10));
      Kind k = random_kind();
      std::optional<Emotion> e;
      if (k == Kind::emotional) e = draw_emotion(ev.happy_prob);
      const std::string& user = single_user ? lone : pick(rng_, users_).user_id;
      Draft d = make_post(k, e, user, ticker, day);
      if (d.truth) {
        double w = weight_of_user_.at(user);
        wsum += w;
        if (*d.truth == Emotion::happy) happy += w;
      }
      drafts_.push_back(std::move(d));
    }
    double happy_share = wsum > 0 ? happy / wsum : 0.0;
    ev.planted_pct = cfg_.planted_happy_coef * happy_share + cfg_.planted_sue_coef * ev.ann.sue;

    auto n_evt = rng_.uniform_int(0, cfg_.event_window_max_msgs);
    for (std::int64_t i = 0; i < n_evt; ++i) {
      std::size_t day = ev.day0 + static_cast<std::size_t>(rng_.uniform_int(0, 2)) - 1;
      Kind k = random_kind();
      std::optional<Emotion> e;
      if (k == Kind::emotional) e = draw_emotion(ev.happy_prob);
      drafts_.push_back(make_post(k, e, pick(rng_, users_).user_id, ticker, day));
    }
    for (int i = 0; i < cfg_.background_msgs_per_firm_quarter; ++i) {
      std::size_t day = ev.day0 + static_cast<std::size_t>(rng_.uniform_int(5, 40));
      if (day >= days_.size()) continue;
      Kind k = random_kind();
      std::optional<Emotion> e;
      if (k == Kind::emotional) e = draw_emotion(0.3);
      drafts_.push_back(make_post(k, e, pick(rng_, users_).user_id, ticker, day));
    }
  }
}

void Generator::add_noise() {
  auto random_day = [&]() {
    return static_cast<std::size_t>(rng_.uniform_int(static_cast<std::int64_t>(cfg_.warmup_days),
                                                     static_cast<std::int64_t>(days_.size()) - 1));
  };
  auto emotional = [&](const std::string& ticker) {
    return make_post(Kind::emotional, draw_emotion(0.3), pick(rng_, users_).user_id, ticker, random_day());
  };
  for (std::size_t i = 0; i < cfg_.n_multi_ticker && firms_.size() >= 2; ++i) {
    std::size_t a = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(firms_.size()) - 1));
    std::size_t b = (a + 1 + static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(firms_.size()) - 2))) %
                    firms_.size();
    Draft d = emotional(firms_[a]);
    d.tickers.push_back(firms_[b]);
    d.body += " $" + firms_[b];
    d.truth.reset();
    drafts_.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < cfg_.n_unlisted; ++i) {
    Draft d = emotional(fmt_id("OTC", i % 10, 3));
    d.truth.reset();
    drafts_.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < cfg_.n_unmatched; ++i) {
    Draft d = emotional(fmt_id("X", i % 10, 3));
    d.truth.reset();
    drafts_.push_back(std::move(d));
  }
  if (cfg_.automated_copies > 0 && !firms_.empty()) {
    UserProfile bot;
    bot.user_id = "u_bot";
    users_.push_back(bot);
    weight_of_user_[bot.user_id] = 1.0;
    for (std::size_t i = 0; i < cfg_.automated_copies; ++i) {
      Draft d;
      d.user_id = bot.user_id;
      d.tickers = {firms_.front()};
      d.body = "Daily picks are live for $" + firms_.front() + " now";
      d.ts = market_time(random_day());
      drafts_.push_back(std::move(d));
    }
  }
}

void Generator::balance_tags() {
  long bull = 0, bear = 0;
  for (const auto& d : drafts_) {
    bull += d.tag == AuthorSentiment::bullish;
    bear += d.tag == AuthorSentiment::bearish;
  }
  while (bull != bear) {
    AuthorSentiment want = bull < bear ? AuthorSentiment::bullish : AuthorSentiment::bearish;
    const auto& ev = pick(rng_, events_);
    std::size_t day = std::min(days_.size() - 1, ev.day0 + static_cast<std::size_t>(rng_.uniform_int(5, 40)));
    Draft d;
    d.user_id = pick(rng_, users_).user_id;
    d.tickers = {firms_[ev.firm]};
    d.ts = market_time(day);
    d.tag = want;
    d.body = compose(Kind::chat, std::nullopt, want, firms_[ev.firm]);
    drafts_.push_back(std::move(d));
    (want == AuthorSentiment::bullish ? bull : bear) += 1;
  }
}

void Generator::build_returns() {
  auto& r = ret_rng_;
  factors_.reserve(days_.size());
  for (const auto& day : days_) {
    FactorRow f;
    f.date = day;
    f.mktrf = r.normal(cfg_.mktrf_mean, cfg_.mktrf_sd);
    f.smb = r.normal(0, cfg_.style_factor_sd);
    f.hml = r.normal(0, cfg_.style_factor_sd);
    f.umd = r.normal(0, cfg_.style_factor_sd);
    f.rf = cfg_.rf;
    factors_.push_back(f);
  }
  std::vector<std::vector<double>> bump(firms_.size(), std::vector<double>(days_.size(), 0.0));
  for (const auto& ev : events_)
    if (ev.day0 < days_.size()) bump[ev.firm][ev.day0] += ev.planted_pct / 100.0;

  for (std::size_t f = 0; f < firms_.size(); ++f) {
    double price = r.uniform(20, 100);
    const auto& b = betas_[f];
    for (std::size_t t = 0; t < days_.size(); ++t) {
      const auto& x = factors_[t];
      double ret = x.rf + b[0] * x.mktrf + b[1] * x.smb + b[2] * x.hml + b[3] * x.umd + bump[f][t];
      if (cfg_.idio_sd > 0) ret += r.normal(0, cfg_.idio_sd);
      ret = std::max(ret, -0.95);
      price *= 1.0 + ret;
      DailyQuote q;
      q.firm_id = firms_[f];
      q.date = days_[t];
      q.ret = ret;
      q.bid = price * (1.0 - cfg_.bid_ask_half_spread);
      q.ask = price * (1.0 + cfg_.bid_ask_half_spread);
      quotes_.push_back(q);
    }
  }
}

SynthData Generator::finish() {
  std::vector<std::size_t> order(drafts_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return drafts_[a].ts < drafts_[b].ts; });

  SynthData out;
  out.messages.reserve(drafts_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Draft& d = drafts_[order[i]];
    RawMessage m;
    m.message_id = fmt_id("m", i, 7);
    m.user_id = d.user_id;
    m.tickers = d.tickers;
    m.timestamp = d.ts;
    m.like_count = d.likes;
    m.is_retweet = d.retweet;
    m.has_hyperlink = d.link;
    m.author_sentiment_tag = d.tag;
    m.text = d.body;
    if (d.retweet) m.text = "RT @" + pick(text_rng_, users_).user_id + ": " + m.text;
    if (d.link) m.text += " https://stocks.example.com/p/" + std::to_string(i);
    if (d.truth) out.true_emotion[m.message_id] = *d.truth;
    out.messages.push_back(std::move(m));
  }
  out.users = users_;
  for (const auto& ev : events_) out.announcements.push_back(ev.ann);
  std::stable_sort(out.announcements.begin(), out.announcements.end(), [](const auto& a, const auto& b) {
    return std::tie(a.announce_time, a.firm_id) < std::tie(b.announce_time, b.firm_id);
  });
  out.quotes = std::move(quotes_);
  out.factors = std::move(factors_);
  out.listing = listing_;
  out.matched.insert(firms_.begin(), firms_.end());
  return out;
}

SynthData Generator::run() {
  build_calendar();
  build_users();
  build_firms();
  build_announcements();
  build_messages();
  add_noise();
  balance_tags();
  build_returns();
  return finish();
}

}  // namespace

SynthWordBank SynthWordBank::defaults() {
  SynthWordBank w;
  std::map<std::string, std::string> glyph_of;
  for (const auto& [pat, name] : resources::emoticons()) glyph_of.emplace(name, pat);
  for (const auto& [seq, name] : resources::emoji()) glyph_of.emplace(name, seq);
  for (const auto& [e, entries] : resources::emotion_dictionaries()) {
    if (e == Emotion::neutral) continue;
    auto& dst = w.emotion_phrases[e];
    for (const auto& entry : entries) {
      auto g = glyph_of.find(entry);
      dst.push_back(g == glyph_of.end() ? entry : g->second);
    }
  }
  w.emotional_context = {"i",    "am",   "so",      "really",  "feeling", "about", "this",
                         "today", "now", "just",    "my",      "here",    "it",    "is",
                         "the",  "on",   "morning", "tomorrow", "we",     "name"};
  w.neutral_words = {"update", "filing", "meeting",  "schedule", "conference", "notes",  "session",
                     "watching", "list", "call",     "numbers",  "results",    "quarter", "open",
                     "close",  "report", "transcript"};
  w.bullish_chat = {"buy", "buying", "long", "calls", "breakout", "adding", "accumulate", "support",
                    "rally", "upgrade", "bull", "bullish"};
  w.bearish_chat = {"sell", "selling", "short", "puts", "breakdown", "trimming", "exiting", "resistance",
                    "downgrade", "bear", "bearish", "overbought"};
  w.typos = {{"excelent", "excellent"}, {"terible", "terrible"},   {"anoying", "annoying"},
             {"disgustng", "disgusting"}, {"suprised", "surprised"}, {"earnigns", "earnings"},
             {"bulish", "bullish"}};
  return w;
}

SynthData synth_generate(std::uint64_t seed, const SynthConfig& config) {
  if (config.n_firms < 1 || config.n_quarters < 1 || config.n_users < 1)
    throw InvalidArgument("synth_generate: sizes must be >= 1");
  if (config.pre_window_min_msgs < 0 || config.pre_window_max_msgs < config.pre_window_min_msgs)
    throw InvalidArgument("synth_generate: bad pre-window message range");
  return Generator(seed, config).run();
}

}  // namespace emopanel::corpus
