#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "emopanel/corpus.hpp"

namespace emopanel::corpus {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::pair<std::string_view, Enum>, N>& table,
                std::string_view what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  throw DataError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "unknown";
}

constexpr std::array<std::pair<std::string_view, AuthorSentiment>, 3> kSentiment{{
    {"bullish", AuthorSentiment::bullish},
    {"bearish", AuthorSentiment::bearish},
    {"unclassified", AuthorSentiment::unclassified},
}};
constexpr std::array<std::pair<std::string_view, Experience>, 4> kExperience{{
    {"novice", Experience::novice},
    {"intermediate", Experience::intermediate},
    {"professional", Experience::professional},
    {"unknown", Experience::unknown},
}};
constexpr std::array<std::pair<std::string_view, Approach>, 7> kApproach{{
    {"technical", Approach::technical},
    {"fundamental", Approach::fundamental},
    {"momentum", Approach::momentum},
    {"value", Approach::value},
    {"growth", Approach::growth},
    {"macro", Approach::macro},
    {"unknown", Approach::unknown},
}};
constexpr std::array<std::pair<std::string_view, HoldingPeriod>, 5> kHolding{{
    {"day", HoldingPeriod::day},
    {"swing", HoldingPeriod::swing},
    {"position", HoldingPeriod::position},
    {"long_term", HoldingPeriod::long_term},
    {"unknown", HoldingPeriod::unknown},
}};
constexpr std::array<std::pair<std::string_view, AccountType>, 3> kAccount{{
    {"institution", AccountType::institution},
    {"trader", AccountType::trader},
    {"unknown", AccountType::unknown},
}};
constexpr std::array<std::pair<std::string_view, Timing>, 2> kTiming{{
    {"before_open", Timing::before_open},
    {"after_close", Timing::after_close},
}};

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) throw DataError(std::string("missing field '") + field + "'");
  return *it;
}

template <typename F>
auto with_line(std::size_t lineno, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DataError& e) {
    if (e.line() != 0 || lineno == 0) throw;
    throw DataError(e.what(), lineno);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what(), lineno);
  }
}

template <typename T, typename Parse>
std::vector<T> load_jsonl(const std::string& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    out.push_back(parse(line, lineno));
  }
  return out;
}

}  // namespace

std::string_view to_string(AuthorSentiment v) { return enum_name(v, kSentiment); }
std::string_view to_string(Experience v) { return enum_name(v, kExperience); }
std::string_view to_string(Approach v) { return enum_name(v, kApproach); }
std::string_view to_string(HoldingPeriod v) { return enum_name(v, kHolding); }
std::string_view to_string(AccountType v) { return enum_name(v, kAccount); }
std::string_view to_string(Timing v) { return enum_name(v, kTiming); }
std::string_view to_string(Channel v) { return v == Channel::original ? "original" : "dissemination"; }

AuthorSentiment parse_author_sentiment(std::string_view s) { return parse_enum(s, kSentiment, "sentiment tag"); }
Experience parse_experience(std::string_view s) { return parse_enum(s, kExperience, "experience"); }
Approach parse_approach(std::string_view s) { return parse_enum(s, kApproach, "approach"); }
HoldingPeriod parse_holding_period(std::string_view s) { return parse_enum(s, kHolding, "holding period"); }
AccountType parse_account_type(std::string_view s) { return parse_enum(s, kAccount, "account type"); }
Timing parse_timing(std::string_view s) { return parse_enum(s, kTiming, "timing"); }

RawMessage parse_message_json(std::string_view line, std::size_t lineno) {
  return with_line(lineno, [&] {
    json j = json::parse(line);
    if (!j.is_object()) throw DataError("record is not a JSON object");
    RawMessage m;
    m.message_id = require(j, "message_id").get<std::string>();
    m.user_id = require(j, "user_id").get<std::string>();
    m.tickers = require(j, "tickers").get<std::vector<std::string>>();
    if (m.tickers.empty()) throw DataError("message " + m.message_id + " has no tickers");
    m.text = require(j, "text").get<std::string>();
    m.timestamp = Timestamp::parse(require(j, "timestamp").get<std::string>());
    m.like_count = j.value("like_count", std::int64_t{0});
    if (m.like_count < 0) throw DataError("negative like_count");
    m.is_retweet = j.value("is_retweet", false);
    m.has_hyperlink = j.value("has_hyperlink", false);
    m.author_sentiment_tag = parse_author_sentiment(j.value("author_sentiment_tag", std::string("unclassified")));
    return m;
  });
}

UserProfile parse_user_json(std::string_view line, std::size_t lineno) {
  return with_line(lineno, [&] {
    json j = json::parse(line);
    if (!j.is_object()) throw DataError("record is not a JSON object");
    UserProfile u;
    u.user_id = require(j, "user_id").get<std::string>();
    u.follower_count = j.value("follower_count", std::int64_t{0});
    if (u.follower_count < 0) throw DataError("negative follower_count");
    u.experience = parse_experience(j.value("experience", std::string("unknown")));
    u.approach = parse_approach(j.value("approach", std::string("unknown")));
    u.holding_period = parse_holding_period(j.value("holding_period", std::string("unknown")));
    u.account_type = parse_account_type(j.value("account_type", std::string("unknown")));
    return u;
  });
}

std::string to_json_line(const RawMessage& m) {
  json j;
  j["message_id"] = m.message_id;
  j["user_id"] = m.user_id;
  j["tickers"] = m.tickers;
  j["text"] = m.text;
  j["timestamp"] = m.timestamp.iso();
  j["like_count"] = m.like_count;
  j["is_retweet"] = m.is_retweet;
  j["has_hyperlink"] = m.has_hyperlink;
  j["author_sentiment_tag"] = std::string(to_string(m.author_sentiment_tag));
  return j.dump();
}

std::string to_json_line(const UserProfile& u) {
  json j;
  j["user_id"] = u.user_id;
  j["follower_count"] = u.follower_count;
  j["experience"] = std::string(to_string(u.experience));
  j["approach"] = std::string(to_string(u.approach));
  j["holding_period"] = std::string(to_string(u.holding_period));
  j["account_type"] = std::string(to_string(u.account_type));
  return j.dump();
}

std::vector<RawMessage> load_messages(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<RawMessage> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto m = parse_message_json(line, lineno);
    if (!seen.insert(m.message_id).second)
      throw DataError("duplicate message_id '" + m.message_id + "'", lineno);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<UserProfile> load_users(const std::string& path) {
  return load_jsonl<UserProfile>(path, parse_user_json);
}

Corpus load_corpus(const std::string& messages_path, const std::string& users_path) {
  Corpus c;
  c.messages = load_messages(messages_path);
  c.users = load_users(users_path);
  std::unordered_set<std::string> known;
  for (const auto& u : c.users) known.insert(u.user_id);
  std::set<std::string> missing;
  for (const auto& m : c.messages)
    if (!known.count(m.user_id)) missing.insert(m.user_id);
  c.users_missing.assign(missing.begin(), missing.end());
  return c;
}

void write_messages(const std::string& path, const std::vector<RawMessage>& msgs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& m : msgs) out << to_json_line(m) << '\n';
}

void write_users(const std::string& path, const std::vector<UserProfile>& users) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& u : users) out << to_json_line(u) << '\n';
}

// CSV ----------------------------------------------------------------------

std::vector<Announcement> load_announcements(const std::string& path) {
  auto t = read_csv(path);
  const auto c_firm = t.column("firm_id"), c_time = t.column("announce_time"), c_timing = t.column("timing"),
             c_sue = t.column("sue"), c_sue_lag = t.column("sue_lag"), c_loss = t.column("loss"),
             c_anl = t.column("analysts"), c_inst = t.column("inst"), c_size = t.column("size"),
             c_mb = t.column("mb"), c_q4 = t.column("q4"), c_ind = t.column("industry_ff48"),
             c_q = t.column("quarter_id");
  std::vector<Announcement> out;
  std::size_t line = 1;
  for (const auto& r : t.rows) {
    ++line;
    with_line(line, [&] {
      Announcement a;
      a.firm_id = r[c_firm];
      a.announce_time = Timestamp::parse(r[c_time]);
      a.timing = parse_timing(r[c_timing]);
      a.sue = parse_double(r[c_sue]);
      a.sue_lag = parse_double(r[c_sue_lag]);
      a.loss = static_cast<int>(parse_int(r[c_loss]));
      a.analysts = parse_double(r[c_anl]);
      a.inst = parse_double(r[c_inst]);
      if (!(a.inst >= 0.0 && a.inst <= 1.0)) throw DataError("inst outside [0,1]");
      a.size = parse_double(r[c_size]);
      a.mb = parse_double(r[c_mb]);
      a.q4 = static_cast<int>(parse_int(r[c_q4]));
      a.industry_ff48 = static_cast<int>(parse_int(r[c_ind]));
      if (a.industry_ff48 < 1 || a.industry_ff48 > 48) throw DataError("industry_ff48 outside 1..48");
      a.quarter_id = r[c_q];
      out.push_back(std::move(a));
      return 0;
    });
  }
  return out;
}

std::vector<DailyQuote> load_quotes(const std::string& path) {
  auto t = read_csv(path);
  const auto c_firm = t.column("firm_id"), c_date = t.column("date"), c_ret = t.column("ret"),
             c_bid = t.column("bid"), c_ask = t.column("ask");
  std::vector<DailyQuote> out;
  out.reserve(t.rows.size());
  std::size_t line = 1;
  for (const auto& r : t.rows) {
    ++line;
    with_line(line, [&] {
      DailyQuote q;
      q.firm_id = r[c_firm];
      q.date = Date::parse(r[c_date]);
      q.ret = parse_double(r[c_ret]);
      if (!(q.ret > -1.0)) throw DataError("return must exceed -1");
      q.bid = parse_double(r[c_bid]);
      q.ask = parse_double(r[c_ask]);
      if (!is_missing(q.bid) || !is_missing(q.ask)) {
        if (!(q.bid > 0.0 && q.ask >= q.bid)) throw DataError("quote requires ask >= bid > 0");
      }
      out.push_back(std::move(q));
      return 0;
    });
  }
  return out;
}

std::vector<FactorRow> load_factors(const std::string& path) {
  auto t = read_csv(path);
  const auto c_date = t.column("date"), c_m = t.column("mktrf"), c_s = t.column("smb"), c_h = t.column("hml"),
             c_u = t.column("umd"), c_rf = t.column("rf");
  std::vector<FactorRow> out;
  std::size_t line = 1;
  for (const auto& r : t.rows) {
    ++line;
    with_line(line, [&] {
      FactorRow f;
      f.date = Date::parse(r[c_date]);
      f.mktrf = parse_double(r[c_m]);
      f.smb = parse_double(r[c_s]);
      f.hml = parse_double(r[c_h]);
      f.umd = parse_double(r[c_u]);
      f.rf = parse_double(r[c_rf]);
      if (!out.empty() && !(out.back().date < f.date)) throw DataError("factor dates must be strictly increasing");
      out.push_back(f);
      return 0;
    });
  }
  return out;
}

void write_announcements(const std::string& path, const std::vector<Announcement>& anns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "firm_id,announce_time,timing,sue,sue_lag,loss,analysts,inst,size,mb,q4,industry_ff48,quarter_id\n";
  for (const auto& a : anns) {
    out << a.firm_id << ',' << a.announce_time.iso() << ',' << to_string(a.timing) << ',' << format_double(a.sue)
        << ',' << format_double(a.sue_lag) << ',' << a.loss << ',' << format_double(a.analysts) << ','
        << format_double(a.inst) << ',' << format_double(a.size) << ',' << format_double(a.mb) << ',' << a.q4
        << ',' << a.industry_ff48 << ',' << a.quarter_id << '\n';
  }
}

void write_quotes(const std::string& path, const std::vector<DailyQuote>& quotes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "firm_id,date,ret,bid,ask\n";
  for (const auto& q : quotes)
    out << q.firm_id << ',' << q.date.iso() << ',' << format_double(q.ret) << ',' << format_double(q.bid) << ','
        << format_double(q.ask) << '\n';
}

void write_factors(const std::string& path, const std::vector<FactorRow>& factors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "date,mktrf,smb,hml,umd,rf\n";
  for (const auto& f : factors)
    out << f.date.iso() << ',' << format_double(f.mktrf) << ',' << format_double(f.smb) << ','
        << format_double(f.hml) << ',' << format_double(f.umd) << ',' << format_double(f.rf) << '\n';
}

std::map<std::string, std::string> load_listing(const std::string& path) {
  auto t = read_csv(path);
  const auto c_t = t.column("ticker"), c_e = t.column("exchange");
  std::map<std::string, std::string> out;
  for (const auto& r : t.rows) out[r[c_t]] = r[c_e];
  return out;
}

std::set<std::string> load_ticker_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) out.insert(std::string(t));
  }
  return out;
}

Channel classify_information_channel(const RawMessage& msg) noexcept {
  return (!msg.is_retweet && !msg.has_hyperlink) ? Channel::original : Channel::dissemination;
}

}  // namespace emopanel::corpus
