#include <doctest.h>

#include <algorithm>
#include <set>

#include "emopanel/aggregate.hpp"
#include "emopanel/corpus.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::corpus;
using emopanel::testing::TempDir;
using emopanel::testing::write_text;

namespace {

RawMessage msg(std::string id, std::string user, std::vector<std::string> tickers, std::string text = "hello") {
  RawMessage m;
  m.message_id = std::move(id);
  m.user_id = std::move(user);
  m.tickers = std::move(tickers);
  m.text = std::move(text);
  m.timestamp = Timestamp::parse("2016-01-04T15:00:00Z");
  return m;
}

const std::map<std::string, std::string> kListing{{"AAA", "NASDAQ"}, {"BBB", "NYSE"}, {"OTC", "OTC"}};
const std::set<std::string> kMatched{"AAA", "BBB"};

std::size_t stage(const FilterResult& r, const std::string& name) {
  for (const auto& s : r.stages)
    if (s.stage == name) return s.retained;
  FAIL("no stage " << name);
  return 0;
}

}  // namespace

TEST_CASE("load_corpus: empty file, one line, missing timestamp") {
  TempDir dir("corpus");
  write_text(dir.file("empty.jsonl"), "");
  write_text(dir.file("users.jsonl"), "");
  CHECK(load_corpus(dir.file("empty.jsonl"), dir.file("users.jsonl")).messages.empty());

  write_text(dir.file("one.jsonl"),
             R"({"message_id":"m1","user_id":"u1","tickers":["AAA"],"text":"hi","timestamp":"2016-01-04T15:00:00Z"})"
             "\n");
  auto c = load_corpus(dir.file("one.jsonl"), dir.file("users.jsonl"));
  REQUIRE(c.messages.size() == 1);
  CHECK(c.messages[0].author_sentiment_tag == AuthorSentiment::unclassified);
  CHECK(c.users_missing == std::vector<std::string>{"u1"});

  write_text(dir.file("bad.jsonl"), R"({"message_id":"m1","user_id":"u1","tickers":["AAA"],"text":"hi"})"
                                    "\n");
  try {
    load_corpus(dir.file("bad.jsonl"), dir.file("users.jsonl"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("load_corpus rejects duplicate ids and malformed JSON with line numbers") {
  TempDir dir("corpus_dup");
  write_text(dir.file("users.jsonl"), R"({"user_id":"u1","follower_count":10,"experience":"novice"})"
                                      "\n");
  std::string line =
      R"({"message_id":"m1","user_id":"u1","tickers":["AAA"],"text":"hi","timestamp":"2016-01-04T15:00:00Z"})";
  write_text(dir.file("dup.jsonl"), line + "\n" + line + "\n");
  CHECK_THROWS_AS(load_corpus(dir.file("dup.jsonl"), dir.file("users.jsonl")), DataError);

  write_text(dir.file("broken.jsonl"), line + "\n{not json\n");
  try {
    load_corpus(dir.file("broken.jsonl"), dir.file("users.jsonl"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("records survive a JSONL round trip") {
  auto m = msg("m9", "u3", {"AAA"}, "caf\xc3\xa9 \"quoted\"");
  m.like_count = 4;
  m.is_retweet = true;
  m.author_sentiment_tag = AuthorSentiment::bearish;
  auto back = parse_message_json(to_json_line(m));
  CHECK(back.text == m.text);
  CHECK(back.like_count == 4);
  CHECK(back.is_retweet);
  CHECK(back.author_sentiment_tag == AuthorSentiment::bearish);
  CHECK(back.timestamp == m.timestamp);

  UserProfile u{"u3", 120, Experience::professional, Approach::value, HoldingPeriod::long_term,
                AccountType::institution};
  auto ub = parse_user_json(to_json_line(u));
  CHECK(ub.follower_count == 120);
  CHECK(ub.holding_period == HoldingPeriod::long_term);
  CHECK(ub.account_type == AccountType::institution);
  CHECK_THROWS_AS(parse_user_json(R"({"user_id":"x","follower_count":-1})"), DataError);
}

TEST_CASE("filter_sample: two tickers drop at the single-ticker stage") {
  std::vector<RawMessage> ms{msg("1", "u1", {"AAA"}), msg("2", "u2", {"AAA", "BBB"}), msg("3", "u3", {"AAA"})};
  auto r = filter_sample(ms, {}, kListing, kMatched, 1);
  CHECK(stage(r, "nasdaq_nyse_ticker") == 3);
  CHECK(stage(r, "single_ticker") == 2);
  CHECK(std::none_of(r.messages.begin(), r.messages.end(), [](const auto& m) { return m.message_id == "2"; }));
}

TEST_CASE("filter_sample: 1001 identical posts by one user are all automated") {
  std::vector<RawMessage> ms;
  for (int i = 0; i < 1001; ++i) ms.push_back(msg("bot" + std::to_string(i), "bot", {"AAA"}, "Buy   NOW"));
  for (int i = 0; i < 1000; ++i) ms.push_back(msg("ok" + std::to_string(i), "busy", {"AAA"}, "same words"));
  ms.push_back(msg("h", "human", {"AAA"}, "buy now"));
  auto r = filter_sample(ms, {}, kListing, kMatched, 1);
  CHECK(stage(r, "not_automated") == 1001);
  for (const auto& m : r.messages) CHECK(m.user_id != "bot");
}

TEST_CASE("filter_sample: a firm-window with one distinct user is dropped") {
  std::vector<RawMessage> ms{msg("1", "u1", {"AAA"}), msg("2", "u1", {"AAA"}), msg("3", "u1", {"BBB"}),
                             msg("4", "u2", {"BBB"})};
  auto r = filter_sample(ms, {}, kListing, kMatched, 2);
  CHECK(stage(r, "window_users") == 2);
  for (const auto& m : r.messages) CHECK(m.tickers.front() == "BBB");
}

TEST_CASE("filter_sample: unlisted, unmatched and out-of-window messages") {
  std::vector<RawMessage> ms{msg("1", "u1", {"OTC"}), msg("2", "u1", {"ZZZ"}), msg("3", "u1", {"AAA"}),
                             msg("4", "u2", {"AAA"})};
  std::set<std::string> matched{"BBB"};
  auto r = filter_sample(ms, {}, kListing, matched, 1);
  CHECK(stage(r, "nasdaq_nyse_ticker") == 2);
  CHECK(stage(r, "matched_ticker") == 0);

  FilterOptions opt;
  opt.window_key = [](const RawMessage& m) -> std::optional<std::string> {
    if (m.message_id == "3") return std::nullopt;
    return m.tickers.front();
  };
  auto w = filter_sample(ms, {}, kListing, kMatched, 1, opt);
  REQUIRE(w.messages.size() == 1);
  CHECK(w.messages[0].message_id == "4");
  CHECK_THROWS_AS(filter_sample(ms, {}, kListing, kMatched, 0), InvalidArgument);
}

TEST_CASE("filter_sample properties on synthetic data: idempotent, monotone stage counts") {
  SynthConfig cfg;
  cfg.n_firms = 8;
  cfg.n_quarters = 2;
  cfg.n_users = 40;
  cfg.warmup_days = 40;
  cfg.automated_copies = 30;
  auto d = synth_generate(11, cfg);
  FilterOptions opt;
  opt.automated_threshold = 20;
  auto once = filter_sample(d.messages, d.users, d.listing, d.matched, 2, opt);
  for (std::size_t i = 1; i < once.stages.size(); ++i) CHECK(once.stages[i].retained <= once.stages[i - 1].retained);
  CHECK(once.stages.front().retained == d.messages.size());
  CHECK(once.stages.back().retained == once.messages.size());
  CHECK(once.stages.size() == 6);
  // every restriction bites on the synthetic corpus
  for (std::size_t i = 1; i + 1 < once.stages.size(); ++i) CHECK(once.stages[i].retained < once.stages[i - 1].retained);

  auto twice = filter_sample(once.messages, d.users, d.listing, d.matched, 2, opt);
  REQUIRE(twice.messages.size() == once.messages.size());
  for (std::size_t i = 0; i < once.messages.size(); ++i)
    CHECK(twice.messages[i].message_id == once.messages[i].message_id);
}

TEST_CASE("classify_information_channel partitions messages") {
  auto m = msg("1", "u", {"AAA"});
  CHECK(classify_information_channel(m) == Channel::original);
  m.is_retweet = true;
  CHECK(classify_information_channel(m) == Channel::dissemination);
  m.is_retweet = false;
  m.has_hyperlink = true;
  CHECK(classify_information_channel(m) == Channel::dissemination);

  auto d = synth_generate(3);
  std::size_t orig = 0, diss = 0;
  for (const auto& x : d.messages) {
    bool o = !x.is_retweet && !x.has_hyperlink;
    (classify_information_channel(x) == Channel::original ? orig : diss) += 1;
    CHECK((classify_information_channel(x) == Channel::original) == o);
  }
  CHECK(orig + diss == d.messages.size());
  CHECK(orig > 0);
  CHECK(diss > 0);
}

TEST_CASE("synth_generate is deterministic per seed") {
  SynthConfig cfg;
  cfg.n_firms = 5;
  cfg.n_quarters = 2;
  cfg.warmup_days = 60;
  auto a = synth_generate(5, cfg), b = synth_generate(5, cfg), c = synth_generate(6, cfg);
  REQUIRE(a.messages.size() == b.messages.size());
  for (std::size_t i = 0; i < a.messages.size(); ++i) CHECK(to_json_line(a.messages[i]) == to_json_line(b.messages[i]));
  REQUIRE(a.quotes.size() == b.quotes.size());
  for (std::size_t i = 0; i < a.quotes.size(); ++i) CHECK(a.quotes[i].ret == b.quotes[i].ret);
  bool differs = a.messages.size() != c.messages.size();
  for (std::size_t i = 0; !differs && i < a.messages.size(); ++i) differs = a.messages[i].text != c.messages[i].text;
  CHECK(differs);
}

TEST_CASE("synth_generate: zero noise and unit market beta gives rf + mktrf") {
  SynthConfig cfg;
  cfg.n_firms = 4;
  cfg.n_quarters = 2;
  cfg.warmup_days = 60;
  cfg.idio_sd = 0;
  cfg.fixed_betas = std::array<double, 4>{1, 0, 0, 0};
  cfg.planted_happy_coef = 0;
  cfg.planted_sue_coef = 0;
  auto d = synth_generate(8, cfg);
  std::map<Date, FactorRow> f;
  for (const auto& r : d.factors) f[r.date] = r;
  REQUIRE_FALSE(d.quotes.empty());
  for (const auto& q : d.quotes) CHECK(q.ret == doctest::Approx(f.at(q.date).rf + f.at(q.date).mktrf).epsilon(1e-12));
}

TEST_CASE("synthetic records satisfy the data-model invariants") {
  auto d = synth_generate(21);
  for (const auto& a : d.announcements) {
    CHECK(a.inst >= 0);
    CHECK(a.inst <= 1);
    CHECK(a.industry_ff48 >= 1);
    CHECK(a.industry_ff48 <= 48);
  }
  for (const auto& q : d.quotes) {
    CHECK(q.ret > -1);
    CHECK(q.bid > 0);
    CHECK(q.ask >= q.bid);
  }
  for (std::size_t i = 1; i < d.factors.size(); ++i) CHECK(d.factors[i - 1].date < d.factors[i].date);
  for (const auto& m : d.messages) {
    CHECK_FALSE(m.tickers.empty());
    CHECK(m.like_count >= 0);
  }
}

TEST_CASE("csv loaders round-trip synthetic tables") {
  TempDir dir("csv");
  SynthConfig cfg;
  cfg.n_firms = 3;
  cfg.n_quarters = 2;
  cfg.warmup_days = 40;
  auto d = synth_generate(2, cfg);
  write_announcements(dir.file("a.csv"), d.announcements);
  write_quotes(dir.file("q.csv"), d.quotes);
  write_factors(dir.file("f.csv"), d.factors);
  auto a = load_announcements(dir.file("a.csv"));
  REQUIRE(a.size() == d.announcements.size());
  CHECK(a[0].key() == d.announcements[0].key());
  CHECK(a[0].sue == d.announcements[0].sue);
  CHECK(a[0].timing == d.announcements[0].timing);
  auto q = load_quotes(dir.file("q.csv"));
  REQUIRE(q.size() == d.quotes.size());
  CHECK(q.back().ask == d.quotes.back().ask);
  auto f = load_factors(dir.file("f.csv"));
  REQUIRE(f.size() == d.factors.size());
  CHECK(f[5].umd == d.factors[5].umd);

  write_text(dir.file("bad_q.csv"), "firm_id,date,ret,bid,ask\nAAA,2016-01-04,0.01,10,9\n");
  CHECK_THROWS_AS(load_quotes(dir.file("bad_q.csv")), DataError);
  write_text(dir.file("bad_f.csv"), "date,mktrf,smb,hml,umd,rf\n2016-01-05,0,0,0,0,0\n2016-01-04,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_factors(dir.file("bad_f.csv")), DataError);
}
