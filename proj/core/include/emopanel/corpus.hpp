#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "emopanel/common.hpp"
#include "emopanel/emotion.hpp"

/// Data model, ingestion, sample restrictions and the synthetic generator.
namespace emopanel::corpus {

enum class AuthorSentiment { bullish, bearish, unclassified };
enum class Experience { novice, intermediate, professional, unknown };
enum class Approach { technical, fundamental, momentum, value, growth, macro, unknown };
enum class HoldingPeriod { day, swing, position, long_term, unknown };
enum class AccountType { institution, trader, unknown };
enum class Timing { before_open, after_close };
enum class Channel { original, dissemination };

std::string_view to_string(AuthorSentiment v);
std::string_view to_string(Experience v);
std::string_view to_string(Approach v);
std::string_view to_string(HoldingPeriod v);
std::string_view to_string(AccountType v);
std::string_view to_string(Timing v);
std::string_view to_string(Channel v);

AuthorSentiment parse_author_sentiment(std::string_view s);
Experience parse_experience(std::string_view s);
Approach parse_approach(std::string_view s);
HoldingPeriod parse_holding_period(std::string_view s);
AccountType parse_account_type(std::string_view s);
Timing parse_timing(std::string_view s);

struct RawMessage {
  std::string message_id;
  std::string user_id;
  std::vector<std::string> tickers;
  std::string text;
  Timestamp timestamp;
  std::int64_t like_count = 0;
  bool is_retweet = false;
  bool has_hyperlink = false;
  AuthorSentiment author_sentiment_tag = AuthorSentiment::unclassified;
};

struct UserProfile {
  std::string user_id;
  std::int64_t follower_count = 0;
  Experience experience = Experience::unknown;
  Approach approach = Approach::unknown;
  HoldingPeriod holding_period = HoldingPeriod::unknown;
  AccountType account_type = AccountType::unknown;
};

struct Announcement {
  std::string firm_id;
  Timestamp announce_time;
  Timing timing = Timing::before_open;
  double sue = 0;
  double sue_lag = 0;
  int loss = 0;
  double analysts = 0;  // log(1 + count)
  double inst = 0;      // fraction in [0,1]
  double size = 0;      // log market equity
  double mb = 0;
  int q4 = 0;
  int industry_ff48 = 1;
  std::string quarter_id;  // e.g. "2016Q3"

  /// Stable key identifying the announcement: "<firm>|<quarter>".
  std::string key() const { return firm_id + "|" + quarter_id; }
};

struct DailyQuote {
  std::string firm_id;
  Date date;
  double ret = 0;
  double bid = kNaN;
  double ask = kNaN;
};

struct FactorRow {
  Date date;
  double mktrf = 0, smb = 0, hml = 0, umd = 0, rf = 0;
};

// ---------------------------------------------------------------------------
// I/O

struct Corpus {
  std::vector<RawMessage> messages;
  std::vector<UserProfile> users;
  /// user_ids referenced by messages but absent from the user file.
  std::vector<std::string> users_missing;
};

std::vector<RawMessage> load_messages(const std::string& path);
std::vector<UserProfile> load_users(const std::string& path);

/// Loads both JSONL files and reports (does not enforce) user coverage.
/// Throws DataError carrying the line number on malformed records and on
/// duplicate message ids.
Corpus load_corpus(const std::string& messages_path, const std::string& users_path);

// Parsers for single JSONL records (line used for error reporting).
RawMessage parse_message_json(std::string_view line, std::size_t lineno = 0);
UserProfile parse_user_json(std::string_view line, std::size_t lineno = 0);
std::string to_json_line(const RawMessage& m);
std::string to_json_line(const UserProfile& u);

void write_messages(const std::string& path, const std::vector<RawMessage>& msgs);
void write_users(const std::string& path, const std::vector<UserProfile>& users);

std::vector<Announcement> load_announcements(const std::string& path);
std::vector<DailyQuote> load_quotes(const std::string& path);
std::vector<FactorRow> load_factors(const std::string& path);
void write_announcements(const std::string& path, const std::vector<Announcement>& anns);
void write_quotes(const std::string& path, const std::vector<DailyQuote>& quotes);
void write_factors(const std::string& path, const std::vector<FactorRow>& factors);

/// ticker,exchange CSV.
std::map<std::string, std::string> load_listing(const std::string& path);
/// One ticker per line.
std::set<std::string> load_ticker_set(const std::string& path);

// ---------------------------------------------------------------------------
// Sample restrictions

struct FilterOptions {
  /// Identical normalized text from one user appearing more than this many
  /// times corpus-wide marks all of that user's copies as automated.
  std::size_t automated_threshold = 1000;
  /// Text normalizer used for the automation screen. Defaults to
  /// lowercase + whitespace collapse when empty.
  std::function<std::string(const RawMessage&)> normalized_text;
  /// Assigns a message to a firm-window group; messages mapped to nullopt
  /// are outside every window and are dropped at the final stage. When empty,
  /// every message of a ticker belongs to one group.
  std::function<std::optional<std::string>(const RawMessage&)> window_key;
};

struct StageCount {
  std::string stage;
  std::size_t retained = 0;
};

struct FilterResult {
  std::vector<RawMessage> messages;
  /// Input size followed by the retained count after each stage, in order.
  std::vector<StageCount> stages;
};

inline const std::set<std::string>& major_exchanges() {
  static const std::set<std::string> kExchanges{"NASDAQ", "NYSE"};
  return kExchanges;
}

/// Applies, in order: NASDAQ/NYSE ticker, single ticker, not automated,
/// matched ticker, firm-window with at least `window_user_min` distinct users.
FilterResult filter_sample(const std::vector<RawMessage>& messages,
                           const std::vector<UserProfile>& users,
                           const std::map<std::string, std::string>& listing,
                           const std::set<std::string>& matched, std::size_t window_user_min,
                           const FilterOptions& options = {});

/// Original iff the message is neither a retweet nor carries a hyperlink.
Channel classify_information_channel(const RawMessage& msg) noexcept;

// ---------------------------------------------------------------------------
// Synthetic data

/// Phrase pools the generator composes messages from. The defaults agree
/// with the shipped dictionaries and lexicons (see resources.hpp).
struct SynthWordBank {
  std::map<Emotion, std::vector<std::string>> emotion_phrases;  // six non-neutral classes
  std::vector<std::string> emotional_context;  // filler for emotional posts (both polarities)
  std::vector<std::string> neutral_words;      // vocabulary of neutral posts only
  std::vector<std::string> bullish_chat;       // tagged posts without emotion words
  std::vector<std::string> bearish_chat;
  /// (misspelled, correct) pairs injected as typos.
  std::vector<std::pair<std::string, std::string>> typos;

  static SynthWordBank defaults();
};

struct SynthConfig {
  std::size_t n_firms = 40;
  std::size_t n_quarters = 8;
  std::size_t n_users = 200;
  Date start_date{2015, 1, 5};
  std::size_t warmup_days = 300;  // trading days before the first announcement

  // Message volume per announcement.
  int pre_window_min_msgs = 4;
  int pre_window_max_msgs = 14;
  int event_window_max_msgs = 6;
  int background_msgs_per_firm_quarter = 3;
  double single_user_window_prob = 0.05;

  // Noise messages exercising each sample restriction.
  std::size_t n_multi_ticker = 40;
  std::size_t n_unlisted = 40;
  std::size_t n_unmatched = 20;
  std::size_t automated_copies = 0;  // 0 disables the posting bot
  double typo_prob = 0.05;
  double mislabeled_tag_prob = 0.03;
  double retweet_prob = 0.15;
  double hyperlink_prob = 0.15;

  // Returns.
  double mktrf_mean = 0.0004, mktrf_sd = 0.01;
  double style_factor_sd = 0.005;
  double rf = 0.0001;
  double idio_sd = 0.02;
  /// When set, every firm gets these (mktrf, smb, hml, umd) betas.
  std::optional<std::array<double, 4>> fixed_betas;
  double bid_ask_half_spread = 0.001;

  // Planted effects on EXRET[-1,1] (percent) per unit of the follower-weighted
  // true share of the named emotion in [-10,-2].
  double planted_happy_coef = -2.0;
  double planted_sue_coef = 0.5;

  SynthWordBank words = SynthWordBank::defaults();
};

struct SynthData {
  std::vector<RawMessage> messages;
  std::vector<UserProfile> users;
  std::vector<Announcement> announcements;
  std::vector<DailyQuote> quotes;
  std::vector<FactorRow> factors;
  std::map<std::string, std::string> listing;
  std::set<std::string> matched;
  /// Generating class of every emotional/neutral post (absent for chat posts).
  std::map<std::string, Emotion> true_emotion;
};

/// Deterministic for a fixed seed.
SynthData synth_generate(std::uint64_t seed, const SynthConfig& config = {});

}  // namespace emopanel::corpus
