#include <map>
#include <set>
#include <unordered_map>

#include "emopanel/corpus.hpp"

namespace emopanel::corpus {

namespace {

std::string collapse_lower(const RawMessage& m) {
  std::string out;
  bool space = false;
  for (char c : m.text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

template <typename Pred>
std::vector<RawMessage> keep_if(std::vector<RawMessage> in, Pred pred) {
  std::vector<RawMessage> out;
  out.reserve(in.size());
  for (auto& m : in)
    if (pred(m)) out.push_back(std::move(m));
  return out;
}

}  // namespace

FilterResult filter_sample(const std::vector<RawMessage>& messages, const std::vector<UserProfile>& /*users*/,
                           const std::map<std::string, std::string>& listing,
                           const std::set<std::string>& matched, std::size_t window_user_min,
                           const FilterOptions& options) {
  if (window_user_min < 1) throw InvalidArgument("window_user_min must be >= 1");

  FilterResult res;
  res.stages.push_back({"input", messages.size()});

  auto listed = [&](const std::string& t) {
    auto it = listing.find(t);
    return it != listing.end() && major_exchanges().count(it->second) > 0;
  };

  // NASDAQ/NYSE: every ticker the message mentions is listed on a major exchange.
  auto cur = keep_if(messages, [&](const RawMessage& m) {
    for (const auto& t : m.tickers)
      if (!listed(t)) return false;
    return true;
  });
  res.stages.push_back({"nasdaq_nyse_ticker", cur.size()});

  cur = keep_if(std::move(cur), [](const RawMessage& m) { return m.tickers.size() == 1; });
  res.stages.push_back({"single_ticker", cur.size()});

  {
    std::vector<std::string> norm(cur.size());
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      norm[i] = options.normalized_text ? options.normalized_text(cur[i]) : collapse_lower(cur[i]);
      ++counts[{cur[i].user_id, norm[i]}];
    }
    std::vector<RawMessage> kept;
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (counts[{cur[i].user_id, norm[i]}] <= options.automated_threshold) kept.push_back(std::move(cur[i]));
    cur = std::move(kept);
  }
  res.stages.push_back({"not_automated", cur.size()});

  cur = keep_if(std::move(cur), [&](const RawMessage& m) { return matched.count(m.tickers.front()) > 0; });
  res.stages.push_back({"matched_ticker", cur.size()});

  {
    std::vector<std::optional<std::string>> keys(cur.size());
    std::unordered_map<std::string, std::set<std::string>> users_by_group;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      keys[i] = options.window_key ? options.window_key(cur[i]) : std::optional<std::string>(cur[i].tickers.front());
      if (keys[i]) users_by_group[*keys[i]].insert(cur[i].user_id);
    }
    std::vector<RawMessage> kept;
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (keys[i] && users_by_group[*keys[i]].size() >= window_user_min) kept.push_back(std::move(cur[i]));
    cur = std::move(kept);
  }
  res.stages.push_back({"window_users", cur.size()});

  res.messages = std::move(cur);
  return res;
}

}  // namespace emopanel::corpus
