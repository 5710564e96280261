#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_set>

#include "emopanel/common.hpp"
#include "emopanel/textnorm.hpp"

namespace emopanel::text {

int damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  }
  return d[n][m];
}

namespace {

void collect_deletes(const std::string& word, int depth, std::unordered_set<std::string>& out) {
  if (depth == 0 || word.size() <= 1) return;
  for (std::size_t i = 0; i < word.size(); ++i) {
    std::string del = word.substr(0, i) + word.substr(i + 1);
    if (out.insert(del).second) collect_deletes(del, depth - 1, out);
  }
}

}  // namespace

SpellDictionary::SpellDictionary(std::vector<std::pair<std::string, long>> words) {
  for (auto& [w, f] : words) {
    if (w.empty()) continue;
    auto [it, inserted] = freq_.emplace(w, f);
    if (!inserted) it->second = std::max(it->second, f);
  }
  std::vector<std::string> sorted;
  sorted.reserve(freq_.size());
  for (const auto& [w, f] : freq_) sorted.push_back(w);
  std::sort(sorted.begin(), sorted.end());
  for (const auto& w : sorted) {
    total_ += static_cast<double>(freq_.at(w));
    max_word_len_ = std::max(max_word_len_, w.size());
    std::unordered_set<std::string> dels;
    collect_deletes(w, kMaxIndexedDistance, dels);
    for (const auto& d : dels) deletes_[d].push_back(w);
  }
}

SpellDictionary SpellDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<std::string, long>> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      words.emplace_back(std::string(body), 1);
    } else {
      words.emplace_back(std::string(trim(body.substr(0, tab))), static_cast<long>(parse_int(body.substr(tab + 1), lineno)));
    }
  }
  return SpellDictionary(std::move(words));
}

long SpellDictionary::frequency(std::string_view w) const {
  auto it = freq_.find(std::string(w));
  return it == freq_.end() ? 0 : it->second;
}

std::optional<std::string> SpellDictionary::nearest(std::string_view token, int max_distance) const {
  if (max_distance < 0) return std::nullopt;
  if (max_distance > kMaxIndexedDistance) throw InvalidArgument("nearest: distance beyond indexed range");
  std::string tok(token);
  if (freq_.count(tok)) return tok;

  std::unordered_set<std::string> probes{tok};
  collect_deletes(tok, max_distance, probes);
  std::unordered_set<std::string> candidates;
  for (const auto& p : probes) {
    if (freq_.count(p)) candidates.insert(p);
    auto it = deletes_.find(p);
    if (it != deletes_.end()) candidates.insert(it->second.begin(), it->second.end());
  }

  std::optional<std::string> best;
  int best_d = std::numeric_limits<int>::max();
  long best_f = -1;
  for (const auto& c : candidates) {
    if (std::abs(static_cast<long>(c.size()) - static_cast<long>(tok.size())) > max_distance) continue;
    int d = damerau_levenshtein(tok, c);
    if (d > max_distance) continue;
    long f = freq_.at(c);
    if (d < best_d || (d == best_d && (f > best_f || (f == best_f && c < *best)))) {
      best = c;
      best_d = d;
      best_f = f;
    }
  }
  return best;
}

std::optional<std::vector<std::string>> SpellDictionary::segment_exact(std::string_view token) const {
  const std::size_t n = token.size();
  if (n < 2 || freq_.empty()) return std::nullopt;
  const double total = total_;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  // best[i]: (score, pieces) for token[0, i)
  std::vector<double> score(n + 1, neg_inf);
  std::vector<int> pieces(n + 1, 0);
  std::vector<std::size_t> back(n + 1, 0);
  score[0] = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t len = 1; len <= std::min(i, max_word_len_); ++len) {
      std::size_t j = i - len;
      if (score[j] == neg_inf) continue;
      auto it = freq_.find(std::string(token.substr(j, len)));
      if (it == freq_.end()) continue;
      double s = score[j] + std::log(static_cast<double>(it->second) / total);
      int p = pieces[j] + 1;
      if (s > score[i] || (s == score[i] && p < pieces[i])) {
        score[i] = s;
        pieces[i] = p;
        back[i] = j;
      }
    }
  }
  if (score[n] == neg_inf || pieces[n] < 2) return std::nullopt;
  std::vector<std::string> out;
  for (std::size_t i = n; i > 0; i = back[i]) out.emplace_back(token.substr(back[i], i - back[i]));
  std::reverse(out.begin(), out.end());
  return out;
}

std::pair<std::vector<std::string>, double> SpellDictionary::segment_loose(std::string_view token) const {
  const std::size_t n = token.size();
  if (n == 0 || freq_.empty()) return {{}, 0.0};
  const double total = total_;
  const double unknown_char = std::log(1.0 / total) - 10.0;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  std::vector<double> score(n + 1, neg_inf);
  std::vector<std::size_t> back(n + 1, 0);
  std::vector<bool> is_word(n + 1, false);
  score[0] = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (score[i - 1] != neg_inf && score[i - 1] + unknown_char > score[i]) {
      score[i] = score[i - 1] + unknown_char;
      back[i] = i - 1;
      is_word[i] = false;
    }
    for (std::size_t len = 2; len <= std::min(i, max_word_len_); ++len) {
      std::size_t j = i - len;
      if (score[j] == neg_inf) continue;
      auto it = freq_.find(std::string(token.substr(j, len)));
      if (it == freq_.end()) continue;
      double s = score[j] + std::log(static_cast<double>(it->second) / total);
      if (s > score[i]) {
        score[i] = s;
        back[i] = j;
        is_word[i] = true;
      }
    }
  }
  std::vector<std::string> words;
  std::size_t covered = 0;
  for (std::size_t i = n; i > 0; i = back[i]) {
    if (is_word[i]) {
      words.emplace_back(token.substr(back[i], i - back[i]));
      covered += i - back[i];
    }
  }
  std::reverse(words.begin(), words.end());
  return {words, static_cast<double>(covered) / static_cast<double>(n)};
}

std::vector<std::string> correct_misspellings(std::string_view token, const SpellDictionary& dict,
                                              const SpellOptions& options) {
  if (dict.empty()) throw InvalidArgument("correct_misspellings: empty dictionary");
  std::string tok(token);
  if (dict.contains(tok)) return {tok};

  if (auto seg = dict.segment_exact(tok)) return *seg;

  if (tok.size() >= options.min_correct_length) {
    int allowed = tok.size() <= 4 ? std::min(1, options.max_correction_distance) : options.max_correction_distance;
    if (auto near = dict.nearest(tok, allowed)) return {*near};
  }

  if (tok.size() >= options.min_loose_length) {
    auto [words, coverage] = dict.segment_loose(tok);
    if (!words.empty() && coverage >= options.min_loose_coverage) {
      std::map<std::string, std::size_t> seen;
      std::vector<std::string> out;
      for (auto& w : words) {
        if (++seen[w] > options.max_repeats) continue;
        out.push_back(std::move(w));
        if (out.size() == options.max_segment_words) break;
      }
      return out;
    }
  }
  return {tok};
}

}  // namespace emopanel::text
