#include <algorithm>
#include <fstream>
#include <regex>

#include "emopanel/common.hpp"
#include "emopanel/resources.hpp"
#include "emopanel/textnorm.hpp"

namespace emopanel::text {

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

void longest_first(Pairs& p) {
  std::stable_sort(p.begin(), p.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

Pairs read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Pairs out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path + ": expected two tab-separated fields", lineno);
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

bool is_alnum(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
bool is_alpha(char c) { return c >= 'a' && c <= 'z'; }

// Characters that stay inside a raw token; everything else separates tokens.
bool is_token_char(unsigned char c) {
  return is_alnum(static_cast<char>(c)) || c == '$' || c == '%' || c == '.' || c == ',' || c == '\'' ||
         c >= 0x80;
}

const std::regex& strip_pattern() {
  static const std::regex re(
      R"((https?://|www\.)\S+|pic\.twitter\.com/\S+|!\[[^\]]*\]\([^)]*\)|@[A-Za-z0-9_]+|\$[A-Za-z][A-Za-z0-9._]*)");
  return re;
}

const std::regex& leading_rt() {
  static const std::regex re(R"(^\s*RT\b:?)");
  return re;
}

const std::regex& number_pattern() {
  static const std::regex re(R"(\$?[0-9]+([.,][0-9]+)*[kmb]?)");
  return re;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string translate_symbols(const std::string& lower, const NormalizationTables& t) {
  std::string out;
  out.reserve(lower.size() + 16);
  std::size_t i = 0;
  while (i < lower.size()) {
    bool hit = false;
    for (const auto& [pat, name] : t.emoticons) {
      if (pat.empty() || lower.compare(i, pat.size(), pat) != 0) continue;
      std::size_t end = i + pat.size();
      if (is_alnum(pat.back()) && end < lower.size() && is_alnum(lower[end])) continue;
      out += ' ';
      out += name;
      out += ' ';
      i = end;
      hit = true;
      break;
    }
    if (hit) continue;
    if (static_cast<unsigned char>(lower[i]) >= 0x80) {
      for (const auto& [seq, name] : t.emoji) {
        if (seq.empty() || lower.compare(i, seq.size(), seq) != 0) continue;
        out += ' ';
        out += name;
        out += ' ';
        i += seq.size();
        hit = true;
        break;
      }
      if (hit) continue;
    }
    out += lower[i++];
  }
  return out;
}

std::string_view strip_edges(std::string_view s) {
  auto edge = [](char c) { return c == '.' || c == ',' || c == '\''; };
  while (!s.empty() && edge(s.front())) s.remove_prefix(1);
  while (!s.empty() && edge(s.back())) s.remove_suffix(1);
  return s;
}

void emit_word(std::string_view piece, const NormalizationTables& t, std::vector<std::string>& out) {
  std::string w;
  for (char c : piece)
    if (is_alnum(c)) w += c;
  if (w.empty()) return;
  if (t.protected_tokens().count(w)) {
    out.push_back(std::move(w));
    return;
  }
  bool alpha = std::all_of(w.begin(), w.end(), is_alpha);
  if (alpha && t.correct_spelling && !t.spell.empty()) {
    for (auto& c : correct_misspellings(w, t.spell, t.spell_options)) out.push_back(std::move(c));
    return;
  }
  out.push_back(std::move(w));
}

void emit_piece(std::string_view piece, const NormalizationTables& t, std::vector<std::string>& out) {
  if (piece == "%") {
    out.emplace_back(kPercentToken);
    return;
  }
  bool dollar = !piece.empty() && piece.front() == '$';
  std::string_view body = strip_edges(dollar ? piece.substr(1) : piece);
  if (body.empty()) return;
  std::string candidate = (dollar ? "$" : "") + std::string(body);
  if (std::regex_match(candidate, number_pattern())) {
    out.emplace_back(dollar ? kDollarToken : kNumberToken);
    return;
  }
  auto c = t.contractions.find(std::string(body));
  if (c != t.contractions.end()) {
    for (const auto& w : split(c->second, ' '))
      if (!w.empty()) emit_word(w, t, out);
    return;
  }
  emit_word(body, t, out);
}

}  // namespace

NormalizationTables NormalizationTables::defaults() {
  NormalizationTables t;
  t.emoticons = resources::emoticons();
  t.emoji = resources::emoji();
  longest_first(t.emoticons);
  longest_first(t.emoji);
  for (const auto& [k, v] : resources::contractions()) t.contractions.emplace(k, v);
  t.spell = SpellDictionary(resources::spell_words());
  return t;
}

NormalizationTables NormalizationTables::load(const std::string& dir) {
  NormalizationTables t;
  t.emoticons = read_pairs(dir + "/emoticons.tsv");
  for (auto& [pat, name] : t.emoticons) pat = to_lower_ascii(pat);
  t.emoji = read_pairs(dir + "/emoji_map.tsv");
  longest_first(t.emoticons);
  longest_first(t.emoji);
  for (const auto& [k, v] : read_pairs(dir + "/contractions.tsv")) t.contractions.emplace(to_lower_ascii(k), v);
  t.spell = SpellDictionary::load(dir + "/spell_dict.tsv");
  return t;
}

const std::set<std::string>& NormalizationTables::emoji_tokens() const {
  if (emoji_cache_.empty()) {
    for (const auto& [p, name] : emoticons) emoji_cache_.insert(name);
    for (const auto& [p, name] : emoji) emoji_cache_.insert(name);
  }
  return emoji_cache_;
}

const std::set<std::string>& NormalizationTables::protected_tokens() const {
  if (protected_cache_.empty()) {
    protected_cache_ = emoji_tokens();
    protected_cache_.emplace(kDollarToken);
    protected_cache_.emplace(kNumberToken);
    protected_cache_.emplace(kPercentToken);
  }
  return protected_cache_;
}

std::vector<std::string> normalize(std::string_view raw, const NormalizationTables& tables) {
  std::string text(raw);
  text = std::regex_replace(text, leading_rt(), " ");
  text = std::regex_replace(text, strip_pattern(), " ");
  text = replace_all(std::move(text), "\xEF\xB8\x8F", "");          // variation selector 16
  text = replace_all(std::move(text), "\xE2\x80\x99", "'");         // right single quote
  text = translate_symbols(to_lower_ascii(text), tables);
  text = replace_all(std::move(text), "%", " % ");

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && is_token_char(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) emit_piece(std::string_view(text).substr(i, j - i), tables, out);
    i = j;
  }
  return out;
}

std::string normalize_to_string(std::string_view raw, const NormalizationTables& tables) {
  std::string out;
  for (const auto& t : normalize(raw, tables)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace emopanel::text
