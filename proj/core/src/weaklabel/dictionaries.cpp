#include <fstream>

#include "emopanel/common.hpp"
#include "emopanel/resources.hpp"
#include "emopanel/textnorm.hpp"
#include "emopanel/weaklabel.hpp"

namespace emopanel::weaklabel {

namespace {

Phrase to_phrase(const std::string& entry) {
  Phrase p;
  for (auto& w : split(entry, ' '))
    if (!w.empty()) p.push_back(w);
  return p;
}

std::vector<Phrase> to_phrases(const std::vector<std::string>& entries) {
  std::vector<Phrase> out;
  for (const auto& e : entries) {
    auto p = to_phrase(e);
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Phrase> read_phrases(const std::string& path, const text::NormalizationTables& tables) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Phrase> out;
  std::set<Phrase> seen;
  std::string line;
  while (std::getline(in, line)) {
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto p = text::normalize(body, tables);
    if (!p.empty() && seen.insert(p).second) out.push_back(std::move(p));
  }
  return out;
}

std::string join(const Phrase& p) {
  std::string s;
  for (const auto& w : p) s += (s.empty() ? "" : " ") + w;
  return s;
}

}  // namespace

bool contains_phrase(const std::vector<std::string>& tokens, const Phrase& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    std::size_t k = 0;
    while (k < phrase.size() && tokens[i + k] == phrase[k]) ++k;
    if (k == phrase.size()) return true;
  }
  return false;
}

std::set<Emotion> matched_classes(const std::vector<std::string>& tokens, const EmotionDictionaries& dicts) {
  std::set<Emotion> out;
  for (const auto& [e, phrases] : dicts.phrases)
    for (const auto& p : phrases)
      if (contains_phrase(tokens, p)) {
        out.insert(e);
        break;
      }
  return out;
}

EmotionDictionaries EmotionDictionaries::from_lists(const std::map<Emotion, std::vector<std::string>>& lists) {
  EmotionDictionaries d;
  for (Emotion e : kAllEmotions) d.phrases[e];
  for (const auto& [e, entries] : lists) d.phrases[e] = to_phrases(entries);
  d.validate();
  return d;
}

EmotionDictionaries EmotionDictionaries::defaults() { return from_lists(resources::emotion_dictionaries()); }

EmotionDictionaries EmotionDictionaries::load(const std::string& dir, const text::NormalizationTables& tables) {
  EmotionDictionaries d;
  for (Emotion e : kAllEmotions) {
    if (e == Emotion::neutral) {
      d.phrases[e];
      continue;
    }
    d.phrases[e] = read_phrases(dir + "/" + std::string(emotion_name(e)) + ".txt", tables);
  }
  d.validate();
  return d;
}

void EmotionDictionaries::validate() const {
  std::map<Phrase, Emotion> owner;
  for (Emotion e : kAllEmotions) {
    auto it = phrases.find(e);
    bool empty = it == phrases.end() || it->second.empty();
    if (e == Emotion::neutral && !empty) throw InvalidArgument("neutral dictionary must be empty");
    if (e != Emotion::neutral && empty)
      throw InvalidArgument("dictionary for " + std::string(emotion_name(e)) + " is empty");
    if (empty) continue;
    for (const auto& p : it->second) {
      auto [o, inserted] = owner.emplace(p, e);
      if (!inserted && o->second != e)
        throw InvalidArgument("'" + join(p) + "' appears in both " + std::string(emotion_name(o->second)) +
                              " and " + std::string(emotion_name(e)));
    }
  }
}

InfoDictionaries InfoDictionaries::from_lists(const std::vector<std::string>& fundamental,
                                              const std::vector<std::string>& earnings) {
  InfoDictionaries d{to_phrases(fundamental), to_phrases(earnings)};
  d.validate();
  return d;
}

InfoDictionaries InfoDictionaries::defaults() {
  return from_lists(resources::fundamental_dictionary(), resources::earnings_dictionary());
}

InfoDictionaries InfoDictionaries::load(const std::string& dir, const text::NormalizationTables& tables) {
  InfoDictionaries d{read_phrases(dir + "/fundamental.txt", tables), read_phrases(dir + "/earnings.txt", tables)};
  d.validate();
  return d;
}

void InfoDictionaries::validate() const {
  if (fundamental.empty() || earnings.empty()) throw InvalidArgument("information dictionaries must be non-empty");
  std::set<Phrase> f(fundamental.begin(), fundamental.end());
  for (const auto& p : earnings)
    if (f.count(p)) throw InvalidArgument("'" + join(p) + "' is in both fundamental and earnings dictionaries");
}

ChatType label_chat_type(const std::vector<std::string>& tokens, const InfoDictionaries& dicts) {
  for (const auto& p : dicts.earnings)
    if (contains_phrase(tokens, p)) return ChatType::earnings;
  for (const auto& p : dicts.fundamental)
    if (contains_phrase(tokens, p)) return ChatType::fundamental;
  return ChatType::chat;
}

std::string_view to_string(ChatType c) {
  switch (c) {
    case ChatType::chat:
      return "chat";
    case ChatType::fundamental:
      return "fundamental";
    case ChatType::earnings:
      return "earnings";
  }
  return "chat";
}

ChatType parse_chat_type(std::string_view s) {
  if (s == "chat") return ChatType::chat;
  if (s == "fundamental") return ChatType::fundamental;
  if (s == "earnings") return ChatType::earnings;
  throw DataError("unknown chat type '" + std::string(s) + "'");
}

}  // namespace emopanel::weaklabel
