#include "emopanel/resources.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "emopanel/common.hpp"

namespace emopanel::resources {

const Pairs& emoticons() {
  // Longest patterns first so ">:(" wins over ":(".
  static const Pairs kEmoticons = {
      {">:-(", "angryface"}, {">:(", "angryface"}, {":'-(", "cryingface"}, {":'(", "cryingface"},
      {":-)", "happyface"},  {":-d", "happyface"}, {":-(", "sadface"},     {":-o", "surprisedface"},
      {":-/", "confusedface"}, {":-p", "cheekyface"}, {":)", "happyface"},
      {":d", "happyface"},   {"=)", "happyface"},  {":(", "sadface"},      {":o", "surprisedface"},
      {":/", "confusedface"}, {":p", "cheekyface"},    {"<3", "beatingheart"},
  };
  return kEmoticons;
}

const Pairs& emoji() {
  static const Pairs kEmoji = {
      {"\xF0\x9F\x98\x80", "grinningface"},          // U+1F600
      {"\xF0\x9F\x98\x82", "facewithtearsofjoy"},    // U+1F602
      {"\xF0\x9F\x98\x9B", "facewithstuckouttongue"},// U+1F61B
      {"\xF0\x9F\x8D\xBA", "beermug"},               // U+1F37A
      {"\xF0\x9F\x92\x99", "blueheart"},             // U+1F499
      {"\xF0\x9F\x98\xA2", "cryingface"},            // U+1F622
      {"\xF0\x9F\x98\xAD", "loudlycryingface"},      // U+1F62D
      {"\xF0\x9F\x92\x94", "brokenheart"},           // U+1F494
      {"\xF0\x9F\x98\x94", "pensiveface"},           // U+1F614
      {"\xF0\x9F\x98\xA0", "angryface"},             // U+1F620
      {"\xF0\x9F\x98\xA4", "facewithsteamfromnose"}, // U+1F624
      {"\xF0\x9F\x92\xA2", "angersymbol"},           // U+1F4A2
      {"\xF0\x9F\xA4\xAE", "facevomiting"},          // U+1F92E
      {"\xF0\x9F\xA4\xA2", "nauseatedface"},         // U+1F922
      {"\xF0\x9F\xA4\xA5", "lyingface"},             // U+1F925
      {"\xF0\x9F\x98\xAE", "facewithopenmouth"},     // U+1F62E
      {"\xF0\x9F\x98\xB2", "astonishedface"},        // U+1F632
      {"\xF0\x9F\xA4\x94", "thinkingface"},          // U+1F914
      {"\xF0\x9F\x98\xB3", "flushedface"},           // U+1F633
      {"\xF0\x9F\x98\xB1", "facescreaminginfear"},   // U+1F631
      {"\xF0\x9F\x98\xA8", "fearfulface"},           // U+1F628
      {"\xF0\x9F\x98\x9F", "worriedface"},           // U+1F61F
      {"\xF0\x9F\x98\xAC", "grimacingface"},         // U+1F62C
  };
  return kEmoji;
}

const Pairs& contractions() {
  static const Pairs kContractions = {
      {"i've", "i have"},      {"i'm", "i am"},          {"i'll", "i will"},        {"i'd", "i would"},
      {"can't", "cannot"},     {"won't", "will not"},    {"don't", "do not"},       {"doesn't", "does not"},
      {"didn't", "did not"},   {"isn't", "is not"},      {"aren't", "are not"},     {"wasn't", "was not"},
      {"weren't", "were not"}, {"couldn't", "could not"}, {"shouldn't", "should not"}, {"wouldn't", "would not"},
      {"haven't", "have not"}, {"hasn't", "has not"},    {"ain't", "is not"},       {"it's", "it is"},
      {"that's", "that is"},   {"what's", "what is"},    {"there's", "there is"},   {"he's", "he is"},
      {"she's", "she is"},     {"let's", "let us"},      {"you're", "you are"},     {"we're", "we are"},
      {"they're", "they are"}, {"you've", "you have"},   {"we've", "we have"},      {"they've", "they have"},
      {"you'll", "you will"},  {"we'll", "we will"},     {"y'all", "you all"},
  };
  return kContractions;
}

const std::map<Emotion, std::vector<std::string>>& emotion_dictionaries() {
  static const std::map<Emotion, std::vector<std::string>> kDicts = {
      {Emotion::neutral, {}},
      {Emotion::happy,
       {"amazing", "awesome", "beautiful", "bargain", "all good", "back higher", "booyah", "brilliant",
        "bull flag", "cannot wait", "celebration", "cheerful", "congrats", "easy money", "ecstatic",
        "elated", "enjoy", "euphoric", "excellent", "excited", "fabulous", "fantastic", "glad",
        "going green", "good news", "gorgeous", "grateful", "great", "happy", "happyface", "beatingheart",
        "cheekyface", "grinningface", "facewithtearsofjoy", "facewithstuckouttongue", "beermug", "blueheart"}},
      {Emotion::sad,
       {"abandoned", "agony", "awful", "badly", "bleeding", "brokenhearted", "brutal", "bummer", "crushed",
        "crying", "defeated", "depressed", "depressing", "despair", "disappointed", "disappointing", "failed",
        "fml", "heartbroken", "hopeless", "horrible", "miserable", "not good", "painful", "regret", "sad",
        "sadly", "should have sold", "terrible", "ugh", "sadface", "cryingface", "loudlycryingface",
        "brokenheart", "pensiveface"}},
      {Emotion::anger,
       {"angry", "annoyed", "annoying", "furious", "frustrated", "frustrating", "hate", "hateful", "irritated",
        "mad", "outrage", "outrageous", "pissed", "rage", "shut up", "stupid", "sucks", "unfair", "useless",
        "dumb", "damn", "enraged", "hostile", "angryface", "facewithsteamfromnose", "angersymbol"}},
      {Emotion::disgust,
       {"bagholders", "bogus", "bullshit", "circus", "clowns", "corrupt", "crooks", "delusional", "despicable",
        "disgusting", "disgusted", "fakeout", "garbage", "idiots", "liar", "liars", "lies", "losers",
        "manipulators", "morons", "pathetic", "pumpers", "rigged", "rubbish", "scam", "facevomiting",
        "nauseatedface", "lyingface"}},
      {Emotion::surprise,
       {"amazed", "astonished", "baffled", "blown away", "cannot believe", "clueless", "confused", "crazy",
        "did this really", "does anyone know", "insane", "incredible", "never seen", "no idea", "omg",
        "shocked", "shocking", "speechless", "stunned", "surprised", "surprising", "unbelievable",
        "unexpected", "what happened", "whoa", "wow", "wtf", "surprisedface", "confusedface",
        "facewithopenmouth", "astonishedface", "thinkingface", "flushedface"}},
      {Emotion::fear,
       {"afraid", "anxious", "anxiety", "bear market", "bloodbath", "capitulation", "careful", "cautious",
        "collapse", "crash", "crashing", "danger", "dangerous", "doom", "downtrend", "dumping", "fear",
        "fearful", "frightening", "get out", "going down", "nervous", "nightmare", "panic", "scared", "scary",
        "worried", "worry", "fearface", "facescreaminginfear", "fearfulface", "worriedface", "grimacingface"}},
  };
  return kDicts;
}

const std::vector<std::string>& fundamental_dictionary() {
  static const std::vector<std::string> kWords = {
      "accounting", "acquire", "assets", "balance sheet", "bankruptcy", "bear", "bearish", "bull", "bullish",
      "buy", "buying", "calls", "capital", "cash", "catalyst", "chart", "charts", "company", "customers",
      "downgrade", "equity", "growth", "index", "inflation", "institutions", "investors", "lawsuit",
      "liquidity", "long", "margin", "market", "news", "options", "outlook", "overbought", "oversold",
      "patent", "position", "price", "puts", "rally", "resistance", "risk", "sell", "selling", "shares",
      "short", "stock", "support", "takeover", "trading", "upgrade", "valuation", "volume", "volatility"};
  return kWords;
}

const std::vector<std::string>& earnings_dictionary() {
  static const std::vector<std::string> kWords = {
      "analyst", "analysts", "announcement", "ceo", "consensus", "dividend", "earnings", "ebitda", "eps",
      "estimate", "estimates", "expectation", "financials", "fiscal", "forecast", "guidance", "income", "loss",
      "miss", "outperform", "profit", "quarterly", "report", "revenue", "revenues", "sales", "target",
      "transcript", "est"};
  return kWords;
}

namespace {

const std::vector<std::string>& common_words() {
  static const std::vector<std::string> kWords = {
      "the", "i", "to", "a", "and", "is", "it", "in", "of", "you", "this", "that", "for", "on", "my", "be",
      "have", "not", "are", "with", "just", "so", "we", "at", "all", "but", "what", "up", "now", "will",
      "do", "me", "can", "am", "was", "out", "like", "go", "if", "get", "they", "your", "one", "day",
      "today", "going", "there", "time", "new", "more", "no", "see", "back", "good", "here", "about",
      "who", "how", "from", "really", "feeling", "name", "week", "tomorrow", "morning", "next", "still",
      "would", "could", "should", "did", "does", "has", "he", "she", "us", "let", "cannot", "were", "an",
      "been", "got", "some", "than", "then", "them", "way", "over", "after", "before", "right", "any",
      "update", "filing", "meeting", "watching", "watch", "list", "session", "notes", "call", "numbers",
      "results", "schedule", "conference", "quarter", "open", "close", "breakout", "breakdown", "adding",
      "accumulate", "trimming", "exiting", "alcohol", "lot", "big", "move", "hold", "holding", "think",
      "know", "want", "need", "look", "looks", "people", "money", "year", "years", "week"};
  return kWords;
}

}  // namespace

const std::vector<std::pair<std::string, long>>& spell_words() {
  static const std::vector<std::pair<std::string, long>> kWords = [] {
    std::vector<std::string> ordered;
    std::set<std::string> seen;
    auto add_phrase = [&](const std::string& phrase) {
      std::istringstream ss(phrase);
      std::string w;
      while (ss >> w)
        if (seen.insert(w).second) ordered.push_back(w);
    };
    for (const auto& w : common_words()) add_phrase(w);
    for (const auto& w : fundamental_dictionary()) add_phrase(w);
    for (const auto& w : earnings_dictionary()) add_phrase(w);
    for (const auto& [e, entries] : emotion_dictionaries())
      for (const auto& w : entries) add_phrase(w);
    for (const auto& [from, to] : contractions()) add_phrase(to);
    std::vector<std::pair<std::string, long>> out;
    long freq = 1000000;
    for (const auto& w : ordered) {
      out.emplace_back(w, freq);
      freq = freq > 1000 ? freq - 997 : freq;
    }
    return out;
  }();
  return kWords;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace

void write_default_resources(const std::string& root) {
  namespace fs = std::filesystem;
  fs::path lex = fs::path(root) / "lexicons";
  fs::path dic = fs::path(root) / "dictionaries";
  fs::create_directories(lex);
  fs::create_directories(dic);

  auto write_pairs = [](const fs::path& p, const Pairs& pairs) {
    auto out = open_out(p);
    for (const auto& [k, v] : pairs) out << k << '\t' << v << '\n';
  };
  write_pairs(lex / "emoticons.tsv", emoticons());
  write_pairs(lex / "emoji_map.tsv", emoji());
  write_pairs(lex / "contractions.tsv", contractions());
  {
    auto out = open_out(lex / "spell_dict.tsv");
    for (const auto& [w, f] : spell_words()) out << w << '\t' << f << '\n';
  }
  for (const auto& [e, entries] : emotion_dictionaries()) {
    auto out = open_out(dic / (std::string(emotion_name(e)) + ".txt"));
    for (const auto& w : entries) out << w << '\n';
  }
  {
    auto out = open_out(dic / "fundamental.txt");
    for (const auto& w : fundamental_dictionary()) out << w << '\n';
  }
  {
    auto out = open_out(dic / "earnings.txt");
    for (const auto& w : earnings_dictionary()) out << w << '\n';
  }
}

}  // namespace emopanel::resources
