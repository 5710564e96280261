#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "emopanel/common.hpp"
#include "emopanel/resources.hpp"
#include "emopanel/textnorm.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::text;
using Tokens = std::vector<std::string>;

namespace {

const NormalizationTables& tables() {
  static const NormalizationTables t = NormalizationTables::defaults();
  return t;
}

// Plain dynamic program for the optimal-string-alignment distance.
int osa_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  return d[a.size()][b.size()];
}

}  // namespace

TEST_CASE("normalize: emoticons, dollar values, contractions and percentages") {
  CHECK(normalize("I am :)", tables()) == Tokens{"i", "am", "happyface"});
  CHECK(normalize("up $5 today", tables()) == Tokens{"up", "isdollarvalue", "today"});
  CHECK(normalize("i've got 10%", tables()) == Tokens{"i", "have", "got", "isnumbervalue", "ispercentage"});
}

TEST_CASE("normalize strips links, mentions, cashtags and a leading RT") {
  auto t = normalize("RT @trader $AAPL looks strong https://t.co/xyz !!!", tables());
  CHECK(t == Tokens{"looks", "strong"});
  CHECK(normalize("", tables()).empty());
  CHECK(normalize("... !!! ???", tables()).empty());
}

TEST_CASE("normalize translates emoji to concatenated names") {
  auto t = normalize("wow \xF0\x9F\x98\xAE", tables());  // face with open mouth
  REQUIRE(t.size() == 2);
  CHECK(t[1] == "facewithopenmouth");
}

TEST_CASE("normalize is idempotent on its own output") {
  for (const char* s : {"I am :) and i've got 10% of $5", "RT @x Stocks r goin UP!!! :( $TSLA", "alchohol ilike it",
                        "earnings beat eps 12.5 guidance raised"}) {
    auto once = normalize(s, tables());
    std::string joined;
    for (const auto& w : once) joined += (joined.empty() ? "" : " ") + w;
    CHECK(normalize(joined, tables()) == once);
  }
}

TEST_CASE("translated emoticons are never spell-corrected") {
  CHECK(correct_misspellings("happyface", tables().spell) == Tokens{"happyface"});
  CHECK(normalize(":)", tables()) == Tokens{"happyface"});
  CHECK(tables().protected_tokens().count("happyface") == 1);
}

TEST_CASE("correct_misspellings: identity, nearest word and segmentation") {
  const auto& dict = tables().spell;
  CHECK(correct_misspellings("alcohol", dict) == Tokens{"alcohol"});
  CHECK(correct_misspellings("alchohol", dict) == Tokens{"alcohol"});
  SpellDictionary small({{"i", 100}, {"like", 50}});
  CHECK(correct_misspellings("ilike", small) == Tokens{"i", "like"});
}

TEST_CASE("correct_misspellings: frequency breaks distance ties, unknown passes through") {
  SpellDictionary d({{"cart", 5}, {"care", 50}, {"core", 1}});
  CHECK(correct_misspellings("carx", d) == Tokens{"care"});
  CHECK(correct_misspellings("zzzzzzz", d) == Tokens{"zzzzzzz"});
}

TEST_CASE("loose segmentation caps repeats and length") {
  SpellDictionary d({{"buy", 100}, {"now", 80}});
  auto out = correct_misspellings("buynowbuynowbuynowbuynowbuynowx", d);
  CHECK(out.size() <= 15);
  CHECK(std::count(out.begin(), out.end(), "buy") <= 3);
  CHECK(std::count(out.begin(), out.end(), "now") <= 3);
}

TEST_CASE("damerau_levenshtein agrees with a direct dynamic program") {
  Rng rng(17);
  const std::string alpha = "abcd";
  for (int trial = 0; trial < 500; ++trial) {
    std::string a, b;
    auto la = rng.uniform_int(0, 7), lb = rng.uniform_int(0, 7);
    for (int i = 0; i < la; ++i) a += alpha[static_cast<std::size_t>(rng.uniform_int(0, 3))];
    for (int i = 0; i < lb; ++i) b += alpha[static_cast<std::size_t>(rng.uniform_int(0, 3))];
    CHECK(damerau_levenshtein(a, b) == osa_oracle(a, b));
  }
  CHECK(damerau_levenshtein("ab", "ba") == 1);
  CHECK(damerau_levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("build_vocab: frequency order, ties lexicographic, reserved ids") {
  auto v = build_vocab({{"b", "a", "a"}, {"a", "c"}}, 10);
  CHECK(v.id("a") == 2);
  CHECK(v.id("b") == 3);
  CHECK(v.id("c") == 4);
  CHECK(v.token(kPad) == kPadToken);
  CHECK(v.token(kNone) == kNoneToken);
  CHECK(v.size() == 5);
  for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) CHECK(v.id(v.token(i)) == i);

  auto tiny = build_vocab({{"a", "a", "b"}}, 2);
  CHECK(tiny.size() == 2);
  std::vector<std::string> toks{"a", "b"};
  auto s = encode(toks, tiny, 3);
  CHECK(s.ids == std::vector<TokenId>{kNone, kNone, kPad});

  auto capped = build_vocab({{"a", "a", "b", "c"}}, 3);
  CHECK(capped.size() == 3);
  CHECK(capped.contains("a"));
  CHECK_FALSE(capped.contains("b"));

  CHECK_THROWS_AS(build_vocab({}, 10), InvalidArgument);
  CHECK_THROWS_AS(build_vocab({{"a"}}, 1), InvalidArgument);
}

TEST_CASE("encode pads, truncates and maps OOV to NONE") {
  auto v = build_vocab({{"x", "y"}}, 10);
  std::vector<std::string> none;
  auto e = encode(none, v, 3);
  CHECK(e.ids == std::vector<TokenId>{kPad, kPad, kPad});
  CHECK(e.true_length == 0);

  std::vector<std::string> many(31, "x");
  many.back() = "y";
  auto t = encode(many, v, 30);
  CHECK(t.ids.size() == 30);
  CHECK(t.true_length == 30);
  CHECK(std::all_of(t.ids.begin(), t.ids.end(), [&](TokenId id) { return id == v.id("x"); }));

  std::vector<std::string> oov{"x", "zzz"};
  auto o = encode(oov, v, 4);
  CHECK(o.ids[1] == kNone);
  CHECK(o.ids[2] == kPad);
  CHECK(o.true_length == 2);
}

TEST_CASE("decode inverts encode on in-vocabulary prefixes") {
  auto v = build_vocab({{"a", "b", "c", "d"}}, 10);
  Rng rng(4);
  const std::vector<std::string> words{"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> toks;
    auto n = rng.uniform_int(0, 12);
    for (int i = 0; i < n; ++i) toks.push_back(words[static_cast<std::size_t>(rng.uniform_int(0, 3))]);
    auto s = encode(toks, v, 8);
    CHECK(s.ids.size() == 8);
    auto back = decode(s, v);
    toks.resize(std::min<std::size_t>(toks.size(), 8));
    CHECK(back == toks);
  }
}

TEST_CASE("vocabulary and lexicons persist to files") {
  emopanel::testing::TempDir dir("vocab");
  auto v = build_vocab({{"alpha", "beta", "beta"}}, 10);
  v.save(dir.file("vocab.txt"));
  auto w = Vocabulary::load(dir.file("vocab.txt"));
  CHECK(w.tokens() == v.tokens());
  CHECK(w.hash() == v.hash());
  CHECK(build_vocab({{"alpha", "gamma"}}, 10).hash() != v.hash());

  resources::write_default_resources(dir.path().string());
  auto loaded = NormalizationTables::load((dir.path() / "lexicons").string());
  CHECK(normalize("I am :) and i've got 10%", loaded) == normalize("I am :) and i've got 10%", tables()));
}
