#include <doctest.h>

#include <cmath>

#include "emopanel/common.hpp"
#include "emopanel/resources.hpp"
#include "emopanel/textnorm.hpp"
#include "emopanel/weaklabel.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel;
using namespace emopanel::weaklabel;
using Tokens = std::vector<std::string>;

namespace {

SentimentScore score(double p) { return {p, sentiment_from_probability(p)}; }

EmotionDictionaries small_dicts() {
  return EmotionDictionaries::from_lists({{Emotion::happy, {"great", "to the moon"}},
                                          {Emotion::sad, {"sad"}},
                                          {Emotion::anger, {"furious"}},
                                          {Emotion::disgust, {"gross"}},
                                          {Emotion::surprise, {"wow"}},
                                          {Emotion::fear, {"scared"}}});
}

NBModel symmetric_model() {
  return nb_train({{{"good"}, Polarity::positive}, {{"bad"}, Polarity::negative}}, 1.0, {"happyface"});
}

}  // namespace

TEST_CASE("sentiment thresholds") {
  CHECK(sentiment_from_probability(0.50) == Sentiment::neutral);
  CHECK(sentiment_from_probability(0.52) == Sentiment::positive);
  CHECK(sentiment_from_probability(0.51) == Sentiment::neutral);
  CHECK(sentiment_from_probability(0.49) == Sentiment::neutral);
  CHECK(sentiment_from_probability(0.4899) == Sentiment::negative);
}

TEST_CASE("nb_train: separable corpus, prior without evidence, unseen token") {
  auto m = symmetric_model();
  CHECK(nb_probability_positive(m, {"good"}) > 0.5);
  CHECK(nb_probability_positive(m, {"bad"}) < 0.5);
  CHECK(nb_probability_positive(m, {}) == doctest::Approx(0.5));
  CHECK(nb_probability_positive(m, {"unseen"}) == doctest::Approx(0.5));
  CHECK(sentiment_classify(m, {"happyface"}).label == Sentiment::neutral);

  auto skew = nb_train({{{"a"}, Polarity::positive}, {{"b"}, Polarity::positive}, {{"c"}, Polarity::negative}});
  CHECK(nb_probability_positive(skew, {}) == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(nb_train({{{"a"}, Polarity::positive}}), InvalidArgument);
  CHECK_THROWS_AS(nb_train({{{"a"}, Polarity::positive}, {{"b"}, Polarity::negative}}, 0.0), InvalidArgument);
}

TEST_CASE("nb probabilities match a hand-computed binarized multinomial model") {
  // pos docs: {up, up, buy}, {up}; neg docs: {down}. Vocabulary {up, buy, down}, smoothing 1.
  auto m = nb_train({{{"up", "up", "buy"}, Polarity::positive}, {{"up"}, Polarity::positive},
                     {{"down"}, Polarity::negative}},
                    1.0);
  // binarized counts pos: up 2, buy 1 (total 3); neg: down 1 (total 1)
  double pu_pos = (2.0 + 1) / (3 + 3), pu_neg = (0.0 + 1) / (1 + 3);
  double pd_pos = (0.0 + 1) / (3 + 3), pd_neg = (1.0 + 1) / (1 + 3);
  double lp = std::log(2.0 / 3) + std::log(pu_pos) + std::log(pd_pos);
  double ln = std::log(1.0 / 3) + std::log(pu_neg) + std::log(pd_neg);
  double expect = 1.0 / (1.0 + std::exp(ln - lp));
  CHECK(nb_probability_positive(m, {"up", "down", "up"}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("nb probabilities stay strictly inside (0,1)") {
  std::vector<PolarityExample> ex;
  for (int i = 0; i < 50; ++i) ex.push_back({{"moon", "rocket", "w" + std::to_string(i)}, Polarity::positive});
  ex.push_back({{"crash"}, Polarity::negative});
  auto m = nb_train(ex, 0.5);
  Tokens many;
  for (int i = 0; i < 30; ++i) many.push_back("w" + std::to_string(i));
  double p = nb_probability_positive(m, many);
  CHECK(p > 0);
  CHECK(p < 1);
}

TEST_CASE("nb model persists") {
  emopanel::testing::TempDir dir("nb");
  auto m = symmetric_model();
  m.save(dir.file("nb.txt"));
  auto back = NBModel::load(dir.file("nb.txt"));
  CHECK(nb_probability_positive(back, {"good", "bad", "good"}) ==
        nb_probability_positive(m, {"good", "bad", "good"}));
  CHECK(back.excluded == m.excluded);
}

TEST_CASE("label_emotion: gate, neutral and collisions") {
  auto d = small_dicts();
  CHECK(label_emotion({"great", "day"}, d, score(0.9)) == Emotion::happy);
  CHECK_FALSE(label_emotion({"great", "day"}, d, score(0.1)).has_value());
  CHECK(label_emotion({"the", "report"}, d, score(0.5)) == Emotion::neutral);
  CHECK_FALSE(label_emotion({"the", "report"}, d, score(0.9)).has_value());
  CHECK_FALSE(label_emotion({"great", "sad"}, d, score(0.9)).has_value());
  CHECK(label_emotion({"wow"}, d, score(0.9)) == Emotion::surprise);
  CHECK(label_emotion({"wow"}, d, score(0.1)) == Emotion::surprise);
  CHECK(label_emotion({"so", "scared"}, d, score(0.2)) == Emotion::fear);
  CHECK(label_emotion({"off", "to", "the", "moon"}, d, score(0.8)) == Emotion::happy);
  CHECK(label_emotion({"to", "moon", "the"}, d, score(0.5)) == Emotion::neutral);
}

TEST_CASE("label_emotion invariants over random token bags") {
  auto d = small_dicts();
  const Tokens pool{"great", "sad", "furious", "gross", "wow", "scared", "the", "moon", "to", "day", "stock"};
  Rng rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    Tokens toks;
    auto n = rng.uniform_int(0, 5);
    for (int i = 0; i < n; ++i) toks.push_back(pool[static_cast<std::size_t>(rng.uniform_int(0, 10))]);
    auto hits = matched_classes(toks, d);
    double p = rng.uniform();
    auto lab = label_emotion(toks, d, score(p));
    if (lab && *lab != Emotion::neutral) CHECK(hits.count(*lab) == 1);
    if (lab == Emotion::neutral) CHECK(hits.empty());
    // flipping a positive score to negative never produces happy
    if (p > 0.51) CHECK(label_emotion(toks, d, score(1 - p)) != Emotion::happy);
  }
}

TEST_CASE("dictionaries validate disjointness and coverage") {
  CHECK_THROWS_AS(EmotionDictionaries::from_lists({{Emotion::happy, {"x"}}}), InvalidArgument);
  auto lists = std::map<Emotion, std::vector<std::string>>{{Emotion::happy, {"same"}},  {Emotion::sad, {"same"}},
                                                           {Emotion::anger, {"a"}},     {Emotion::disgust, {"b"}},
                                                           {Emotion::surprise, {"c"}}, {Emotion::fear, {"d"}}};
  CHECK_THROWS_AS(EmotionDictionaries::from_lists(lists), InvalidArgument);
  CHECK_NOTHROW(EmotionDictionaries::defaults().validate());
  CHECK_NOTHROW(InfoDictionaries::defaults().validate());
  CHECK_THROWS_AS(InfoDictionaries::from_lists({"eps"}, {"eps"}), InvalidArgument);
}

TEST_CASE("shipped dictionaries reload from disk") {
  emopanel::testing::TempDir dir("dicts");
  resources::write_default_resources(dir.path().string());
  auto tables = text::NormalizationTables::defaults();
  auto loaded = EmotionDictionaries::load((dir.path() / "dictionaries").string(), tables);
  auto defaults = EmotionDictionaries::defaults();
  for (auto e : kAllEmotions) CHECK(loaded.phrases[e].size() == defaults.phrases[e].size());
}

TEST_CASE("label_chat_type precedence") {
  auto info = InfoDictionaries::from_lists({"bullish", "revenue growth"}, {"eps", "earnings"});
  CHECK(label_chat_type({"eps", "beat", "bullish"}, info) == ChatType::earnings);
  CHECK(label_chat_type({"so", "bullish"}, info) == ChatType::fundamental);
  CHECK(label_chat_type({"strong", "revenue", "growth"}, info) == ChatType::fundamental);
  CHECK(label_chat_type({"lol"}, info) == ChatType::chat);
  CHECK(parse_chat_type(to_string(ChatType::earnings)) == ChatType::earnings);
}

TEST_CASE("labeling accuracy: 1251 correct of 1287 is 97.2%") {
  double acc = labeling_accuracy(1251, 36);
  CHECK(acc == doctest::Approx(1251.0 / 1287.0).epsilon(1e-15));
  CHECK(std::round(acc * 1000) / 10 == doctest::Approx(97.2));
  CHECK(std::isnan(labeling_accuracy(0, 0)));
}

TEST_CASE("build_training_set: coverage, counts and gold accuracy") {
  auto d = small_dicts();
  auto nb = nb_train({{{"good"}, Polarity::positive}, {{"bad"}, Polarity::negative}});
  std::vector<Document> docs{{"1", {"great", "good"}}, {"2", {"sad", "bad"}}, {"3", {"wow"}}, {"4", {"scared", "bad"}}};
  std::map<std::string, Emotion> gold{{"1", Emotion::happy}, {"2", Emotion::anger}};
  auto ts = build_training_set(docs, d, nb, &gold);
  CHECK(ts.report.n_documents == 4);
  CHECK(ts.report.n_labeled == 4);
  CHECK(ts.report.coverage() == 1.0);
  CHECK(ts.report.counts[static_cast<int>(Emotion::sad)] == 1);
  CHECK(ts.report.accuracy.at(Emotion::happy).correct == 1);
  CHECK(ts.report.accuracy.at(Emotion::sad).incorrect == 1);

  std::vector<Document> clash{{"x", {"great", "sad"}}, {"y", {"furious", "gross"}}};
  auto none = build_training_set(clash, d, nb);
  CHECK(none.examples.empty());
  CHECK(none.report.coverage() == 0.0);
}

TEST_CASE("labels.jsonl round trip") {
  emopanel::testing::TempDir dir("labels");
  std::vector<LabelRow> rows{{"a", Emotion::fear, ChatType::earnings, score(0.2)},
                             {"b", std::nullopt, ChatType::chat, score(0.5)}};
  write_labels(dir.file("labels.jsonl"), rows);
  auto back = load_labels(dir.file("labels.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].emotion == Emotion::fear);
  CHECK(back[0].chat_type == ChatType::earnings);
  CHECK(back[0].sentiment.p_positive == 0.2);
  CHECK_FALSE(back[1].emotion.has_value());
  CHECK(back[1].sentiment.label == Sentiment::neutral);
}
