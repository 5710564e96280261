#include <fstream>

#include <json.hpp>

#include "emopanel/common.hpp"
#include "emopanel/weaklabel.hpp"

namespace emopanel::weaklabel {

namespace {

bool gate_passes(Emotion e, Sentiment s) {
  switch (e) {
    case Emotion::happy:
      return s == Sentiment::positive;
    case Emotion::surprise:
      return true;
    case Emotion::neutral:
      return s == Sentiment::neutral;
    default:
      return s == Sentiment::negative;
  }
}

Sentiment parse_sentiment(std::string_view s) {
  if (s == "positive") return Sentiment::positive;
  if (s == "negative") return Sentiment::negative;
  if (s == "neutral") return Sentiment::neutral;
  throw DataError("unknown sentiment '" + std::string(s) + "'");
}

}  // namespace

std::optional<Emotion> label_emotion(const std::vector<std::string>& tokens, const EmotionDictionaries& dicts,
                                     const SentimentScore& sentiment) {
  auto hits = matched_classes(tokens, dicts);
  if (hits.empty()) {
    if (sentiment.label == Sentiment::neutral) return Emotion::neutral;
    return std::nullopt;
  }
  if (hits.size() > 1) return std::nullopt;
  Emotion e = *hits.begin();
  if (!gate_passes(e, sentiment.label)) return std::nullopt;
  return e;
}

double labeling_accuracy(std::size_t correct, std::size_t incorrect) {
  if (correct + incorrect == 0) return kNaN;
  return static_cast<double>(correct) / static_cast<double>(correct + incorrect);
}

double LabelReport::coverage() const {
  return n_documents == 0 ? 0.0 : static_cast<double>(n_labeled) / static_cast<double>(n_documents);
}

TrainingSet build_training_set(const std::vector<Document>& corpus, const EmotionDictionaries& dicts,
                               const NBModel& nb, const std::map<std::string, Emotion>* gold) {
  TrainingSet ts;
  ts.report.n_documents = corpus.size();
  for (const auto& doc : corpus) {
    auto label = label_emotion(doc.tokens, dicts, sentiment_classify(nb, doc.tokens));
    if (!label) continue;
    ++ts.report.n_labeled;
    ++ts.report.counts[static_cast<std::size_t>(*label)];
    if (gold) {
      auto g = gold->find(doc.id);
      if (g != gold->end()) {
        auto& acc = ts.report.accuracy[*label];
        (g->second == *label ? acc.correct : acc.incorrect) += 1;
      }
    }
    ts.examples.push_back({doc.id, doc.tokens, *label});
  }
  return ts;
}

void write_labels(const std::string& path, const std::vector<LabelRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["message_id"] = r.message_id;
    j["emotion_label"] = r.emotion ? std::string(emotion_name(*r.emotion)) : std::string("abstain");
    j["chat_type"] = std::string(to_string(r.chat_type));
    j["p_positive"] = r.sentiment.p_positive;
    j["sentiment"] = std::string(to_string(r.sentiment.label));
    out << j.dump() << '\n';
  }
}

std::vector<LabelRow> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<LabelRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LabelRow r;
      r.message_id = j.at("message_id").get<std::string>();
      auto lab = j.at("emotion_label").get<std::string>();
      if (lab != "abstain") {
        auto e = emotion_from_name(lab);
        if (!e) throw DataError("unknown emotion '" + lab + "'");
        r.emotion = *e;
      }
      r.chat_type = parse_chat_type(j.at("chat_type").get<std::string>());
      r.sentiment.p_positive = j.at("p_positive").get<double>();
      r.sentiment.label = parse_sentiment(j.at("sentiment").get<std::string>());
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what(), lineno);
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what(), lineno);
    }
  }
  return rows;
}

}  // namespace emopanel::weaklabel
