#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "emopanel/emotion.hpp"

namespace emopanel::text {
struct NormalizationTables;
}

/// Dictionary weak supervision with a Naive Bayes sentiment gate.
namespace emopanel::weaklabel {

using Phrase = std::vector<std::string>;

/// One phrase list per emotion; neutral stays empty.
struct EmotionDictionaries {
  std::map<Emotion, std::vector<Phrase>> phrases;

  /// Splits every entry on spaces; checks the invariants.
  static EmotionDictionaries from_lists(const std::map<Emotion, std::vector<std::string>>& lists);
  static EmotionDictionaries defaults();
  /// Reads dictionaries/<class>.txt, normalizing every entry with `tables`.
  static EmotionDictionaries load(const std::string& dir, const text::NormalizationTables& tables);

  /// Throws InvalidArgument unless the six non-neutral sets are non-empty,
  /// neutral is empty and the sets are pairwise disjoint.
  void validate() const;
};

struct InfoDictionaries {
  std::vector<Phrase> fundamental;
  std::vector<Phrase> earnings;

  static InfoDictionaries from_lists(const std::vector<std::string>& fundamental,
                                     const std::vector<std::string>& earnings);
  static InfoDictionaries defaults();
  /// Reads fundamental.txt and earnings.txt.
  static InfoDictionaries load(const std::string& dir, const text::NormalizationTables& tables);
  void validate() const;
};

/// True when `phrase` occurs as a contiguous run of `tokens`.
bool contains_phrase(const std::vector<std::string>& tokens, const Phrase& phrase);

/// Every class with at least one dictionary hit.
std::set<Emotion> matched_classes(const std::vector<std::string>& tokens, const EmotionDictionaries& dicts);

// ---------------------------------------------------------------------------
// Sentiment

enum class Polarity { negative = 0, positive = 1 };
enum class Sentiment { negative, neutral, positive };

std::string_view to_string(Sentiment s);

struct SentimentScore {
  double p_positive = 0.5;
  Sentiment label = Sentiment::neutral;
};

/// positive iff p > 0.51, negative iff p < 0.49.
Sentiment sentiment_from_probability(double p);

/// Binarized multinomial Naive Bayes over token presence.
struct NBModel {
  double smoothing = 1.0;
  std::array<double, 2> log_prior{};  // indexed by Polarity
  /// token -> log P(token | class) for negative and positive.
  std::unordered_map<std::string, std::array<double, 2>> log_likelihood;
  /// Tokens never used as evidence (emoticon/emoji names).
  std::set<std::string> excluded;

  void save(const std::string& path) const;
  static NBModel load(const std::string& path);
};

using PolarityExample = std::pair<std::vector<std::string>, Polarity>;

/// Throws InvalidArgument if a class is missing or smoothing <= 0.
NBModel nb_train(const std::vector<PolarityExample>& labeled, double smoothing = 1.0,
                 const std::set<std::string>& excluded = {});

/// Unseen and excluded tokens carry no evidence; no evidence gives the prior.
double nb_probability_positive(const NBModel& model, const std::vector<std::string>& tokens);
SentimentScore sentiment_classify(const NBModel& model, const std::vector<std::string>& tokens);

// ---------------------------------------------------------------------------
// Labels

/// One matched class passing the sentiment gate (happy needs positive;
/// sad, anger, disgust and fear need negative; surprise is exempt) gives that
/// class; no match with neutral sentiment gives neutral; otherwise abstain.
std::optional<Emotion> label_emotion(const std::vector<std::string>& tokens, const EmotionDictionaries& dicts,
                                     const SentimentScore& sentiment);

enum class ChatType { chat, fundamental, earnings };
std::string_view to_string(ChatType c);
ChatType parse_chat_type(std::string_view s);

/// earnings > fundamental > chat.
ChatType label_chat_type(const std::vector<std::string>& tokens, const InfoDictionaries& dicts);

/// correct / (correct + incorrect); NaN when both are zero.
double labeling_accuracy(std::size_t correct, std::size_t incorrect);

struct Document {
  std::string id;
  std::vector<std::string> tokens;
};

struct LabeledExample {
  std::string id;
  std::vector<std::string> tokens;
  Emotion label;
};

struct ClassAccuracy {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  double accuracy() const { return labeling_accuracy(correct, incorrect); }
};

struct LabelReport {
  std::size_t n_documents = 0;
  std::size_t n_labeled = 0;
  std::array<std::size_t, kNumEmotions> counts{};
  /// Filled for classes present in the gold subset; keyed by assigned label.
  std::map<Emotion, ClassAccuracy> accuracy;
  double coverage() const;
};

struct TrainingSet {
  std::vector<LabeledExample> examples;
  LabelReport report;
};

/// Labels every document. With `gold`, per-class accuracy compares each
/// emitted label against the gold class of that document.
TrainingSet build_training_set(const std::vector<Document>& corpus, const EmotionDictionaries& dicts,
                               const NBModel& nb, const std::map<std::string, Emotion>* gold = nullptr);

struct LabelRow {
  std::string message_id;
  std::optional<Emotion> emotion;
  ChatType chat_type = ChatType::chat;
  SentimentScore sentiment;
};

/// labels.jsonl: message_id, emotion_label (class or "abstain"), chat_type,
/// p_positive, sentiment.
void write_labels(const std::string& path, const std::vector<LabelRow>& rows);
std::vector<LabelRow> load_labels(const std::string& path);

}  // namespace emopanel::weaklabel
