#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

/// Message normalization, misspell correction, vocabulary and encoding.
namespace emopanel::text {

// ---------------------------------------------------------------------------
// Misspell correction

/// Frequency dictionary with a symmetric-delete index for edit distance <= 2.
class SpellDictionary {
 public:
  static constexpr int kMaxIndexedDistance = 2;

  SpellDictionary() = default;
  explicit SpellDictionary(std::vector<std::pair<std::string, long>> words);

  /// Reads "word<TAB>frequency" lines.
  static SpellDictionary load(const std::string& path);

  bool empty() const { return freq_.empty(); }
  std::size_t size() const { return freq_.size(); }
  bool contains(std::string_view w) const { return freq_.count(std::string(w)) > 0; }
  long frequency(std::string_view w) const;

  /// Nearest word within `max_distance` (restricted Damerau-Levenshtein),
  /// ties broken by higher frequency then lexicographic order.
  std::optional<std::string> nearest(std::string_view token, int max_distance) const;

  /// Best split of `token` into >= 2 dictionary words (max total log
  /// frequency, then fewest pieces), or nullopt if none exists.
  std::optional<std::vector<std::string>> segment_exact(std::string_view token) const;

  /// Split allowing unknown single characters; returns the dictionary words of
  /// the best split and the fraction of characters they cover.
  std::pair<std::vector<std::string>, double> segment_loose(std::string_view token) const;

  const std::unordered_map<std::string, long>& words() const { return freq_; }

 private:
  std::unordered_map<std::string, long> freq_;
  std::unordered_map<std::string, std::vector<std::string>> deletes_;
  std::size_t max_word_len_ = 0;
  double total_ = 0;
};

/// Restricted Damerau-Levenshtein (optimal string alignment) distance.
int damerau_levenshtein(std::string_view a, std::string_view b);

struct SpellOptions {
  int max_correction_distance = 2;
  std::size_t max_segment_words = 15;
  std::size_t max_repeats = 3;
  /// Tokens shorter than this are never corrected.
  std::size_t min_correct_length = 3;
  /// A loose segmentation is accepted only if it covers this share of chars.
  double min_loose_coverage = 0.6;
  std::size_t min_loose_length = 8;
};

/// Dictionary word -> unchanged; exact whitespace segmentation; nearest word
/// within the correction distance; loose segmentation of long strings with
/// repeated words capped and length truncated; otherwise unchanged.
std::vector<std::string> correct_misspellings(std::string_view token, const SpellDictionary& dict,
                                              const SpellOptions& options = {});

// ---------------------------------------------------------------------------
// Normalization

struct NormalizationTables {
  std::vector<std::pair<std::string, std::string>> emoticons;     // lowercase pattern -> token
  std::vector<std::pair<std::string, std::string>> emoji;         // UTF-8 -> name
  std::unordered_map<std::string, std::string> contractions;      // "i've" -> "i have"
  SpellDictionary spell;
  SpellOptions spell_options;
  bool correct_spelling = true;

  /// Tables built from the shipped resources.
  static NormalizationTables defaults();
  /// Loads emoticons.tsv, emoji_map.tsv, contractions.tsv, spell_dict.tsv.
  static NormalizationTables load(const std::string& lexicon_dir);

  /// Tokens produced by translation (emoticon/emoji names and the number
  /// placeholders); they are never spell-corrected.
  const std::set<std::string>& protected_tokens() const;
  /// Only the emoticon/emoji names.
  const std::set<std::string>& emoji_tokens() const;

 private:
  mutable std::set<std::string> protected_cache_;
  mutable std::set<std::string> emoji_cache_;
};

inline constexpr std::string_view kDollarToken = "isdollarvalue";
inline constexpr std::string_view kNumberToken = "isnumbervalue";
inline constexpr std::string_view kPercentToken = "ispercentage";

/// Strips hyperlinks/images/@-mentions/cashtags/leading "RT", lowercases,
/// translates emoticons and emoji, expands contractions, corrects spelling,
/// replaces numbers and percent signs, drops non-word tokens.
std::vector<std::string> normalize(std::string_view raw, const NormalizationTables& tables);

/// Space-joined normalize() output.
std::string normalize_to_string(std::string_view raw, const NormalizationTables& tables);

// ---------------------------------------------------------------------------
// Vocabulary and encoding

using TokenId = std::int32_t;
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kNone = 1;
inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kNoneToken = "NONE";

class Vocabulary {
 public:
  /// Only PAD and NONE.
  Vocabulary();

  std::size_t size() const { return tokens_.size(); }
  std::size_t cap() const { return cap_; }
  /// NONE for out-of-vocabulary tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Token-per-line, ordered by id (PAD and NONE first).
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  /// Content hash (used in checkpoints to detect mismatched vocabularies).
  std::uint64_t hash() const;

  friend Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t cap);

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t cap_ = 0;
};

/// The `cap` most frequent tokens including PAD and NONE (ties broken
/// lexicographically). Throws InvalidArgument for an empty corpus or cap < 2.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t cap = 60000);

struct TokenSequence {
  std::vector<TokenId> ids;      // exactly T entries
  std::size_t true_length = 0;   // <= T; ids[true_length..] are PAD
};

/// OOV -> NONE, keeps the first T tokens, right-pads with PAD.
TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t T = 30);
/// Tokens of the first true_length positions.
std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab);

}  // namespace emopanel::text
