#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emopanel/bigru.hpp"
#include "emopanel/textnorm.hpp"

/// Shapley word importances over token positions, with PAD as the baseline.
namespace emopanel::attribution {

/// Value of a (partially masked) sequence, e.g. the model probability of one class.
using ValueFunction = std::function<double(const text::TokenSequence&)>;

/// Probability of class `cls` under the BiGRU.
ValueFunction model_value(const bigru::ModelParams& params, std::size_t cls);

struct Attribution {
  std::string message_id;
  std::size_t cls = 0;
  text::TokenSequence seq;
  std::vector<double> phi;         // one per position; 0 beyond true_length
  double full_value = 0;           // f(all positions)
  double base_value = 0;           // f(no positions)
};

inline constexpr std::size_t kMaxExactPositions = 12;

/// Exact enumeration over the 2^n coalitions of the first true_length
/// positions. Throws InvalidArgument when true_length exceeds 12.
Attribution shapley_exact(const ValueFunction& f, const text::TokenSequence& seq, std::size_t cls = 0);

/// Permutation-sampling estimate; deterministic for a fixed seed. Coalition
/// values are memoized, so short messages cost at most 2^n evaluations.
Attribution shapley_sampled(const ValueFunction& f, const text::TokenSequence& seq, std::size_t n_samples,
                            std::uint64_t seed, std::size_t cls = 0);

/// Exact when the message is short enough, sampled otherwise.
Attribution shapley(const ValueFunction& f, const text::TokenSequence& seq, std::size_t n_samples,
                    std::uint64_t seed, std::size_t cls = 0);

struct WordImportance {
  std::string word;
  double mean_abs_phi = 0;
  std::size_t count = 0;
};

/// Word-wise mean of |phi| over every occurrence, keeping words seen at least
/// `min_count` times, sorted by descending importance (ties by word).
std::vector<WordImportance> global_importance(const std::vector<Attribution>& attributions,
                                              const text::Vocabulary& vocab, std::size_t min_count = 50);

/// message_id,position,word,class,phi (positions within true_length).
void write_attribution_csv(const std::string& path, const std::vector<Attribution>& attributions,
                           const text::Vocabulary& vocab);
/// class,word,mean_abs_phi,count for each (class name, table) pair.
void write_global_importance_csv(const std::string& path,
                                 const std::vector<std::pair<std::string, std::vector<WordImportance>>>& tables);

}  // namespace emopanel::attribution
