#include <algorithm>
#include <cmath>

#include "emopanel/aggregate.hpp"

namespace emopanel::aggregate {

std::string_view to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::follower:
      return "follower";
    case WeightScheme::like:
      return "like";
    case WeightScheme::equal:
      return "equal";
  }
  return "follower";
}

WeightScheme parse_weight_scheme(std::string_view s) {
  if (s == "follower") return WeightScheme::follower;
  if (s == "like") return WeightScheme::like;
  if (s == "equal") return WeightScheme::equal;
  throw InvalidArgument("unknown weight scheme '" + std::string(s) + "'");
}

double follower_weight(double followers) {
  if (followers < 0) throw InvalidArgument("follower_weight: negative follower count");
  return 1.0 + std::log1p(followers);
}

double like_weight(double likes) {
  if (likes < 0) throw InvalidArgument("like_weight: negative like count");
  return 1.0 + std::log1p(likes);
}

double message_weight(const MessageObs& m, WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::follower:
      return follower_weight(static_cast<double>(m.user.follower_count));
    case WeightScheme::like:
      return like_weight(static_cast<double>(m.likes));
    case WeightScheme::equal:
      return 1.0;
  }
  return 1.0;
}

std::optional<EmotionVector> aggregate_emotions(std::span<const EmotionVector> emotions,
                                                std::span<const double> weights) {
  if (emotions.size() != weights.size()) throw InvalidArgument("aggregate_emotions: length mismatch");
  EmotionVector acc{};
  double wsum = 0;
  for (std::size_t i = 0; i < emotions.size(); ++i) {
    if (!(weights[i] >= 0)) throw InvalidArgument("aggregate_emotions: negative weight");
    for (int k = 0; k < kNumEmotions; ++k) acc[k] += weights[i] * emotions[i][k];
    wsum += weights[i];
  }
  if (emotions.empty() || wsum <= 0) return std::nullopt;
  for (auto& v : acc) v /= wsum;
  return acc;
}

std::optional<EmotionVector> aggregate_emotions(const std::vector<const MessageObs*>& messages, WeightScheme scheme) {
  std::vector<EmotionVector> e;
  std::vector<double> w;
  for (const auto* m : messages) {
    e.push_back(m->emotion);
    w.push_back(message_weight(*m, scheme));
  }
  return aggregate_emotions(e, w);
}

double aggregate_sentiment(std::span<const weaklabel::SentimentScore> scores, std::span<const double> weights) {
  if (scores.size() != weights.size()) throw InvalidArgument("aggregate_sentiment: length mismatch");
  double num = 0, den = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = scores[i].p_positive;
    switch (scores[i].label) {
      case weaklabel::Sentiment::positive:
        num += p * weights[i];
        den += p;
        break;
      case weaklabel::Sentiment::negative:
        num -= (1 - p) * weights[i];
        den += 1 - p;
        break;
      case weaklabel::Sentiment::neutral:
        break;
    }
  }
  return num / den;
}

double aggregate_sentiment(const std::vector<const MessageObs*>& messages, WeightScheme scheme) {
  std::vector<weaklabel::SentimentScore> s;
  std::vector<double> w;
  for (const auto* m : messages) {
    s.push_back(m->sentiment);
    w.push_back(message_weight(*m, scheme));
  }
  return aggregate_sentiment(s, w);
}

std::vector<double> winsorize(const std::vector<double>& x, double lower, double upper) {
  if (!(lower >= 0 && lower < upper && upper <= 1)) throw InvalidArgument("winsorize: need 0 <= lower < upper <= 1");
  std::vector<double> sorted;
  for (double v : x)
    if (!is_missing(v)) sorted.push_back(v);
  if (sorted.empty()) throw InvalidArgument("winsorize: empty series");
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = [&](double p) {
    auto r = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    return sorted[std::clamp<std::size_t>(r, 1, sorted.size()) - 1];
  };
  const double lo = rank(lower), hi = rank(upper);
  std::vector<double> out(x);
  for (double& v : out)
    if (!is_missing(v)) v = std::clamp(v, lo, hi);
  return out;
}

double volatility(std::span<const double> returns) {
  if (returns.size() < 2) return kNaN;
  double mean = 0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double ss = 0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(returns.size() - 1));
}

}  // namespace emopanel::aggregate
