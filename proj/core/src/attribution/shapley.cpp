#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include "emopanel/attribution.hpp"
#include "emopanel/emotion.hpp"

namespace emopanel::attribution {

namespace {

text::TokenSequence masked(const text::TokenSequence& seq, std::uint64_t keep) {
  text::TokenSequence out = seq;
  for (std::size_t i = 0; i < seq.true_length; ++i)
    if (!(keep >> i & 1U)) out.ids[i] = text::kPad;
  return out;
}

Attribution blank(const text::TokenSequence& seq, std::size_t cls) {
  if (seq.true_length > seq.ids.size()) throw InvalidArgument("shapley: true_length exceeds sequence length");
  if (seq.true_length > 63) throw InvalidArgument("shapley: at most 63 positions supported");
  Attribution a;
  a.cls = cls;
  a.seq = seq;
  a.phi.assign(seq.ids.size(), 0.0);
  return a;
}

std::string class_label(std::size_t cls) {
  if (cls < static_cast<std::size_t>(kNumEmotions)) return std::string(emotion_name(static_cast<Emotion>(cls)));
  return std::to_string(cls);
}

}  // namespace

ValueFunction model_value(const bigru::ModelParams& params, std::size_t cls) {
  if (cls >= params.classes()) throw InvalidArgument("model_value: class out of range");
  return [&params, cls](const text::TokenSequence& s) {
    return bigru::predict(s, params)(static_cast<Eigen::Index>(cls));
  };
}

Attribution shapley_exact(const ValueFunction& f, const text::TokenSequence& seq, std::size_t cls) {
  const std::size_t n = seq.true_length;
  if (n > kMaxExactPositions)
    throw InvalidArgument("shapley_exact: " + std::to_string(n) + " positions exceed " +
                          std::to_string(kMaxExactPositions) + "; use shapley_sampled");
  Attribution a = blank(seq, cls);
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  std::vector<double> v(full + 1);
  for (std::uint64_t m = 0; m <= full; ++m) v[m] = f(masked(seq, m));

  // w[s] = s! (n-s-1)! / n!
  std::vector<double> w(n);
  for (std::size_t s = 0; s < n; ++s)
    w[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(static_cast<double>(n - s)) - std::lgamma(n + 1.0));

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    double phi = 0;
    for (std::uint64_t m = 0; m <= full; ++m)
      if (!(m & bit)) phi += w[static_cast<std::size_t>(std::popcount(m))] * (v[m | bit] - v[m]);
    a.phi[i] = phi;
  }
  a.full_value = v[full];
  a.base_value = v[0];
  return a;
}

Attribution shapley_sampled(const ValueFunction& f, const text::TokenSequence& seq, std::size_t n_samples,
                            std::uint64_t seed, std::size_t cls) {
  if (n_samples == 0) throw InvalidArgument("shapley_sampled: n_samples must be >= 1");
  Attribution a = blank(seq, cls);
  const std::size_t n = seq.true_length;
  std::unordered_map<std::uint64_t, double> memo;
  auto value = [&](std::uint64_t m) {
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;
    double x = f(masked(seq, m));
    memo.emplace(m, x);
    return x;
  };
  a.base_value = value(0);
  a.full_value = n == 0 ? a.base_value : value((std::uint64_t{1} << n) - 1);
  if (n == 0) return a;

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sum(n, 0.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    rng.shuffle(order);
    std::uint64_t m = 0;
    double prev = a.base_value;
    for (auto i : order) {
      m |= std::uint64_t{1} << i;
      double cur = value(m);
      sum[i] += cur - prev;
      prev = cur;
    }
  }
  for (std::size_t i = 0; i < n; ++i) a.phi[i] = sum[i] / static_cast<double>(n_samples);
  return a;
}

Attribution shapley(const ValueFunction& f, const text::TokenSequence& seq, std::size_t n_samples,
                    std::uint64_t seed, std::size_t cls) {
  if (seq.true_length <= kMaxExactPositions) return shapley_exact(f, seq, cls);
  return shapley_sampled(f, seq, n_samples, seed, cls);
}

std::vector<WordImportance> global_importance(const std::vector<Attribution>& attributions,
                                              const text::Vocabulary& vocab, std::size_t min_count) {
  if (attributions.empty()) throw InvalidArgument("global_importance: empty sample");
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& a : attributions)
    for (std::size_t i = 0; i < a.seq.true_length; ++i) {
      if (a.seq.ids[i] == text::kPad) continue;
      auto& [sum, count] = acc[vocab.token(a.seq.ids[i])];
      sum += std::abs(a.phi[i]);
      ++count;
    }
  std::vector<WordImportance> out;
  for (const auto& [word, sc] : acc)
    if (sc.second >= min_count) out.push_back({word, sc.first / static_cast<double>(sc.second), sc.second});
  std::stable_sort(out.begin(), out.end(),
                   [](const WordImportance& x, const WordImportance& y) { return x.mean_abs_phi > y.mean_abs_phi; });
  return out;
}

void write_attribution_csv(const std::string& path, const std::vector<Attribution>& attributions,
                           const text::Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "message_id,position,word,class,phi\n";
  for (const auto& a : attributions)
    for (std::size_t i = 0; i < a.seq.true_length; ++i)
      out << a.message_id << ',' << i << ',' << vocab.token(a.seq.ids[i]) << ',' << class_label(a.cls) << ','
          << format_double(a.phi[i]) << '\n';
}

void write_global_importance_csv(const std::string& path,
                                 const std::vector<std::pair<std::string, std::vector<WordImportance>>>& tables) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "class,word,mean_abs_phi,count\n";
  for (const auto& [cls, table] : tables)
    for (const auto& w : table) out << cls << ',' << w.word << ',' << format_double(w.mean_abs_phi) << ',' << w.count << '\n';
}

}  // namespace emopanel::attribution
