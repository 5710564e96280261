#include <cmath>
#include <fstream>

#include "emopanel/common.hpp"
#include "emopanel/weaklabel.hpp"

namespace emopanel::weaklabel {

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::negative:
      return "negative";
    case Sentiment::neutral:
      return "neutral";
    case Sentiment::positive:
      return "positive";
  }
  return "neutral";
}

Sentiment sentiment_from_probability(double p) {
  if (p > 0.51) return Sentiment::positive;
  if (p < 0.49) return Sentiment::negative;
  return Sentiment::neutral;
}

NBModel nb_train(const std::vector<PolarityExample>& labeled, double smoothing, const std::set<std::string>& excluded) {
  if (!(smoothing > 0)) throw InvalidArgument("nb_train: smoothing must be > 0");
  std::array<std::size_t, 2> docs{};
  std::array<double, 2> totals{};
  std::unordered_map<std::string, std::array<double, 2>> counts;
  for (const auto& [tokens, pol] : labeled) {
    auto c = static_cast<std::size_t>(pol);
    ++docs[c];
    std::set<std::string> present(tokens.begin(), tokens.end());
    for (const auto& t : present) {
      if (excluded.count(t)) continue;
      counts[t][c] += 1;
      totals[c] += 1;
    }
  }
  if (docs[0] == 0 || docs[1] == 0) throw InvalidArgument("nb_train: both polarities must be present");

  NBModel m;
  m.smoothing = smoothing;
  m.excluded = excluded;
  const double n = static_cast<double>(docs[0] + docs[1]);
  const double v = static_cast<double>(counts.size());
  for (std::size_t c = 0; c < 2; ++c) m.log_prior[c] = std::log(static_cast<double>(docs[c]) / n);
  for (const auto& [t, k] : counts) {
    auto& ll = m.log_likelihood[t];
    for (std::size_t c = 0; c < 2; ++c) ll[c] = std::log((k[c] + smoothing) / (totals[c] + smoothing * v));
  }
  return m;
}

double nb_probability_positive(const NBModel& model, const std::vector<std::string>& tokens) {
  double log_odds = model.log_prior[1] - model.log_prior[0];
  std::set<std::string> present(tokens.begin(), tokens.end());
  for (const auto& t : present) {
    if (model.excluded.count(t)) continue;
    auto it = model.log_likelihood.find(t);
    if (it == model.log_likelihood.end()) continue;
    log_odds += it->second[1] - it->second[0];
  }
  return 1.0 / (1.0 + std::exp(-log_odds));
}

SentimentScore sentiment_classify(const NBModel& model, const std::vector<std::string>& tokens) {
  double p = nb_probability_positive(model, tokens);
  return {p, sentiment_from_probability(p)};
}

void NBModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "#smoothing\t" << format_double(smoothing) << '\n';
  out << "#prior\t" << format_double(log_prior[0]) << '\t' << format_double(log_prior[1]) << '\n';
  for (const auto& t : excluded) out << "#excluded\t" << t << '\n';
  std::map<std::string, std::array<double, 2>> sorted(log_likelihood.begin(), log_likelihood.end());
  for (const auto& [t, ll] : sorted) out << t << '\t' << format_double(ll[0]) << '\t' << format_double(ll[1]) << '\n';
}

NBModel NBModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  NBModel m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f[0] == "#smoothing" && f.size() == 2) {
      m.smoothing = parse_double(f[1], lineno);
    } else if (f[0] == "#prior" && f.size() == 3) {
      m.log_prior = {parse_double(f[1], lineno), parse_double(f[2], lineno)};
    } else if (f[0] == "#excluded" && f.size() == 2) {
      m.excluded.insert(f[1]);
    } else if (f.size() == 3) {
      m.log_likelihood[f[0]] = {parse_double(f[1], lineno), parse_double(f[2], lineno)};
    } else {
      throw DataError(path + ": malformed model line", lineno);
    }
  }
  return m;
}

}  // namespace emopanel::weaklabel
