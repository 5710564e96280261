#include <algorithm>
#include <fstream>
#include <map>

#include "emopanel/common.hpp"
#include "emopanel/textnorm.hpp"

namespace emopanel::text {

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kNoneToken));
  cap_ = 2;
}

void Vocabulary::add(std::string token) {
  auto id = static_cast<TokenId>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw DataError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kNone : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw InvalidArgument("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Vocabulary v;
  v.tokens_.clear();
  v.ids_.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      v.add(line);
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what(), lineno);
    }
  }
  if (v.tokens_.size() < 2 || v.tokens_[0] != kPadToken || v.tokens_[1] != kNoneToken)
    throw DataError(path + ": vocabulary must start with " + std::string(kPadToken) + " and " +
                    std::string(kNoneToken));
  v.cap_ = v.tokens_.size();
  return v;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t cap) {
  if (cap < 2) throw InvalidArgument("build_vocab: cap must be >= 2");
  if (corpus.empty()) throw InvalidArgument("build_vocab: empty corpus");

  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& t : doc)
      if (t != kPadToken && t != kNoneToken) ++counts[t];

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (std::size_t i = 0; i < ranked.size() && v.size() < cap; ++i) v.add(ranked[i].first);
  v.cap_ = cap;
  return v;
}

TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t T) {
  if (T < 1) throw InvalidArgument("encode: T must be >= 1");
  TokenSequence seq;
  seq.true_length = std::min(tokens.size(), T);
  seq.ids.assign(T, kPad);
  for (std::size_t i = 0; i < seq.true_length; ++i) seq.ids[i] = vocab.id(tokens[i]);
  return seq;
}

std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(seq.true_length);
  for (std::size_t i = 0; i < seq.true_length && i < seq.ids.size(); ++i) out.push_back(vocab.token(seq.ids[i]));
  return out;
}

}  // namespace emopanel::text
