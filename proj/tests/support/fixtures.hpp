#pragma once

#include <string>
#include <vector>

#include "emopanel/bigru.hpp"
#include "emopanel/corpus.hpp"
#include "emopanel/textnorm.hpp"
#include "emopanel/weaklabel.hpp"

namespace emopanel::fixtures {

struct PureCorpus {
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::size_t> labels;
  text::Vocabulary vocab;
  std::vector<bigru::Example> examples;
};

/// Messages built from one class's dictionary phrases (neutral posts from
/// the neutral filler words), cycling through the seven classes.
inline PureCorpus dictionary_pure_corpus(std::size_t n, std::uint64_t seed, std::size_t T = 12) {
  auto dicts = weaklabel::EmotionDictionaries::defaults();
  auto bank = corpus::SynthWordBank::defaults();
  Rng rng(seed);
  PureCorpus c;
  for (std::size_t i = 0; i < n; ++i) {
    auto cls = kAllEmotions[i % kNumEmotions];
    std::vector<std::string> toks;
    auto pieces = rng.uniform_int(1, 3);
    for (int k = 0; k < pieces; ++k) {
      if (cls == Emotion::neutral) {
        const auto& w = bank.neutral_words;
        toks.push_back(w[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w.size()) - 1))]);
      } else {
        const auto& ph = dicts.phrases.at(cls);
        const auto& p = ph[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ph.size()) - 1))];
        toks.insert(toks.end(), p.begin(), p.end());
      }
    }
    c.tokens.push_back(std::move(toks));
    c.labels.push_back(static_cast<std::size_t>(cls));
  }
  c.vocab = text::build_vocab(c.tokens, 60000);
  for (std::size_t i = 0; i < n; ++i) c.examples.push_back({text::encode(c.tokens[i], c.vocab, T), c.labels[i]});
  return c;
}

/// A small model for exercising the network.
inline bigru::Hyperparams tiny_hyper(std::size_t T = 5) {
  bigru::Hyperparams hp;
  hp.T = T;
  hp.embed_dim = 4;
  hp.hidden = 3;
  hp.linear_dim = 0;
  hp.dense1 = 5;
  hp.dense2 = 4;
  hp.classes = 7;
  hp.batch = 8;
  hp.embed_dropout = 0.25;
  hp.validation_fraction = 0;
  return hp;
}

/// Parameters with non-zero biases so every ReLU path is exercised.
inline bigru::ModelParams gradcheck_params(std::size_t vocab, const bigru::Hyperparams& hp, std::uint64_t seed) {
  auto p = bigru::ModelParams::init(vocab, hp, seed);
  Rng rng(seed + 1);
  for (auto& [name, m] : p.tensors())
    if (name.find(".b") != std::string::npos || name[0] == 'b')
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.uniform(-0.3, 0.3);
  return p;
}

}  // namespace emopanel::fixtures
