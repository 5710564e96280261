#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "emopanel/bigru.hpp"

namespace emopanel::bigru {

namespace {

std::size_t argmax(const Vector& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

std::vector<Example> select(const std::vector<Example>& data, const std::vector<std::size_t>& idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

}  // namespace

Metrics evaluate(const std::vector<Example>& data, const ModelParams& params) {
  Metrics m;
  if (data.empty()) return {kNaN, kNaN};
  std::size_t correct = 0;
  for (const auto& ex : data) {
    Vector p = forward(ex.seq, params);
    m.loss += loss(p, ex.label);
    correct += argmax(p) == ex.label;
  }
  m.loss /= static_cast<double>(data.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return m;
}

void Optimizer::step(ModelParams& params, const Gradients& grads) {
  auto p = params.tensors();
  auto g = const_cast<ModelParams&>(grads.dense).tensors();
  if (momentum_ == 0.0) {
    for (std::size_t i = 1; i < p.size(); ++i) *p[i].second -= lr_ * *g[i].second;
    for (const auto& [id, v] : grads.embed) params.E.row(id) -= lr_ * v.transpose();
    return;
  }
  if (!velocity_) {
    velocity_ = params;
    for (auto& [name, m] : velocity_->tensors()) m->setZero();
  }
  auto v = velocity_->tensors();
  for (std::size_t i = 1; i < p.size(); ++i) {
    *v[i].second = momentum_ * *v[i].second - lr_ * *g[i].second;
    *p[i].second += *v[i].second;
  }
  velocity_->E *= momentum_;
  for (const auto& [id, gv] : grads.embed) velocity_->E.row(id) -= lr_ * gv.transpose();
  params.E += velocity_->E;
}

Gradients batch_gradients(const std::vector<Example>& data, const std::vector<std::size_t>& batch,
                          const ModelParams& params, double dropout, Rng& rng, std::size_t threads) {
  if (batch.empty()) throw InvalidArgument("batch_gradients: empty batch");
  // Masks are drawn up front in batch order so results do not depend on threading.
  std::vector<Matrix> masks;
  if (dropout > 0) {
    masks.reserve(batch.size());
    for (auto i : batch) masks.push_back(dropout_mask(data[i].seq.ids.size(), params.embed_dim(), dropout, rng));
  }
  auto shard = [&](std::size_t lo, std::size_t hi) {
    Gradients acc = Gradients::zeros_like(params);
    ForwardCache cache;
    for (std::size_t k = lo; k < hi; ++k) {
      const Example& ex = data[batch[k]];
      forward(ex.seq, params, &cache, masks.empty() ? nullptr : &masks[k]);
      acc.add(backward(cache, params, ex.label));
    }
    return acc;
  };

  const std::size_t n_shards = std::min(threads, batch.size());
  Gradients total;
  if (n_shards <= 1) {
    total = shard(0, batch.size());
  } else {
    std::vector<Gradients> parts(n_shards);
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < n_shards; ++s) {
      std::size_t lo = batch.size() * s / n_shards, hi = batch.size() * (s + 1) / n_shards;
      pool.emplace_back([&, s, lo, hi] { parts[s] = shard(lo, hi); });
    }
    for (auto& t : pool) t.join();
    total = std::move(parts[0]);
    for (std::size_t s = 1; s < n_shards; ++s) total.add(parts[s]);
  }
  total.scale(1.0 / static_cast<double>(batch.size()));
  return total;
}

TrainResult train_from(const std::vector<Example>& data, ModelParams params, const Hyperparams& hp) {
  hp.validate();
  params.check_shapes();
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  for (const auto& ex : data)
    if (ex.label >= params.classes()) throw InvalidArgument("train: label out of range");

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<Example> train_set, val_set;
  if (hp.validation_fraction > 0 && data.size() >= 2) {
    Rng split_rng(derive_seed(hp.seed, "split"));
    split_rng.shuffle(idx);
    auto n_val = static_cast<std::size_t>(std::llround(hp.validation_fraction * static_cast<double>(data.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, data.size() - 1);
    val_set = select(data, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val)});
    train_set = select(data, {idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end()});
  } else {
    train_set = data;
  }

  Rng order_rng(derive_seed(hp.seed, "order"));
  Rng drop_rng(derive_seed(hp.seed, "dropout"));
  Optimizer opt(hp.lr, hp.momentum);
  TrainResult res;
  res.params = params;
  double best = std::numeric_limits<double>::infinity();
  std::size_t waited = 0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += hp.batch) {
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), lo + hp.batch)));
      opt.step(params, batch_gradients(train_set, batch, params, hp.embed_dropout, drop_rng, hp.threads));
    }
    EpochStats st;
    st.epoch = epoch;
    auto tm = evaluate(train_set, params);
    st.train_loss = tm.loss;
    st.train_acc = tm.accuracy;
    if (!val_set.empty()) {
      auto vm = evaluate(val_set, params);
      st.val_loss = vm.loss;
      st.val_acc = vm.accuracy;
    }
    res.history.push_back(st);

    if (val_set.empty()) {
      res.params = params;
      res.best_epoch = epoch;
      continue;
    }
    if (st.val_loss < best) {
      best = st.val_loss;
      res.params = params;
      res.best_epoch = epoch;
      waited = 0;
    } else if (++waited >= hp.early_stop_patience) {
      break;
    }
  }
  return res;
}

TrainResult train(const std::vector<Example>& data, std::size_t vocab_size, const Hyperparams& hp) {
  return train_from(data, ModelParams::init(vocab_size, hp, derive_seed(hp.seed, "init")), hp);
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  if (n < k) throw InvalidArgument("kfold: dataset smaller than k");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f)
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(n * f / k),
                    idx.begin() + static_cast<std::ptrdiff_t>(n * (f + 1) / k));
  return folds;
}

CvResult kfold_cv(const std::vector<Example>& data, std::size_t vocab_size, std::size_t k, const Hyperparams& hp) {
  auto folds = kfold_partition(data.size(), k, hp.seed);
  CvResult cv;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> in;
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) in.insert(in.end(), folds[g].begin(), folds[g].end());
    auto train_part = select(data, in);
    auto held_part = select(data, folds[f]);
    auto res = train(train_part, vocab_size, hp);
    FoldResult fr{evaluate(train_part, res.params), evaluate(held_part, res.params)};
    cv.folds.push_back(fr);
    if (fr.train.loss < best) {
      best = fr.train.loss;
      cv.selected = f;
      cv.selected_params = std::move(res.params);
    }
  }
  return cv;
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& gold,
                                 std::size_t classes) {
  if (preds.size() != gold.size()) throw InvalidArgument("confusion_matrix: length mismatch");
  auto C = static_cast<Eigen::Index>(classes);
  ConfusionMatrix cm;
  cm.counts = Matrix::Zero(C, C);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= classes || gold[i] >= classes) throw InvalidArgument("confusion_matrix: class out of range");
    cm.counts(static_cast<Eigen::Index>(gold[i]), static_cast<Eigen::Index>(preds[i])) += 1;
    correct += preds[i] == gold[i];
  }
  cm.normalized = cm.counts;
  for (Eigen::Index r = 0; r < C; ++r) {
    double s = cm.counts.row(r).sum();
    if (s > 0) cm.normalized.row(r) /= s;
  }
  cm.accuracy = preds.empty() ? kNaN : static_cast<double>(correct) / static_cast<double>(preds.size());
  return cm;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& h : history)
    out << h.epoch << ',' << format_double(h.train_loss) << ',' << format_double(h.train_acc) << ','
        << format_double(h.val_loss) << ',' << format_double(h.val_acc) << '\n';
}

}  // namespace emopanel::bigru
