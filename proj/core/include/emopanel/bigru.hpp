#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "emopanel/common.hpp"
#include "emopanel/textnorm.hpp"

/// Many-to-one bidirectional GRU classifier trained with minibatch SGD.
///
/// Weight matrices follow the row-vector convention of the GRU equations:
/// an input of width d feeding h units is stored as a d x h matrix W and the
/// layer computes W^T x + b.
namespace emopanel::bigru {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Hyperparams {
  std::size_t T = 30;
  std::size_t embed_dim = 200;
  std::size_t hidden = 256;
  /// Width q of the linear layer on the concatenated states; 0 means 2*hidden.
  std::size_t linear_dim = 0;
  std::size_t dense1 = 256;
  std::size_t dense2 = 128;
  std::size_t classes = 7;
  std::size_t batch = 4096;
  double lr = 0.01;
  double momentum = 0.0;
  double embed_dropout = 0.25;
  std::size_t early_stop_patience = 1;
  std::size_t max_epochs = 20;
  /// Share of the training data held out for early stopping; 0 disables it.
  double validation_fraction = 0.1;
  /// Gradient shards computed concurrently per minibatch (1 = deterministic
  /// single-threaded mode).
  std::size_t threads = 1;
  std::uint64_t seed = 1;

  std::size_t q() const { return linear_dim == 0 ? 2 * hidden : linear_dim; }

  /// Full-size model: d=200, h=256, dense 256/128, batch 4096, lr 0.01.
  static Hyperparams full_scale();
  /// Small widths and batch 32 for desk-scale runs.
  static Hyperparams desk_scale();
  void validate() const;
};

struct GruWeights {
  Matrix Wxz, Wxr, Wxh;  // d x h
  Matrix Whz, Whr, Whh;  // h x h
  Matrix bz, br, bh;     // h x 1
};

struct ModelParams {
  Matrix E;  // |vocab| x d
  GruWeights fwd, bwd;
  Matrix Whq, bq;  // 2h x q, q x 1
  Matrix Wo, bo;   // q x q', q' x 1
  Matrix Wd, bd;   // q' x q'', q'' x 1
  Matrix Wy, by;   // q'' x y, y x 1

  std::size_t vocab_size() const { return static_cast<std::size_t>(E.rows()); }
  std::size_t embed_dim() const { return static_cast<std::size_t>(E.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(fwd.Whz.rows()); }
  std::size_t classes() const { return static_cast<std::size_t>(Wy.cols()); }

  /// Every tensor with a stable name, in a fixed order.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;

  /// Zero tensors with the shapes implied by the arguments.
  static ModelParams zeros(std::size_t vocab, const Hyperparams& hp);
  /// Embeddings U(-0.05, 0.05); weights U(-a, a) with a = sqrt(3 / fan_in); biases 0.
  static ModelParams init(std::size_t vocab, const Hyperparams& hp, std::uint64_t seed);

  void check_shapes() const;
  bool all_finite() const;
};

/// Gradients share ModelParams' layout except that the embedding gradient is
/// kept per touched row.
struct Gradients {
  ModelParams dense;  // dense.E is left empty
  std::unordered_map<text::TokenId, Vector> embed;

  static Gradients zeros_like(const ModelParams& p);
  void add(const Gradients& other);
  void scale(double s);
  /// Full |vocab| x d embedding gradient.
  Matrix embed_dense(std::size_t vocab, std::size_t d) const;
};

/// One GRU step. Throws InvalidArgument on shape mismatch.
Vector gru_cell(const Vector& x, const Vector& h_prev, const GruWeights& w);

struct StepCache {
  std::size_t t;
  Vector x, h_prev, z, r, n, h;
};

struct ForwardCache {
  std::vector<text::TokenId> ids;
  Matrix mask;  // T x d multipliers applied to embeddings (empty in eval mode)
  std::vector<StepCache> fwd, bwd;  // in processing order
  Vector H, O, Dpre, D, D2pre, D2, probs;
};

/// Embedding, forward and backward GRU over non-PAD positions, concatenated
/// final states, linear layer, two ReLU layers, softmax. `dropout_mask`
/// (T x d, entries 0 or 1/(1-rate)) is applied to embeddings when given.
Vector forward(const text::TokenSequence& seq, const ModelParams& params, ForwardCache* cache = nullptr,
               const Matrix* dropout_mask = nullptr);

/// Probabilities without caching.
inline Vector predict(const text::TokenSequence& seq, const ModelParams& params) {
  return forward(seq, params);
}

/// Cross-entropy -log probs[target]; probabilities below 1e-12 are clamped
/// and reported through `clamped`.
double loss(const Vector& probs, std::size_t target, bool* clamped = nullptr);

/// Exact gradient of loss(forward(...), target) with respect to all parameters.
Gradients backward(const ForwardCache& cache, const ModelParams& params, std::size_t target);

/// T x d dropout mask drawn from `rng`.
Matrix dropout_mask(std::size_t T, std::size_t d, double rate, Rng& rng);

// ---------------------------------------------------------------------------
// Training

struct Example {
  text::TokenSequence seq;
  std::size_t label = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0, train_acc = 0;
  double val_loss = kNaN, val_acc = kNaN;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  /// Epoch whose parameters were kept (best validation loss, or the last).
  std::size_t best_epoch = 0;
};

struct Metrics {
  double loss = 0;
  double accuracy = 0;
};

Metrics evaluate(const std::vector<Example>& data, const ModelParams& params);

/// Applies one SGD (optionally momentum) update in place.
class Optimizer {
 public:
  Optimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(ModelParams& params, const Gradients& grads);

 private:
  double lr_, momentum_;
  std::optional<ModelParams> velocity_;
};

/// Mean gradient over `batch` (indices into `data`).
Gradients batch_gradients(const std::vector<Example>& data, const std::vector<std::size_t>& batch,
                          const ModelParams& params, double dropout, Rng& rng, std::size_t threads = 1);

/// Seeded minibatch SGD with per-epoch shuffling and early stopping on the
/// held-out validation loss (best parameters restored).
TrainResult train(const std::vector<Example>& data, std::size_t vocab_size, const Hyperparams& hp);
/// Same, starting from given parameters.
TrainResult train_from(const std::vector<Example>& data, ModelParams init, const Hyperparams& hp);

struct FoldResult {
  Metrics train, held;
};

struct CvResult {
  std::vector<FoldResult> folds;
  /// Fold with the smallest in-sample loss.
  std::size_t selected = 0;
  ModelParams selected_params;
};

/// Deterministic seeded partition into k folds (sizes differ by at most one).
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);
CvResult kfold_cv(const std::vector<Example>& data, std::size_t vocab_size, std::size_t k, const Hyperparams& hp);

struct ConfusionMatrix {
  Matrix counts;      // gold x predicted
  Matrix normalized;  // rows sum to 1 (empty rows stay zero)
  double accuracy = 0;
};

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& gold,
                                 std::size_t classes);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

// ---------------------------------------------------------------------------
// Checkpoints: a text archive of named tensors with shape headers and a
// key/value metadata block.

struct Checkpoint {
  ModelParams params;
  Hyperparams hyper;
  std::uint64_t vocab_hash = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace emopanel::bigru
