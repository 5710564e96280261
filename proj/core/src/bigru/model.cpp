#include <cmath>

#include "emopanel/bigru.hpp"

namespace emopanel::bigru {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

Vector sigmoid(const Vector& a) { return a.unaryExpr([](double v) { return sigmoid(v); }); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

void fill_uniform(Matrix& m, double limit, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-limit, limit);
}

GruWeights gru_zeros(std::size_t d, std::size_t h) {
  auto D = static_cast<Eigen::Index>(d), H = static_cast<Eigen::Index>(h);
  GruWeights w;
  w.Wxz = w.Wxr = w.Wxh = Matrix::Zero(D, H);
  w.Whz = w.Whr = w.Whh = Matrix::Zero(H, H);
  w.bz = w.br = w.bh = Matrix::Zero(H, 1);
  return w;
}

void add_gru(std::vector<std::pair<std::string, Matrix*>>& out, const std::string& p, GruWeights& w) {
  out.insert(out.end(), {{p + ".Wxz", &w.Wxz}, {p + ".Wxr", &w.Wxr}, {p + ".Wxh", &w.Wxh},
                         {p + ".Whz", &w.Whz}, {p + ".Whr", &w.Whr}, {p + ".Whh", &w.Whh},
                         {p + ".bz", &w.bz},   {p + ".br", &w.br},   {p + ".bh", &w.bh}});
}

}  // namespace

Hyperparams Hyperparams::full_scale() { return Hyperparams{}; }

Hyperparams Hyperparams::desk_scale() {
  Hyperparams hp;
  hp.embed_dim = 16;
  hp.hidden = 16;
  hp.linear_dim = 32;
  hp.dense1 = 32;
  hp.dense2 = 16;
  hp.batch = 32;
  hp.lr = 0.05;
  hp.momentum = 0.9;
  hp.embed_dropout = 0.1;
  hp.early_stop_patience = 2;
  hp.max_epochs = 15;
  return hp;
}

void Hyperparams::validate() const {
  require(T > 0 && embed_dim > 0 && hidden > 0 && dense1 > 0 && dense2 > 0 && batch > 0 && max_epochs > 0,
          "hyperparameters: sizes must be positive");
  require(classes == 3 || classes == 7, "hyperparameters: classes must be 3 or 7");
  require(lr >= 0, "hyperparameters: lr must be >= 0");
  require(momentum >= 0 && momentum < 1, "hyperparameters: momentum must be in [0, 1)");
  require(embed_dropout >= 0 && embed_dropout < 1, "hyperparameters: embed_dropout must be in [0, 1)");
  require(validation_fraction >= 0 && validation_fraction < 1, "hyperparameters: validation_fraction in [0, 1)");
  require(threads >= 1, "hyperparameters: threads must be >= 1");
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out{{"E", &E}};
  add_gru(out, "fwd", fwd);
  add_gru(out, "bwd", bwd);
  out.insert(out.end(), {{"Whq", &Whq}, {"bq", &bq}, {"Wo", &Wo}, {"bo", &bo},
                         {"Wd", &Wd},   {"bd", &bd}, {"Wy", &Wy}, {"by", &by}});
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

ModelParams ModelParams::zeros(std::size_t vocab, const Hyperparams& hp) {
  auto I = [](std::size_t n) { return static_cast<Eigen::Index>(n); };
  const std::size_t h = hp.hidden, q = hp.q();
  ModelParams p;
  p.E = Matrix::Zero(I(vocab), I(hp.embed_dim));
  p.fwd = gru_zeros(hp.embed_dim, h);
  p.bwd = gru_zeros(hp.embed_dim, h);
  p.Whq = Matrix::Zero(I(2 * h), I(q));
  p.bq = Matrix::Zero(I(q), 1);
  p.Wo = Matrix::Zero(I(q), I(hp.dense1));
  p.bo = Matrix::Zero(I(hp.dense1), 1);
  p.Wd = Matrix::Zero(I(hp.dense1), I(hp.dense2));
  p.bd = Matrix::Zero(I(hp.dense2), 1);
  p.Wy = Matrix::Zero(I(hp.dense2), I(hp.classes));
  p.by = Matrix::Zero(I(hp.classes), 1);
  return p;
}

ModelParams ModelParams::init(std::size_t vocab, const Hyperparams& hp, std::uint64_t seed) {
  hp.validate();
  ModelParams p = zeros(vocab, hp);
  Rng rng(seed);
  for (auto& [name, m] : p.tensors()) {
    if (name == "E") {
      fill_uniform(*m, 0.05, rng);
    } else if (name.find('W') != std::string::npos) {
      fill_uniform(*m, std::sqrt(3.0 / static_cast<double>(m->rows())), rng);
    }
  }
  return p;
}

void ModelParams::check_shapes() const {
  const auto d = E.cols(), h = fwd.Whz.rows();
  for (const GruWeights* g : {&fwd, &bwd}) {
    require(g->Wxz.rows() == d && g->Wxr.rows() == d && g->Wxh.rows() == d, "GRU input weights must have d rows");
    require(g->Wxz.cols() == h && g->Wxr.cols() == h && g->Wxh.cols() == h, "GRU input weights must have h columns");
    require(g->Whz.rows() == h && g->Whz.cols() == h && g->Whr.rows() == h && g->Whr.cols() == h &&
                g->Whh.rows() == h && g->Whh.cols() == h,
            "GRU recurrent weights must be h x h");
    require(g->bz.rows() == h && g->br.rows() == h && g->bh.rows() == h, "GRU biases must have h rows");
  }
  require(Whq.rows() == 2 * h && bq.rows() == Whq.cols(), "linear layer shape mismatch");
  require(Wo.rows() == Whq.cols() && bo.rows() == Wo.cols(), "first dense layer shape mismatch");
  require(Wd.rows() == Wo.cols() && bd.rows() == Wd.cols(), "second dense layer shape mismatch");
  require(Wy.rows() == Wd.cols() && by.rows() == Wy.cols(), "output layer shape mismatch");
}

bool ModelParams::all_finite() const {
  for (const auto& [name, m] : tensors())
    if (!m->allFinite()) return false;
  return true;
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  auto src = p.tensors();
  auto dst = g.dense.tensors();
  for (std::size_t i = 1; i < src.size(); ++i) *dst[i].second = Matrix::Zero(src[i].second->rows(), src[i].second->cols());
  return g;
}

void Gradients::add(const Gradients& other) {
  auto a = dense.tensors();
  auto b = other.dense.tensors();
  for (std::size_t i = 1; i < a.size(); ++i) *a[i].second += *b[i].second;
  for (const auto& [id, v] : other.embed) {
    auto it = embed.find(id);
    if (it == embed.end())
      embed.emplace(id, v);
    else
      it->second += v;
  }
}

void Gradients::scale(double s) {
  for (auto& [name, m] : dense.tensors())
    if (m->size() > 0) *m *= s;
  for (auto& [id, v] : embed) v *= s;
}

Matrix Gradients::embed_dense(std::size_t vocab, std::size_t d) const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(d));
  for (const auto& [id, v] : embed) out.row(id) = v.transpose();
  return out;
}

Vector gru_cell(const Vector& x, const Vector& h_prev, const GruWeights& w) {
  require(x.size() == w.Wxz.rows(), "gru_cell: input width does not match W_x rows");
  require(h_prev.size() == w.Whz.rows() && w.Whz.cols() == w.Whz.rows(), "gru_cell: state width mismatch");
  Vector z = sigmoid(w.Wxz.transpose() * x + w.Whz.transpose() * h_prev + w.bz.col(0));
  Vector r = sigmoid(w.Wxr.transpose() * x + w.Whr.transpose() * h_prev + w.br.col(0));
  Vector n = (w.Wxh.transpose() * x + w.Whh.transpose() * r.cwiseProduct(h_prev) + w.bh.col(0)).array().tanh();
  return z.cwiseProduct(h_prev) + (Vector::Ones(z.size()) - z).cwiseProduct(n);
}

namespace {

Vector run_direction(const std::vector<text::TokenId>& ids, const ModelParams& p, const GruWeights& w,
                     const Matrix* mask, bool reverse, std::vector<StepCache>* steps) {
  const auto h = w.Whz.rows();
  Vector state = Vector::Zero(h);
  const std::size_t T = ids.size();
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t t = reverse ? T - 1 - k : k;
    if (ids[t] == text::kPad) continue;
    Vector x = p.E.row(ids[t]).transpose();
    if (mask) x = x.cwiseProduct(mask->row(static_cast<Eigen::Index>(t)).transpose());
    if (steps) {
      StepCache s;
      s.t = t;
      s.x = x;
      s.h_prev = state;
      s.z = sigmoid(w.Wxz.transpose() * x + w.Whz.transpose() * state + w.bz.col(0));
      s.r = sigmoid(w.Wxr.transpose() * x + w.Whr.transpose() * state + w.br.col(0));
      s.n = (w.Wxh.transpose() * x + w.Whh.transpose() * s.r.cwiseProduct(state) + w.bh.col(0)).array().tanh();
      s.h = s.z.cwiseProduct(state) + (Vector::Ones(h) - s.z).cwiseProduct(s.n);
      state = s.h;
      steps->push_back(std::move(s));
    } else {
      state = gru_cell(x, state, w);
    }
  }
  return state;
}

}  // namespace

Vector forward(const text::TokenSequence& seq, const ModelParams& p, ForwardCache* cache, const Matrix* mask) {
  const auto vocab = static_cast<text::TokenId>(p.E.rows());
  for (auto id : seq.ids)
    if (id < 0 || id >= vocab) throw InvalidArgument("forward: token id out of vocabulary range");
  if (mask && (mask->rows() != static_cast<Eigen::Index>(seq.ids.size()) || mask->cols() != p.E.cols()))
    throw InvalidArgument("forward: dropout mask must be T x d");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.ids = seq.ids;
  if (mask) c.mask = *mask;

  const auto h = p.fwd.Whz.rows();
  Vector hf = run_direction(seq.ids, p, p.fwd, mask, false, cache ? &c.fwd : nullptr);
  Vector hb = run_direction(seq.ids, p, p.bwd, mask, true, cache ? &c.bwd : nullptr);
  c.H.resize(2 * h);
  c.H << hf, hb;
  c.O = p.Whq.transpose() * c.H + p.bq.col(0);
  c.Dpre = p.Wo.transpose() * c.O + p.bo.col(0);
  c.D = c.Dpre.cwiseMax(0.0);
  c.D2pre = p.Wd.transpose() * c.D + p.bd.col(0);
  c.D2 = c.D2pre.cwiseMax(0.0);
  Vector logits = p.Wy.transpose() * c.D2 + p.by.col(0);
  double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp();
  c.probs = e / e.sum();
  return c.probs;
}

double loss(const Vector& probs, std::size_t target, bool* clamped) {
  if (target >= static_cast<std::size_t>(probs.size())) throw InvalidArgument("loss: target out of range");
  double p = probs(static_cast<Eigen::Index>(target));
  bool clamp = !(p >= 1e-12);
  if (clamped) *clamped = clamp;
  return -std::log(clamp ? 1e-12 : p);
}

Matrix dropout_mask(std::size_t T, std::size_t d, double rate, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(d));
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

}  // namespace emopanel::bigru
