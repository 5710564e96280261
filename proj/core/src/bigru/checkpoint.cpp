#include <fstream>
#include <map>
#include <sstream>

#include "emopanel/bigru.hpp"

namespace emopanel::bigru {

namespace {

constexpr const char* kMagic = "emopanel-bigru 1";

std::map<std::string, std::string> hyper_fields(const Hyperparams& h) {
  return {
      {"T", std::to_string(h.T)},
      {"embed_dim", std::to_string(h.embed_dim)},
      {"hidden", std::to_string(h.hidden)},
      {"linear_dim", std::to_string(h.linear_dim)},
      {"dense1", std::to_string(h.dense1)},
      {"dense2", std::to_string(h.dense2)},
      {"classes", std::to_string(h.classes)},
      {"batch", std::to_string(h.batch)},
      {"lr", format_double(h.lr)},
      {"momentum", format_double(h.momentum)},
      {"embed_dropout", format_double(h.embed_dropout)},
      {"early_stop_patience", std::to_string(h.early_stop_patience)},
      {"max_epochs", std::to_string(h.max_epochs)},
      {"validation_fraction", format_double(h.validation_fraction)},
      {"threads", std::to_string(h.threads)},
      {"seed", std::to_string(h.seed)},
  };
}

std::size_t as_size(const std::map<std::string, std::string>& m, const std::string& key, std::size_t line) {
  auto it = m.find(key);
  if (it == m.end()) throw DataError("checkpoint: missing meta '" + key + "'", line);
  auto v = parse_int(it->second, line);
  if (v < 0) throw DataError("checkpoint: negative meta '" + key + "'", line);
  return static_cast<std::size_t>(v);
}

double as_double(const std::map<std::string, std::string>& m, const std::string& key, std::size_t line) {
  auto it = m.find(key);
  if (it == m.end()) throw DataError("checkpoint: missing meta '" + key + "'", line);
  return parse_double(it->second, line);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  ckpt.params.check_shapes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << kMagic << '\n';
  for (const auto& [k, v] : hyper_fields(ckpt.hyper)) out << "meta " << k << ' ' << v << '\n';
  out << "meta vocab_hash " << hex64(ckpt.vocab_hash) << '\n';
  for (const auto& [name, m] : ckpt.params.tensors()) {
    out << "tensor " << name << ' ' << m->rows() << ' ' << m->cols() << '\n';
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) out << (c ? " " : "") << format_double((*m)(r, c));
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw DataError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kMagic) throw DataError(path + ": not a bigru checkpoint", lineno);

  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> tensors;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string k, v;
      if (!(ls >> k >> v)) throw DataError(path + ": malformed meta line", lineno);
      meta[k] = v;
    } else if (kind == "tensor") {
      std::string name;
      long rows = -1, cols = -1;
      if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0)
        throw DataError(path + ": malformed tensor header", lineno);
      Matrix m(rows, cols);
      for (long r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw DataError(path + ": truncated tensor " + name, lineno);
        ++lineno;
        auto cells = split(line, ' ');
        if (static_cast<long>(cells.size()) != cols && !(cols == 0 && cells.size() == 1 && cells[0].empty()))
          throw DataError(path + ": wrong column count in " + name, lineno);
        for (long c = 0; c < cols; ++c) m(r, c) = parse_double(cells[static_cast<std::size_t>(c)], lineno);
      }
      tensors[name] = std::move(m);
    } else if (kind == "end") {
      ended = true;
      break;
    } else if (!kind.empty()) {
      throw DataError(path + ": unexpected record '" + kind + "'", lineno);
    }
  }
  if (!ended) throw DataError(path + ": missing end marker", lineno);

  Checkpoint ck;
  Hyperparams& h = ck.hyper;
  h.T = as_size(meta, "T", lineno);
  h.embed_dim = as_size(meta, "embed_dim", lineno);
  h.hidden = as_size(meta, "hidden", lineno);
  h.linear_dim = as_size(meta, "linear_dim", lineno);
  h.dense1 = as_size(meta, "dense1", lineno);
  h.dense2 = as_size(meta, "dense2", lineno);
  h.classes = as_size(meta, "classes", lineno);
  h.batch = as_size(meta, "batch", lineno);
  h.lr = as_double(meta, "lr", lineno);
  h.momentum = as_double(meta, "momentum", lineno);
  h.embed_dropout = as_double(meta, "embed_dropout", lineno);
  h.early_stop_patience = as_size(meta, "early_stop_patience", lineno);
  h.max_epochs = as_size(meta, "max_epochs", lineno);
  h.validation_fraction = as_double(meta, "validation_fraction", lineno);
  h.threads = as_size(meta, "threads", lineno);
  auto vh = meta.find("vocab_hash");
  if (vh == meta.end()) throw DataError(path + ": missing meta 'vocab_hash'", lineno);
  try {
    h.seed = std::stoull(meta.count("seed") ? meta["seed"] : "0");
    ck.vocab_hash = std::stoull(vh->second, nullptr, 16);
  } catch (const std::exception&) {
    throw DataError(path + ": bad seed or vocab_hash", lineno);
  }

  for (auto& [name, m] : ck.params.tensors()) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError(path + ": missing tensor " + name, lineno);
    *m = std::move(it->second);
    tensors.erase(it);
  }
  if (!tensors.empty()) throw DataError(path + ": unknown tensor " + tensors.begin()->first, lineno);
  try {
    ck.params.check_shapes();
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what(), lineno);
  }
  if (ck.params.embed_dim() != h.embed_dim || ck.params.hidden() != h.hidden || ck.params.classes() != h.classes)
    throw DataError(path + ": tensor shapes disagree with metadata", lineno);
  return ck;
}

}  // namespace emopanel::bigru
