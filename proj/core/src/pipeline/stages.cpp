#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emopanel/attribution.hpp"
#include "emopanel/pipeline.hpp"
#include "emopanel/weaklabel.hpp"

namespace emopanel::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}


// File names inside data_dir.
constexpr const char* kMessages = "messages.jsonl";
constexpr const char* kUsers = "users.jsonl";
constexpr const char* kAnnouncements = "announcements.csv";
constexpr const char* kQuotes = "quotes.csv";
constexpr const char* kFactors = "factors.csv";
constexpr const char* kListing = "listing.csv";
constexpr const char* kMatched = "matched.txt";
constexpr const char* kTrueEmotion = "true_emotion.csv";

class Context {
 public:
  Context(std::string stage, const PipelineConfig& config) : config_(config) { result_.stage = std::move(stage); }

  const PipelineConfig& config() const { return config_; }

  /// Path of a declared input; throws MissingArtifact naming `producer`.
  std::string input(const std::string& path, const std::string& producer) {
    if (!fs::exists(path)) throw MissingArtifact(fs::path(path).filename().string() + " not found; run " + producer + " first");
    inputs_.push_back(path);
    return path;
  }
  std::string data(const char* name) {
    return input((fs::path(config_.data_dir()) / name).string(), config_.paths.data_dir.empty() ? "synth" : "synth (or supply " + std::string(name) + ")");
  }
  std::optional<std::string> optional_data(const char* name) {
    auto p = (fs::path(config_.data_dir()) / name).string();
    if (!fs::exists(p)) return std::nullopt;
    inputs_.push_back(p);
    return p;
  }
  std::string artifact(const std::string& name, const std::string& producer) { return input(config_.out(name), producer); }

  /// Path of a declared output (parent directories created).
  std::string output(const std::string& path) {
    fs::create_directories(fs::path(path).parent_path());
    outputs_.push_back(path);
    return path;
  }
  std::string out(const std::string& name) { return output(config_.out(name)); }
  std::string data_out(const char* name) { return output((fs::path(config_.data_dir()) / name).string()); }

  void log(std::string line) { result_.log.push_back(std::move(line)); }

  StageResult finish() {
    auto rel = [&](const std::string& p) { return fs::path(p).lexically_normal().lexically_relative(fs::path(config_.out_dir).lexically_normal()).generic_string(); };
    ojson m;
    m["stage"] = result_.stage;
    m["version"] = std::string(kVersion);
    m["seed"] = config_.seed;
    m["config_hash"] = hex64(fnv1a64(config_.to_json()));
    ojson ins = ojson::object(), outs = ojson::object();
    for (const auto& p : inputs_) ins[rel(p)] = hex64(fnv1a64(read_file(p)));
    for (const auto& p : outputs_) {
      outs[rel(p)] = hex64(fnv1a64(read_file(p)));
      result_.outputs.push_back(rel(p));
    }
    m["inputs"] = ins;
    m["outputs"] = outs;
    auto path = config_.out("manifests/" + result_.stage + ".json");
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << m.dump(2) << '\n';
    return result_;
  }

 private:
  const PipelineConfig& config_;
  StageResult result_;
  std::vector<std::string> inputs_, outputs_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

text::NormalizationTables load_tables(const PipelineConfig& c) {
  return c.paths.lexicons.empty() ? text::NormalizationTables::defaults() : text::NormalizationTables::load(c.paths.lexicons);
}

// normalized.jsonl: {"message_id": ..., "tokens": [...]}
using TokenMap = std::vector<std::pair<std::string, std::vector<std::string>>>;

void write_normalized(const std::string& path, const TokenMap& docs) {
  auto f = open_out(path);
  for (const auto& [id, toks] : docs) f << json{{"message_id", id}, {"tokens", toks}}.dump() << '\n';
}

TokenMap read_normalized(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  TokenMap docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      docs.emplace_back(j.at("message_id").get<std::string>(), j.at("tokens").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw DataError(path + ": " + e.what(), lineno);
    }
  }
  return docs;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  auto f = open_out(path);
  for (const auto& l : lines) f << l << '\n';
}

std::map<std::string, Emotion> read_true_emotion(const std::string& path) {
  auto t = read_csv(path);
  auto ci = t.column("message_id"), ce = t.column("emotion");
  std::map<std::string, Emotion> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto e = emotion_from_name(t.rows[i][ce]);
    if (!e) throw DataError(path + ": unknown emotion '" + t.rows[i][ce] + "'", i + 2);
    out[t.rows[i][ci]] = *e;
  }
  return out;
}

std::map<std::string, EmotionVector> read_emotions(const std::string& path) {
  auto t = read_csv(path);
  auto ci = t.column("message_id");
  std::array<std::size_t, kNumEmotions> cols{};
  for (int k = 0; k < kNumEmotions; ++k) cols[k] = t.column(emotion_name(kAllEmotions[k]));
  std::map<std::string, EmotionVector> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EmotionVector v{};
    for (int k = 0; k < kNumEmotions; ++k) v[k] = parse_double(t.rows[i][cols[k]], i + 2);
    out[t.rows[i][ci]] = v;
  }
  return out;
}

aggregate::ExretMap read_exret(const std::string& path) {
  auto t = read_csv(path);
  auto ck = t.column("announcement_key");
  auto first = t.column("n_obs") + 1;
  if (t.header.size() < first + 3) throw DataError(path + ": expected three excess-return columns");
  aggregate::ExretMap out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::array<double, 3> e{};
    for (std::size_t w = 0; w < 3; ++w) {
      const auto& cell = t.rows[i][first + w];
      e[w] = cell.empty() ? kNaN : parse_double(cell, i + 2);
    }
    out[t.rows[i][ck]] = e;
  }
  return out;
}

// ---------------------------------------------------------------------------

StageResult stage_synth(Context& ctx) {
  const auto& c = ctx.config();
  auto d = corpus::synth_generate(derive_seed(c.seed, "synth"), c.synth);
  corpus::write_messages(ctx.data_out(kMessages), d.messages);
  corpus::write_users(ctx.data_out(kUsers), d.users);
  corpus::write_announcements(ctx.data_out(kAnnouncements), d.announcements);
  corpus::write_quotes(ctx.data_out(kQuotes), d.quotes);
  corpus::write_factors(ctx.data_out(kFactors), d.factors);
  {
    auto f = open_out(ctx.data_out(kListing));
    f << "ticker,exchange\n";
    for (const auto& [t, e] : d.listing) f << t << ',' << e << '\n';
  }
  write_lines(ctx.data_out(kMatched), {d.matched.begin(), d.matched.end()});
  {
    auto f = open_out(ctx.data_out(kTrueEmotion));
    f << "message_id,emotion\n";
    for (const auto& [id, e] : d.true_emotion) f << id << ',' << emotion_name(e) << '\n';
  }
  ctx.log(std::to_string(d.messages.size()) + " messages, " + std::to_string(d.announcements.size()) + " announcements");
  return ctx.finish();
}

/// Announcement key whose [day0 + pre.a, day0 + evt.b] range holds the message day.
class WindowIndex {
 public:
  WindowIndex(const std::vector<corpus::Announcement>& anns, const aggregate::TradingCalendar& cal,
              const PipelineConfig& c)
      : cal_(cal), close_(c.panel.close_seconds) {
    int lo = std::min(c.panel.pre.a, c.panel.evt.a), hi = std::max(c.panel.pre.b, c.panel.evt.b);
    for (const auto& a : anns) {
      std::size_t i0;
      try {
        i0 = aggregate::resolve_day0_index(a, cal);
      } catch (const DataError&) {
        continue;
      }
      auto d0 = static_cast<std::int64_t>(i0);
      by_firm_[a.firm_id].push_back({d0 + lo, d0 + hi, a.key()});
    }
    for (auto& [f, v] : by_firm_) std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
  }

  std::optional<std::string> key(const corpus::RawMessage& m) const {
    if (m.tickers.empty()) return std::nullopt;
    auto it = by_firm_.find(m.tickers.front());
    if (it == by_firm_.end()) return std::nullopt;
    auto day = aggregate::message_day_index(m.timestamp, cal_, close_);
    if (!day) return std::nullopt;
    auto d = static_cast<std::int64_t>(*day);
    for (const auto& w : it->second)
      if (d >= w.lo && d <= w.hi) return w.key;
    return std::nullopt;
  }

 private:
  struct Range {
    std::int64_t lo, hi;
    std::string key;
  };
  const aggregate::TradingCalendar& cal_;
  int close_;
  std::map<std::string, std::vector<Range>> by_firm_;
};

StageResult stage_normalize(Context& ctx) {
  const auto& c = ctx.config();
  auto corp = corpus::load_corpus(ctx.data(kMessages), ctx.data(kUsers));
  auto listing = corpus::load_listing(ctx.data(kListing));
  auto matched = corpus::load_ticker_set(ctx.data(kMatched));
  auto anns = corpus::load_announcements(ctx.data(kAnnouncements));
  auto cal = aggregate::TradingCalendar::from_factors(corpus::load_factors(ctx.data(kFactors)));
  auto tables = load_tables(c);

  TokenMap docs;
  docs.reserve(corp.messages.size());
  std::map<std::string, std::string> joined;
  for (const auto& m : corp.messages) {
    auto toks = text::normalize(m.text, tables);
    std::string s;
    for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
    joined[m.message_id] = std::move(s);
    docs.emplace_back(m.message_id, std::move(toks));
  }
  write_normalized(ctx.out("normalized.jsonl"), docs);

  WindowIndex windows(anns, cal, c);
  corpus::FilterOptions opt;
  opt.automated_threshold = c.automated_threshold;
  opt.normalized_text = [&](const corpus::RawMessage& m) { return joined.at(m.message_id); };
  opt.window_key = [&](const corpus::RawMessage& m) { return windows.key(m); };
  auto res = corpus::filter_sample(corp.messages, corp.users, listing, matched, c.window_user_min, opt);

  std::vector<std::string> ids;
  for (const auto& m : res.messages) ids.push_back(m.message_id);
  write_lines(ctx.out("sample.txt"), ids);
  {
    auto f = open_out(ctx.out("restrictions.csv"));
    f << "stage,retained\n";
    for (const auto& s : res.stages) f << s.stage << ',' << s.retained << '\n';
  }
  if (!corp.users_missing.empty()) ctx.log(std::to_string(corp.users_missing.size()) + " users referenced but not profiled");
  ctx.log(std::to_string(ids.size()) + " of " + std::to_string(corp.messages.size()) + " messages in the sample");
  return ctx.finish();
}

StageResult stage_label(Context& ctx) {
  const auto& c = ctx.config();
  auto docs_raw = read_normalized(ctx.artifact("normalized.jsonl", "normalize"));
  auto messages = corpus::load_messages(ctx.data(kMessages));
  auto gold_path = ctx.optional_data(kTrueEmotion);
  auto tables = load_tables(c);
  auto dicts = c.paths.dictionaries.empty() ? weaklabel::EmotionDictionaries::defaults()
                                            : weaklabel::EmotionDictionaries::load(c.paths.dictionaries, tables);
  auto info = c.paths.dictionaries.empty() ? weaklabel::InfoDictionaries::defaults()
                                           : weaklabel::InfoDictionaries::load(c.paths.dictionaries, tables);

  std::map<std::string, corpus::AuthorSentiment> tags;
  for (const auto& m : messages) tags[m.message_id] = m.author_sentiment_tag;
  std::vector<weaklabel::PolarityExample> polar;
  std::vector<weaklabel::Document> docs;
  docs.reserve(docs_raw.size());
  for (auto& [id, toks] : docs_raw) {
    auto t = tags.find(id);
    if (t != tags.end() && t->second != corpus::AuthorSentiment::unclassified)
      polar.emplace_back(toks, t->second == corpus::AuthorSentiment::bullish ? weaklabel::Polarity::positive
                                                                              : weaklabel::Polarity::negative);
    docs.push_back({id, std::move(toks)});
  }
  auto nb = weaklabel::nb_train(polar, c.nb_smoothing, tables.emoji_tokens());
  nb.save(ctx.out("nb_model.txt"));

  std::map<std::string, Emotion> gold;
  if (gold_path) gold = read_true_emotion(*gold_path);
  auto ts = weaklabel::build_training_set(docs, dicts, nb, gold_path ? &gold : nullptr);

  std::map<std::string, Emotion> labeled;
  for (const auto& ex : ts.examples) labeled[ex.id] = ex.label;
  std::vector<weaklabel::LabelRow> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) {
    weaklabel::LabelRow r;
    r.message_id = d.id;
    if (auto it = labeled.find(d.id); it != labeled.end()) r.emotion = it->second;
    r.chat_type = weaklabel::label_chat_type(d.tokens, info);
    r.sentiment = weaklabel::sentiment_classify(nb, d.tokens);
    rows.push_back(std::move(r));
  }
  weaklabel::write_labels(ctx.out("labels.jsonl"), rows);

  {
    auto f = open_out(ctx.out("label_report.csv"));
    f << "class,count,correct,incorrect,accuracy\n";
    std::size_t correct = 0, incorrect = 0;
    for (auto e : kAllEmotions) {
      f << emotion_name(e) << ',' << ts.report.counts[static_cast<int>(e)];
      if (auto it = ts.report.accuracy.find(e); it != ts.report.accuracy.end()) {
        correct += it->second.correct;
        incorrect += it->second.incorrect;
        f << ',' << it->second.correct << ',' << it->second.incorrect << ',' << format_double(it->second.accuracy());
      } else {
        f << ",,,";
      }
      f << '\n';
    }
    f << "abstain," << ts.report.n_documents - ts.report.n_labeled << ",,,\n";
    f << "all," << ts.report.n_labeled;
    if (gold_path)
      f << ',' << correct << ',' << incorrect << ',' << format_double(weaklabel::labeling_accuracy(correct, incorrect));
    else
      f << ",,,";
    f << '\n';
  }
  ctx.log("coverage " + short_number(ts.report.coverage()) + " over " + std::to_string(ts.report.n_documents) +
          " messages");
  return ctx.finish();
}

bigru::Hyperparams stage_hyper(const PipelineConfig& c) {
  auto hp = c.model;
  hp.seed = derive_seed(c.seed, "train");
  return hp;
}

StageResult stage_train(Context& ctx) {
  const auto& c = ctx.config();
  auto docs = read_normalized(ctx.artifact("normalized.jsonl", "normalize"));
  auto labels = weaklabel::load_labels(ctx.artifact("labels.jsonl", "label"));
  std::map<std::string, Emotion> lab;
  for (const auto& r : labels)
    if (r.emotion) lab[r.message_id] = *r.emotion;

  std::vector<std::vector<std::string>> corpus_toks;
  std::vector<std::size_t> targets;
  for (const auto& [id, toks] : docs)
    if (auto it = lab.find(id); it != lab.end()) {
      corpus_toks.push_back(toks);
      targets.push_back(static_cast<std::size_t>(it->second));
    }
  if (corpus_toks.empty()) throw DataError("no labeled messages to train on");

  auto vocab = text::build_vocab(corpus_toks, c.vocab_cap);
  vocab.save(ctx.out("vocab.txt"));
  auto hp = stage_hyper(c);
  std::vector<bigru::Example> data;
  data.reserve(corpus_toks.size());
  for (std::size_t i = 0; i < corpus_toks.size(); ++i) data.push_back({text::encode(corpus_toks[i], vocab, hp.T), targets[i]});

  if (c.cv_folds >= 2) {
    auto cv = bigru::kfold_cv(data, vocab.size(), c.cv_folds, hp);
    auto f = open_out(ctx.out("cv.csv"));
    f << "fold,train_loss,train_acc,held_loss,held_acc,selected\n";
    for (std::size_t k = 0; k < cv.folds.size(); ++k)
      f << k << ',' << format_double(cv.folds[k].train.loss) << ',' << format_double(cv.folds[k].train.accuracy) << ','
        << format_double(cv.folds[k].held.loss) << ',' << format_double(cv.folds[k].held.accuracy) << ','
        << (k == cv.selected ? 1 : 0) << '\n';
  }

  auto res = bigru::train(data, vocab.size(), hp);
  bigru::save_checkpoint(ctx.out("model.ckpt"), {res.params, hp, vocab.hash()});
  bigru::write_history_csv(ctx.out("history.csv"), res.history);

  std::vector<std::size_t> preds;
  preds.reserve(data.size());
  for (const auto& ex : data) {
    auto p = bigru::predict(ex.seq, res.params);
    Eigen::Index k;
    p.maxCoeff(&k);
    preds.push_back(static_cast<std::size_t>(k));
  }
  auto cm = bigru::confusion_matrix(preds, targets, hp.classes);
  {
    auto f = open_out(ctx.out("confusion.csv"));
    f << "label,predicted,count,share\n";
    for (int g = 0; g < kNumEmotions; ++g)
      for (int p = 0; p < kNumEmotions; ++p)
        f << emotion_name(kAllEmotions[g]) << ',' << emotion_name(kAllEmotions[p]) << ','
          << static_cast<long long>(cm.counts(g, p)) << ',' << format_double(cm.normalized(g, p)) << '\n';
  }
  ctx.log(std::to_string(data.size()) + " examples, vocab " + std::to_string(vocab.size()) + ", best epoch " +
          std::to_string(res.best_epoch) + ", in-sample accuracy " + short_number(cm.accuracy));
  return ctx.finish();
}

struct LoadedModel {
  text::Vocabulary vocab;
  bigru::Checkpoint ckpt;
};

LoadedModel load_model(Context& ctx) {
  LoadedModel m{text::Vocabulary::load(ctx.artifact("vocab.txt", "train")),
                bigru::load_checkpoint(ctx.artifact("model.ckpt", "train"))};
  if (m.vocab.hash() != m.ckpt.vocab_hash) throw DataError("vocab.txt does not match model.ckpt; rerun train");
  return m;
}

/// Sample messages in sample order with their tokens.
TokenMap sample_docs(Context& ctx) {
  auto docs = read_normalized(ctx.artifact("normalized.jsonl", "normalize"));
  auto ids = read_lines(ctx.artifact("sample.txt", "normalize"));
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < docs.size(); ++i) pos[docs[i].first] = i;
  TokenMap out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = pos.find(id);
    if (it == pos.end()) throw DataError("sample message " + id + " missing from normalized.jsonl; rerun normalize");
    out.push_back(std::move(docs[it->second]));
  }
  return out;
}

StageResult stage_infer(Context& ctx) {
  auto model = load_model(ctx);
  auto docs = sample_docs(ctx);
  auto f = open_out(ctx.out("emotions.csv"));
  f << "message_id";
  for (auto e : kAllEmotions) f << ',' << emotion_name(e);
  f << '\n';
  for (const auto& [id, toks] : docs) {
    auto p = bigru::predict(text::encode(toks, model.vocab, model.ckpt.hyper.T), model.ckpt.params);
    f << id;
    for (Eigen::Index k = 0; k < p.size(); ++k) f << ',' << format_double(p(k));
    f << '\n';
  }
  f.close();
  ctx.log(std::to_string(docs.size()) + " messages classified");
  return ctx.finish();
}

StageResult stage_attribute(Context& ctx) {
  const auto& c = ctx.config();
  auto model = load_model(ctx);
  auto docs = sample_docs(ctx);
  std::vector<attribution::Attribution> attrs;
  for (const auto& [id, toks] : docs) {
    if (attrs.size() >= c.attribute.n_messages) break;
    auto seq = text::encode(toks, model.vocab, model.ckpt.hyper.T);
    if (seq.true_length == 0) continue;
    auto p = bigru::predict(seq, model.ckpt.params);
    Eigen::Index k;
    p.maxCoeff(&k);
    auto cls = static_cast<std::size_t>(k);
    auto a = attribution::shapley(attribution::model_value(model.ckpt.params, cls), seq, c.attribute.n_samples,
                                  derive_seed(c.seed, "attribute|" + id), cls);
    a.message_id = id;
    attrs.push_back(std::move(a));
  }
  attribution::write_attribution_csv(ctx.out("attribution.csv"), attrs, model.vocab);

  std::vector<std::pair<std::string, std::vector<attribution::WordImportance>>> tables;
  for (std::size_t cls = 0; cls < static_cast<std::size_t>(kNumEmotions); ++cls) {
    std::vector<attribution::Attribution> group;
    for (const auto& a : attrs)
      if (a.cls == cls) group.push_back(a);
    if (group.empty()) continue;
    tables.emplace_back(std::string(emotion_name(kAllEmotions[cls])),
                        attribution::global_importance(group, model.vocab, c.attribute.min_count));
  }
  attribution::write_global_importance_csv(ctx.out("global_importance.csv"), tables);
  ctx.log(std::to_string(attrs.size()) + " messages attributed");
  return ctx.finish();
}

StageResult stage_eventstudy(Context& ctx) {
  const auto& c = ctx.config();
  auto anns = corpus::load_announcements(ctx.data(kAnnouncements));
  auto quotes = corpus::load_quotes(ctx.data(kQuotes));
  auto factors = corpus::load_factors(ctx.data(kFactors));
  auto cal = aggregate::TradingCalendar::from_factors(factors);
  auto rows = econ::event_study(anns, quotes, econ::index_factors(factors), cal, c.event_study);
  econ::write_event_study_csv(ctx.out("eventstudy.csv"), rows, c.event_study);
  auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.fit; });
  ctx.log(std::to_string(rows.size()) + " announcements, " + std::to_string(failed) + " without a factor fit");
  return ctx.finish();
}

StageResult stage_aggregate(Context& ctx) {
  const auto& c = ctx.config();
  auto messages = corpus::load_messages(ctx.data(kMessages));
  auto users = corpus::load_users(ctx.data(kUsers));
  auto anns = corpus::load_announcements(ctx.data(kAnnouncements));
  auto quotes = corpus::load_quotes(ctx.data(kQuotes));
  auto cal = aggregate::TradingCalendar::from_factors(corpus::load_factors(ctx.data(kFactors)));
  auto sample = read_lines(ctx.artifact("sample.txt", "normalize"));
  auto emotions = read_emotions(ctx.artifact("emotions.csv", "infer"));
  auto labels = weaklabel::load_labels(ctx.artifact("labels.jsonl", "label"));
  auto exret = read_exret(ctx.artifact("eventstudy.csv", "eventstudy"));

  std::map<std::string, const corpus::RawMessage*> by_id;
  for (const auto& m : messages) by_id[m.message_id] = &m;
  std::map<std::string, const corpus::UserProfile*> user_by_id;
  for (const auto& u : users) user_by_id[u.user_id] = &u;
  std::map<std::string, const weaklabel::LabelRow*> label_by_id;
  for (const auto& l : labels) label_by_id[l.message_id] = &l;

  std::vector<aggregate::MessageObs> obs;
  obs.reserve(sample.size());
  for (const auto& id : sample) {
    auto m = by_id.find(id);
    if (m == by_id.end()) throw DataError("sample message " + id + " missing from " + std::string(kMessages));
    auto e = emotions.find(id);
    if (e == emotions.end()) throw DataError("no emotion vector for " + id + "; rerun infer");
    auto l = label_by_id.find(id);
    if (l == label_by_id.end()) throw DataError("no label row for " + id + "; rerun label");
    auto day = aggregate::message_day_index(m->second->timestamp, cal, c.panel.close_seconds);
    if (!day) continue;
    aggregate::MessageObs o;
    o.message_id = id;
    o.firm_id = m->second->tickers.front();
    o.day_index = *day;
    o.likes = m->second->like_count;
    if (auto u = user_by_id.find(m->second->user_id); u != user_by_id.end())
      o.user = *u->second;
    else
      o.user.user_id = m->second->user_id;
    o.emotion = e->second;
    o.sentiment = l->second->sentiment;
    o.chat_type = l->second->chat_type;
    o.channel = corpus::classify_information_channel(*m->second);
    obs.push_back(std::move(o));
  }

  aggregate::PanelInputs in{&anns, &cal, &obs, &quotes, &exret};
  auto main = aggregate::assemble_panel(in, c.panel);
  aggregate::write_panel_csv(ctx.out("panel.csv"), main.rows);

  auto counts = open_out(ctx.out("panel_counts.csv"));
  counts << "variant,rows,dropped_min_users,dropped_outside_calendar\n";
  auto count_row = [&](const std::string& name, const aggregate::PanelResult& r) {
    counts << name << ',' << r.rows.size() << ',' << r.dropped_min_users << ',' << r.dropped_outside_calendar << '\n';
  };
  count_row("main", main);
  if (c.panel_variants) {
    for (const auto& v : aggregate::standard_variants()) {
      auto cfg = c.panel;
      cfg.filter = v.filter;
      cfg.scheme = v.scheme;
      auto r = aggregate::assemble_panel(in, cfg);
      aggregate::write_panel_csv(ctx.out("panel_" + v.name + ".csv"), r.rows);
      count_row(v.name, r);
    }
  }
  counts.close();

  // Message volume around day 0.
  constexpr int kSpan = 20;
  std::map<std::string, std::vector<std::int64_t>> day0s;
  for (const auto& a : anns) {
    try {
      day0s[a.firm_id].push_back(static_cast<std::int64_t>(aggregate::resolve_day0_index(a, cal)));
    } catch (const DataError&) {
    }
  }
  std::vector<std::size_t> volume(2 * kSpan + 1, 0);
  for (const auto& o : obs) {
    auto it = day0s.find(o.firm_id);
    if (it == day0s.end()) continue;
    for (auto d0 : it->second) {
      auto off = static_cast<std::int64_t>(o.day_index) - d0;
      if (off >= -kSpan && off <= kSpan) ++volume[static_cast<std::size_t>(off + kSpan)];
    }
  }
  {
    auto f = open_out(ctx.out("message_counts.csv"));
    f << "offset,n_messages\n";
    for (int k = -kSpan; k <= kSpan; ++k) f << k << ',' << volume[static_cast<std::size_t>(k + kSpan)] << '\n';
  }
  ctx.log(std::to_string(main.rows.size()) + " panel rows, " + std::to_string(main.dropped_min_users) +
          " below the user minimum");
  return ctx.finish();
}

double sample_sd(const std::vector<double>& x) {
  double n = 0, mean = 0, m2 = 0;
  for (double v : x) {
    if (is_missing(v)) continue;
    n += 1;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  return n > 1 ? std::sqrt(m2 / (n - 1)) : kNaN;
}

std::vector<double> regressor_values(const econ::Frame& frame, const std::string& name) {
  auto colon = name.find(':');
  if (colon == std::string::npos) return frame.column(name);
  const auto& a = frame.column(name.substr(0, colon));
  const auto& b = frame.column(name.substr(colon + 1));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void write_effects(std::ostream& out, const econ::FitResult& fit, const econ::Frame& frame) {
  for (const auto& co : fit.coefs) {
    if (co.name == "const" || co.name.find('=') != std::string::npos) continue;
    double sd = sample_sd(regressor_values(frame, co.name));
    out << fit.spec << ',' << co.name << ',' << format_double(co.coef) << ',' << format_double(sd);
    if (!(sd > 0)) {
      out << ",,,\n";
      continue;
    }
    double eff = econ::standardized_effect(co.coef, sd);
    out << ',' << format_double(eff) << ',';
    if (fit.within_sd_dep > 0) out << format_double(econ::standardized_effect(co.coef, sd, fit.within_sd_dep));
    out << ',';
    if (fit.spec.rfind("announcement", 0) == 0 && eff > -100) out << format_double(econ::annualize_three_day(eff));
    out << '\n';
  }
}

StageResult stage_regress(Context& ctx) {
  const auto& c = ctx.config();
  auto panel = aggregate::read_panel_csv(ctx.artifact("panel.csv", "aggregate"));
  auto frame = econ::frame_from_panel(panel);
  std::vector<econ::FitResult> fits;
  std::vector<econ::Frame> frames;
  auto run = [&](const econ::Frame& f, econ::RegressionSpec spec) {
    try {
      spec.validate(f);
      fits.push_back(econ::fe_regress(f, spec));
      frames.push_back(f);
    } catch (const Error& e) {
      ctx.log("spec " + spec.name + " skipped: " + e.what());
    }
  };
  for (const auto& s : c.specs) run(frame, s);
  if (fits.empty()) throw DataError("no regression could be estimated on panel.csv");

  auto base = std::find_if(c.specs.begin(), c.specs.end(), [](const auto& s) { return s.name == "announcement"; });
  if (c.panel_variants && base != c.specs.end()) {
    for (const auto& v : aggregate::standard_variants()) {
      auto path = c.out("panel_" + v.name + ".csv");
      if (!fs::exists(path)) continue;
      auto vp = aggregate::read_panel_csv(ctx.input(path, "aggregate"));
      if (vp.empty()) {
        ctx.log("variant " + v.name + " has no rows");
        continue;
      }
      auto spec = *base;
      spec.name += "@" + v.name;
      run(econ::frame_from_panel(vp), spec);
    }
  }
  econ::write_regression_table(ctx.out("regression_table.csv"), fits);
  auto f = open_out(ctx.out("effects.csv"));
  f << "spec,regressor,coef,sd_regressor,effect_percent,effect_in_dep_sd,annualized\n";
  for (std::size_t i = 0; i < fits.size(); ++i) write_effects(f, fits[i], frames[i]);
  f.close();
  ctx.log(std::to_string(fits.size()) + " regressions estimated");
  return ctx.finish();
}

StageResult stage_portfolio(Context& ctx) {
  const auto& c = ctx.config();
  auto panel = aggregate::read_panel_csv(ctx.artifact("panel.csv", "aggregate"));
  auto quotes = corpus::load_quotes(ctx.data(kQuotes));
  auto factors = corpus::load_factors(ctx.data(kFactors));
  auto cal = aggregate::TradingCalendar::from_factors(factors);
  auto res = econ::portfolio_backtest(panel, quotes, cal, c.portfolio);
  econ::write_portfolio_csv(ctx.out("portfolio_returns.csv"), res);
  std::vector<econ::FitResult> alpha;
  try {
    alpha.push_back(econ::alpha_regression(res.dates, res.daily, econ::index_factors(factors)));
  } catch (const Error& e) {
    ctx.log(std::string("alpha regression skipped: ") + e.what());
  }
  econ::write_regression_table(ctx.out("portfolio_alpha.csv"), alpha);
  ctx.log(std::to_string(res.n_long) + " long and " + std::to_string(res.n_short) + " short positions");
  return ctx.finish();
}

StageResult stage_toymodel(Context& ctx) {
  const auto& t = ctx.config().toy;
  auto rows = toy::sweep_eta(t.params, t.signals, toy::eta_grid(t.eta_min, t.eta_max, t.eta_points));
  toy::write_sweep_csv(ctx.out("toymodel_sweep.csv"), rows);
  ctx.log(std::to_string(rows.size()) + " grid points");
  return ctx.finish();
}

using StageFn = StageResult (*)(Context&);

const std::vector<std::pair<std::string, StageFn>>& stage_table() {
  static const std::vector<std::pair<std::string, StageFn>> kStages{
      {"synth", stage_synth},         {"normalize", stage_normalize}, {"label", stage_label},
      {"train", stage_train},         {"infer", stage_infer},         {"attribute", stage_attribute},
      {"eventstudy", stage_eventstudy}, {"aggregate", stage_aggregate}, {"regress", stage_regress},
      {"portfolio", stage_portfolio}, {"toymodel", stage_toymodel}};
  return kStages;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : stage_table()) v.push_back(n);
    return v;
  }();
  return kNames;
}

std::vector<StageResult> run_stage(const std::string& name, const PipelineConfig& config) {
  config.validate();
  std::vector<StageResult> out;
  auto run_one = [&](const std::string& n, StageFn fn) {
    Context ctx(n, config);
    out.push_back(fn(ctx));
  };
  if (name == "all") {
    for (const auto& [n, fn] : stage_table()) {
      if (n == "synth" && !config.paths.data_dir.empty()) continue;
      run_one(n, fn);
    }
    return out;
  }
  for (const auto& [n, fn] : stage_table())
    if (n == name) {
      run_one(n, fn);
      return out;
    }
  throw InvalidArgument("unknown stage '" + name + "'");
}

}  // namespace emopanel::pipeline
