#include <filesystem>
#include <set>

#include <json.hpp>

#include "emopanel/pipeline.hpp"

namespace emopanel::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

/// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw DataError(where_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& dst) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const json::exception& e) {
      throw DataError(where_ + "." + key + ": " + e.what());
    }
  }

  void read_window(const char* key, aggregate::Window& w) {
    std::vector<int> v;
    read(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 2 || v[0] > v[1]) throw DataError(where_ + "." + key + ": expected [a, b] with a <= b");
    w = {v[0], v[1]};
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, where_ + "." + key);
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw DataError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path q(p);
  return q.is_absolute() ? q.string() : (base / q).lexically_normal().string();
}

econ::RegressionSpec parse_spec(const json& j, std::size_t i) {
  Section s(j, "specs[" + std::to_string(i) + "]");
  econ::RegressionSpec spec;
  std::string cluster = "firm";
  std::vector<std::vector<std::string>> inter;
  s.read("name", spec.name);
  s.read("dependent", spec.dependent);
  s.read("regressors", spec.regressors);
  s.read("interactions", inter);
  s.read("fixed_effects", spec.fixed_effects);
  s.read("cluster", cluster);
  s.finish();
  if (spec.name.empty() || spec.dependent.empty()) throw DataError("specs[" + std::to_string(i) + "]: name and dependent are required");
  for (const auto& p : inter) {
    if (p.size() != 2) throw DataError("specs[" + std::to_string(i) + "].interactions: expected pairs");
    spec.interactions.emplace_back(p[0], p[1]);
  }
  try {
    spec.cluster = econ::parse_cluster(cluster);
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  return spec;
}

ojson window_json(const aggregate::Window& w) { return ojson::array({w.a, w.b}); }

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  PipelineConfig c;
  Section root(j, "config");
  root.read("seed", c.seed);
  root.read("out_dir", c.out_dir);
  c.out_dir = resolve(base, c.out_dir);

  if (auto s = root.child("paths")) {
    s->read("data_dir", c.paths.data_dir);
    s->read("lexicons", c.paths.lexicons);
    s->read("dictionaries", c.paths.dictionaries);
    s->finish();
    c.paths.data_dir = resolve(base, c.paths.data_dir);
    c.paths.lexicons = resolve(base, c.paths.lexicons);
    c.paths.dictionaries = resolve(base, c.paths.dictionaries);
  }

  if (auto s = root.child("synth")) {
    auto& y = c.synth;
    std::string start;
    s->read("n_firms", y.n_firms);
    s->read("n_quarters", y.n_quarters);
    s->read("n_users", y.n_users);
    s->read("start_date", start);
    if (!start.empty()) y.start_date = Date::parse(start);
    s->read("warmup_days", y.warmup_days);
    s->read("pre_window_min_msgs", y.pre_window_min_msgs);
    s->read("pre_window_max_msgs", y.pre_window_max_msgs);
    s->read("event_window_max_msgs", y.event_window_max_msgs);
    s->read("background_msgs_per_firm_quarter", y.background_msgs_per_firm_quarter);
    s->read("single_user_window_prob", y.single_user_window_prob);
    s->read("n_multi_ticker", y.n_multi_ticker);
    s->read("n_unlisted", y.n_unlisted);
    s->read("n_unmatched", y.n_unmatched);
    s->read("automated_copies", y.automated_copies);
    s->read("typo_prob", y.typo_prob);
    s->read("mislabeled_tag_prob", y.mislabeled_tag_prob);
    s->read("retweet_prob", y.retweet_prob);
    s->read("hyperlink_prob", y.hyperlink_prob);
    s->read("mktrf_mean", y.mktrf_mean);
    s->read("mktrf_sd", y.mktrf_sd);
    s->read("style_factor_sd", y.style_factor_sd);
    s->read("rf", y.rf);
    s->read("idio_sd", y.idio_sd);
    s->read("bid_ask_half_spread", y.bid_ask_half_spread);
    s->read("planted_happy_coef", y.planted_happy_coef);
    s->read("planted_sue_coef", y.planted_sue_coef);
    if (const json* fb = s->raw("fixed_betas"); fb && !fb->is_null()) {
      auto v = fb->get<std::vector<double>>();
      if (v.size() != 4) throw DataError("config.synth.fixed_betas: expected four numbers");
      y.fixed_betas = std::array<double, 4>{v[0], v[1], v[2], v[3]};
    }
    s->finish();
  }

  if (auto s = root.child("filter")) {
    s->read("automated_threshold", c.automated_threshold);
    s->read("window_user_min", c.window_user_min);
    s->finish();
  }
  if (auto s = root.child("label")) {
    s->read("nb_smoothing", c.nb_smoothing);
    s->finish();
  }

  if (auto s = root.child("model")) {
    auto& m = c.model;
    std::string preset;
    s->read("preset", preset);
    if (preset == "full") m = bigru::Hyperparams::full_scale();
    else if (!preset.empty() && preset != "desk") throw DataError("config.model.preset: expected 'full' or 'desk'");
    s->read("T", m.T);
    s->read("embed_dim", m.embed_dim);
    s->read("hidden", m.hidden);
    s->read("linear_dim", m.linear_dim);
    s->read("dense1", m.dense1);
    s->read("dense2", m.dense2);
    s->read("batch", m.batch);
    s->read("lr", m.lr);
    s->read("momentum", m.momentum);
    s->read("embed_dropout", m.embed_dropout);
    s->read("early_stop_patience", m.early_stop_patience);
    s->read("max_epochs", m.max_epochs);
    s->read("validation_fraction", m.validation_fraction);
    s->read("threads", m.threads);
    s->read("vocab_cap", c.vocab_cap);
    s->read("cv_folds", c.cv_folds);
    s->finish();
  }

  if (auto s = root.child("attribute")) {
    s->read("n_messages", c.attribute.n_messages);
    s->read("n_samples", c.attribute.n_samples);
    s->read("min_count", c.attribute.min_count);
    s->finish();
  }

  if (auto s = root.child("windows")) {
    s->read_window("pre", c.panel.pre);
    s->read_window("evt", c.panel.evt);
    s->read_window("volatility", c.panel.vol);
    s->read_window("estimation", c.event_study.estimation);
    std::vector<std::vector<int>> ev;
    s->read("event_windows", ev);
    if (!ev.empty()) {
      if (ev.size() != 3) throw DataError("config.windows.event_windows: expected three windows");
      for (std::size_t i = 0; i < 3; ++i) {
        if (ev[i].size() != 2 || ev[i][0] > ev[i][1]) throw DataError("config.windows.event_windows: bad window");
        c.event_study.windows[i] = {ev[i][0], ev[i][1]};
      }
    }
    s->read("min_estimation_obs", c.event_study.min_obs);
    s->finish();
  }

  if (auto s = root.child("aggregate")) {
    std::string scheme = std::string(aggregate::to_string(c.panel.scheme));
    s->read("scheme", scheme);
    try {
      c.panel.scheme = aggregate::parse_weight_scheme(scheme);
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("config.aggregate.scheme: ") + e.what());
    }
    s->read("min_users", c.panel.min_users);
    s->read("winsorize", c.panel.winsorize);
    s->read("lower", c.panel.lower);
    s->read("upper", c.panel.upper);
    s->read("winsorize_columns", c.panel.winsorize_columns);
    s->read("close_seconds", c.panel.close_seconds);
    s->read("variants", c.panel_variants);
    s->finish();
  }

  if (const json* specs = root.raw("specs")) {
    if (!specs->is_array()) throw DataError("config.specs: expected an array");
    c.specs.clear();
    for (std::size_t i = 0; i < specs->size(); ++i) c.specs.push_back(parse_spec((*specs)[i], i));
  }

  if (auto s = root.child("portfolio")) {
    s->read("deciles", c.portfolio.deciles);
    s->read_window("hold", c.portfolio.hold);
    s->finish();
  }

  if (auto s = root.child("toymodel")) {
    auto& p = c.toy.params;
    s->read("m", p.m);
    s->read("m_tilde", p.m_tilde);
    s->read("n", p.n);
    s->read("rho", p.rho);
    s->read("sigma_i2", p.sigma_i2);
    s->read("sigma_a2", p.sigma_a2);
    s->read("sigma_1_2", p.sigma_1_2);
    s->read("sigma_2_2", p.sigma_2_2);
    s->read("s1", c.toy.signals.s1);
    s->read("s2", c.toy.signals.s2);
    s->read("eta_min", c.toy.eta_min);
    s->read("eta_max", c.toy.eta_max);
    s->read("eta_points", c.toy.eta_points);
    s->finish();
  }
  root.finish();
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  model.validate();
  if (model.classes != 7) throw InvalidArgument("config: the emotion model has 7 classes");
  if (vocab_cap < 2) throw InvalidArgument("config: vocab_cap must be >= 2");
  if (cv_folds == 1) throw InvalidArgument("config: cv_folds must be 0 or >= 2");
  if (window_user_min < 1 || panel.min_users < 1) throw InvalidArgument("config: user minimums must be >= 1");
  if (!(nb_smoothing > 0)) throw InvalidArgument("config: nb_smoothing must be positive");
  if (attribute.n_samples < 1) throw InvalidArgument("config: attribute.n_samples must be >= 1");
  if (portfolio.deciles < 1) throw InvalidArgument("config: portfolio.deciles must be >= 1");
  if (!(panel.lower >= 0 && panel.lower < panel.upper && panel.upper <= 1))
    throw InvalidArgument("config: winsorization limits must satisfy 0 <= lower < upper <= 1");
  if (toy.eta_points < 1) throw InvalidArgument("config: toymodel.eta_points must be >= 1");
  auto p = toy.params;
  p.eta = 0;
  p.validate();
  if (!(toy.eta_min > -1 && toy.eta_max < 1 && toy.eta_min <= toy.eta_max))
    throw InvalidArgument("config: toymodel eta range must lie in (-1, 1)");
  for (const auto& s : specs)
    if (s.name.empty() || s.dependent.empty()) throw InvalidArgument("config: every spec needs a name and dependent");
}

std::string PipelineConfig::data_dir() const {
  return paths.data_dir.empty() ? (fs::path(out_dir) / "data").string() : paths.data_dir;
}

std::string PipelineConfig::out(const std::string& name) const { return (fs::path(out_dir) / name).string(); }

std::string PipelineConfig::to_json() const {
  ojson j;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["paths"] = {{"data_dir", paths.data_dir}, {"lexicons", paths.lexicons}, {"dictionaries", paths.dictionaries}};
  const auto& y = synth;
  ojson sj = {{"n_firms", y.n_firms},
              {"n_quarters", y.n_quarters},
              {"n_users", y.n_users},
              {"start_date", y.start_date.iso()},
              {"warmup_days", y.warmup_days},
              {"pre_window_min_msgs", y.pre_window_min_msgs},
              {"pre_window_max_msgs", y.pre_window_max_msgs},
              {"event_window_max_msgs", y.event_window_max_msgs},
              {"background_msgs_per_firm_quarter", y.background_msgs_per_firm_quarter},
              {"single_user_window_prob", y.single_user_window_prob},
              {"n_multi_ticker", y.n_multi_ticker},
              {"n_unlisted", y.n_unlisted},
              {"n_unmatched", y.n_unmatched},
              {"automated_copies", y.automated_copies},
              {"typo_prob", y.typo_prob},
              {"mislabeled_tag_prob", y.mislabeled_tag_prob},
              {"retweet_prob", y.retweet_prob},
              {"hyperlink_prob", y.hyperlink_prob},
              {"mktrf_mean", y.mktrf_mean},
              {"mktrf_sd", y.mktrf_sd},
              {"style_factor_sd", y.style_factor_sd},
              {"rf", y.rf},
              {"idio_sd", y.idio_sd},
              {"bid_ask_half_spread", y.bid_ask_half_spread},
              {"planted_happy_coef", y.planted_happy_coef},
              {"planted_sue_coef", y.planted_sue_coef}};
  sj["fixed_betas"] = y.fixed_betas ? ojson(*y.fixed_betas) : ojson(nullptr);
  j["synth"] = sj;
  j["filter"] = {{"automated_threshold", automated_threshold}, {"window_user_min", window_user_min}};
  j["label"] = {{"nb_smoothing", nb_smoothing}};
  const auto& m = model;
  j["model"] = {{"T", m.T},
                {"embed_dim", m.embed_dim},
                {"hidden", m.hidden},
                {"linear_dim", m.linear_dim},
                {"dense1", m.dense1},
                {"dense2", m.dense2},
                {"batch", m.batch},
                {"lr", m.lr},
                {"momentum", m.momentum},
                {"embed_dropout", m.embed_dropout},
                {"early_stop_patience", m.early_stop_patience},
                {"max_epochs", m.max_epochs},
                {"validation_fraction", m.validation_fraction},
                {"threads", m.threads},
                {"vocab_cap", vocab_cap},
                {"cv_folds", cv_folds}};
  j["attribute"] = {{"n_messages", attribute.n_messages},
                    {"n_samples", attribute.n_samples},
                    {"min_count", attribute.min_count}};
  ojson ev = ojson::array();
  for (const auto& w : event_study.windows) ev.push_back(window_json(w));
  j["windows"] = {{"pre", window_json(panel.pre)},
                  {"evt", window_json(panel.evt)},
                  {"volatility", window_json(panel.vol)},
                  {"estimation", window_json(event_study.estimation)},
                  {"event_windows", ev},
                  {"min_estimation_obs", event_study.min_obs}};
  j["aggregate"] = {{"scheme", aggregate::to_string(panel.scheme)},
                    {"min_users", panel.min_users},
                    {"winsorize", panel.winsorize},
                    {"lower", panel.lower},
                    {"upper", panel.upper},
                    {"winsorize_columns", panel.winsorize_columns},
                    {"close_seconds", panel.close_seconds},
                    {"variants", panel_variants}};
  ojson sp = ojson::array();
  for (const auto& s : specs) {
    ojson inter = ojson::array();
    for (const auto& [a, b] : s.interactions) inter.push_back({a, b});
    sp.push_back({{"name", s.name},
                  {"dependent", s.dependent},
                  {"regressors", s.regressors},
                  {"interactions", inter},
                  {"fixed_effects", s.fixed_effects},
                  {"cluster", econ::to_string(s.cluster)}});
  }
  j["specs"] = sp;
  j["portfolio"] = {{"deciles", portfolio.deciles}, {"hold", window_json(portfolio.hold)}};
  const auto& t = toy.params;
  j["toymodel"] = {{"m", t.m},
                   {"m_tilde", t.m_tilde},
                   {"n", t.n},
                   {"rho", t.rho},
                   {"sigma_i2", t.sigma_i2},
                   {"sigma_a2", t.sigma_a2},
                   {"sigma_1_2", t.sigma_1_2},
                   {"sigma_2_2", t.sigma_2_2},
                   {"s1", toy.signals.s1},
                   {"s2", toy.signals.s2},
                   {"eta_min", toy.eta_min},
                   {"eta_max", toy.eta_max},
                   {"eta_points", toy.eta_points}};
  return j.dump(2);
}

}  // namespace emopanel::pipeline
