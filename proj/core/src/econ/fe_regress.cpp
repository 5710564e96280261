#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "emopanel/econ.hpp"

namespace emopanel::econ {

namespace {

const std::set<std::string> kFixedEffects{"firm", "year", "month", "dow"};

bool shorter_first(const std::string& a, const std::string& b) {
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

bool full_rank(const Matrix& X) {
  Vector scale = X.colwise().norm().transpose();
  if ((scale.array() == 0).any()) return false;
  Eigen::ColPivHouseholderQR<Matrix> qr(X * scale.cwiseInverse().asDiagonal());
  qr.setThreshold(1e-10);
  return qr.rank() == X.cols();
}

std::string cluster_key(Cluster c) { return c == Cluster::firm ? "firm" : "industry_quarter"; }

}  // namespace

const std::vector<double>& Frame::column(const std::string& name) const {
  auto it = num.find(name);
  if (it == num.end()) throw DataError("unknown column '" + name + "'");
  return it->second;
}

const std::vector<std::string>& Frame::key(const std::string& name) const {
  auto it = keys.find(name);
  if (it == keys.end()) throw DataError("unknown key '" + name + "'");
  return it->second;
}

std::vector<double> top_share_dummy(const std::vector<double>& column, double share) {
  if (!(share > 0 && share < 1)) throw InvalidArgument("top_share_dummy: share must lie in (0, 1)");
  std::vector<double> sorted;
  for (double v : column)
    if (!is_missing(v)) sorted.push_back(v);
  std::vector<double> out(column.size(), kNaN);
  if (sorted.empty()) return out;
  std::sort(sorted.begin(), sorted.end());
  auto r = static_cast<std::size_t>(std::ceil((1 - share) * static_cast<double>(sorted.size()) - 1e-9));
  const double cut = sorted[std::clamp<std::size_t>(r, 1, sorted.size()) - 1];
  for (std::size_t i = 0; i < column.size(); ++i)
    if (!is_missing(column[i])) out[i] = column[i] > cut ? 1.0 : 0.0;
  return out;
}

Frame frame_from_panel(const std::vector<aggregate::PanelRow>& rows) {
  Frame f;
  f.n = rows.size();
  for (const auto& r : rows) {
    for (const auto& [name, v] : aggregate::numeric_fields(r)) f.num[name].push_back(v);
    for (const auto& [name, v] : aggregate::key_fields(r)) f.keys[name].push_back(v);
  }
  if (!rows.empty()) f.num["high_volatility"] = top_share_dummy(f.num["volatility"], 0.1);
  return f;
}

std::string_view to_string(Cluster c) {
  switch (c) {
    case Cluster::firm:
      return "firm";
    case Cluster::industry_quarter:
      return "industry_quarter";
    case Cluster::none:
      return "none";
  }
  return "none";
}

Cluster parse_cluster(std::string_view s) {
  if (s == "firm") return Cluster::firm;
  if (s == "industry_quarter") return Cluster::industry_quarter;
  if (s == "none") return Cluster::none;
  throw InvalidArgument("unknown cluster '" + std::string(s) + "'");
}

void RegressionSpec::validate(const Frame& frame) const {
  (void)frame.column(dependent);
  if (regressors.empty() && interactions.empty()) throw InvalidArgument(name + ": no regressors");
  for (const auto& r : regressors) {
    if (r == dependent) throw InvalidArgument(name + ": dependent '" + r + "' listed as regressor");
    (void)frame.column(r);
  }
  for (const auto& [a, b] : interactions) {
    if (a == dependent || b == dependent) throw InvalidArgument(name + ": dependent used in an interaction");
    (void)frame.column(a);
    (void)frame.column(b);
  }
  for (const auto& fe : fixed_effects) {
    if (!kFixedEffects.count(fe)) throw InvalidArgument(name + ": unknown fixed effect '" + fe + "'");
    (void)frame.key(fe);
  }
  if (cluster != Cluster::none) (void)frame.key(cluster_key(cluster));
}

const Coefficient& FitResult::at(const std::string& name) const {
  for (const auto& c : coefs)
    if (c.name == name) return c;
  throw InvalidArgument("no coefficient '" + name + "' in " + spec);
}

FitResult fe_regress(const Frame& frame, const RegressionSpec& spec) {
  spec.validate(frame);
  const bool firm_fe = std::find(spec.fixed_effects.begin(), spec.fixed_effects.end(), "firm") != spec.fixed_effects.end();

  std::vector<const std::vector<double>*> needed{&frame.column(spec.dependent)};
  for (const auto& r : spec.regressors) needed.push_back(&frame.column(r));
  for (const auto& [a, b] : spec.interactions) {
    needed.push_back(&frame.column(a));
    needed.push_back(&frame.column(b));
  }
  std::vector<const std::vector<std::string>*> needed_keys;
  for (const auto& fe : spec.fixed_effects) needed_keys.push_back(&frame.key(fe));
  if (spec.cluster != Cluster::none) needed_keys.push_back(&frame.key(cluster_key(spec.cluster)));
  if (firm_fe) needed_keys.push_back(&frame.key("firm"));

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.n; ++i) {
    bool ok = std::all_of(needed.begin(), needed.end(), [&](const auto* c) { return std::isfinite((*c)[i]); }) &&
              std::all_of(needed_keys.begin(), needed_keys.end(), [&](const auto* k) { return !(*k)[i].empty(); });
    if (ok) rows.push_back(i);
  }
  FitResult res;
  res.spec = spec.name;
  res.n_dropped = frame.n - rows.size();
  const auto N = static_cast<Eigen::Index>(rows.size());

  std::vector<std::string> names;
  std::vector<Vector> cols;
  auto gather = [&](const std::vector<double>& c) {
    Vector v(N);
    for (Eigen::Index i = 0; i < N; ++i) v(i) = c[rows[static_cast<std::size_t>(i)]];
    return v;
  };
  for (const auto& r : spec.regressors) {
    names.push_back(r);
    cols.push_back(gather(frame.column(r)));
  }
  for (const auto& [a, b] : spec.interactions) {
    names.push_back(a + ":" + b);
    cols.push_back(gather(frame.column(a)).cwiseProduct(gather(frame.column(b))));
  }
  const std::size_t n_main = names.size();
  if (!firm_fe) {
    names.push_back("const");
    cols.push_back(Vector::Ones(N));
  }

  std::vector<std::string> dummy_names;
  std::vector<Vector> dummy_cols;
  for (const auto& fe : spec.fixed_effects) {
    if (fe == "firm") continue;
    const auto& k = frame.key(fe);
    std::set<std::string, decltype(&shorter_first)> levels(&shorter_first);
    for (auto i : rows) levels.insert(k[i]);
    bool first = true;
    for (const auto& lv : levels) {
      if (first) {
        first = false;
        continue;
      }
      Vector d(N);
      for (Eigen::Index i = 0; i < N; ++i) d(i) = k[rows[static_cast<std::size_t>(i)]] == lv ? 1.0 : 0.0;
      dummy_names.push_back(fe + "=" + lv);
      dummy_cols.push_back(std::move(d));
    }
  }

  Vector y = gather(frame.column(spec.dependent));

  // Firm groups for the within transformation and the within-sd of y.
  std::vector<std::size_t> group(static_cast<std::size_t>(N));
  std::vector<double> group_n;
  {
    std::unordered_map<std::string, std::size_t> gid;
    static const std::string kOne;
    const auto* firms = frame.keys.count("firm") ? &frame.key("firm") : nullptr;
    for (Eigen::Index i = 0; i < N; ++i) {
      const auto& f = firms ? (*firms)[rows[static_cast<std::size_t>(i)]] : kOne;
      auto [it, fresh] = gid.try_emplace(f, gid.size());
      if (fresh) group_n.push_back(0);
      group[static_cast<std::size_t>(i)] = it->second;
      group_n[it->second] += 1;
    }
  }
  auto demean = [&](Vector& v) {
    std::vector<double> sum(group_n.size(), 0.0);
    for (Eigen::Index i = 0; i < N; ++i) sum[group[static_cast<std::size_t>(i)]] += v(i);
    for (Eigen::Index i = 0; i < N; ++i) v(i) -= sum[group[static_cast<std::size_t>(i)]] / group_n[group[static_cast<std::size_t>(i)]];
  };
  {
    Vector yw = y;
    demean(yw);
    if (N > 1) res.within_sd_dep = std::sqrt(yw.squaredNorm() / static_cast<double>(N - 1));
  }
  if (firm_fe) {
    demean(y);
    for (auto& c : cols) demean(c);
    for (auto& c : dummy_cols) demean(c);
    res.n_singletons = static_cast<std::size_t>(std::count(group_n.begin(), group_n.end(), 1.0));
  }

  auto assemble = [&](const std::vector<Vector>& cs) {
    Matrix X(N, static_cast<Eigen::Index>(cs.size()));
    for (std::size_t j = 0; j < cs.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = cs[j];
    return X;
  };
  // Dummies that add no rank (absorbed by other effects) are dropped.
  for (std::size_t j = 0; j < dummy_cols.size(); ++j) {
    auto trial = cols;
    trial.push_back(dummy_cols[j]);
    if (static_cast<Eigen::Index>(trial.size()) < N && full_rank(assemble(trial))) {
      cols = std::move(trial);
      names.push_back(dummy_names[j]);
    } else {
      res.absorbed.push_back(dummy_names[j]);
    }
  }

  Matrix X = assemble(cols);
  OlsFit fit = ols(X, y, names);
  const auto K = static_cast<std::size_t>(X.cols());
  res.n_obs = rows.size();

  double df;
  if (spec.cluster == Cluster::none) {
    res.vcov = hc1_covariance(X, fit.resid, fit.xtx_inv);
    df = static_cast<double>(N) - static_cast<double>(K);
  } else {
    const auto& k = frame.key(cluster_key(spec.cluster));
    std::vector<std::string> cl;
    for (auto i : rows) cl.push_back(k[i]);
    res.vcov = cluster_covariance(X, fit.resid, fit.xtx_inv, cl, K);
    res.n_clusters = std::set<std::string>(cl.begin(), cl.end()).size();
    df = static_cast<double>(res.n_clusters) - 1;
  }
  for (std::size_t j = 0; j < K; ++j) {
    Coefficient c;
    c.name = names[j];
    c.coef = fit.beta(static_cast<Eigen::Index>(j));
    c.se = std::sqrt(res.vcov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    c.t = c.coef / c.se;
    c.p = t_pvalue(c.t, df);
    res.coefs.push_back(c);
  }
  // Report regressors and interactions before the intercept and dummies.
  std::stable_partition(res.coefs.begin(), res.coefs.end(), [&](const Coefficient& c) {
    return std::find(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_main), c.name) !=
           names.begin() + static_cast<std::ptrdiff_t>(n_main);
  });

  const double ssr = fit.resid.squaredNorm();
  const double sst = firm_fe ? y.squaredNorm() : (y.array() - y.mean()).square().sum();
  if (sst > 0) {
    res.r2 = 1 - ssr / sst;
    res.adj_r2 = 1 - (1 - res.r2) * (static_cast<double>(N) - 1) / (static_cast<double>(N) - static_cast<double>(K));
  }
  return res;
}

std::vector<std::string> emotion_regressors(const std::string& suffix) {
  std::vector<std::string> out;
  for (auto e : kAllEmotions)
    if (e != Emotion::neutral) out.push_back(std::string(emotion_name(e)) + suffix);
  return out;
}

std::vector<RegressionSpec> standard_specs() {
  const std::vector<std::string> fe{"firm", "year", "month", "dow"};
  const std::vector<std::string> controls{"sue", "sue_lag", "exret_m10_m2", "size", "mb",
                                          "analysts", "inst", "q4", "loss"};
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const auto main = with(emotion_regressors(), controls);

  std::vector<RegressionSpec> specs;
  specs.push_back({"announcement", "exret_m1_p1", main, {}, fe, Cluster::firm});
  specs.push_back({"drift", "exret_p2_p4", main, {}, fe, Cluster::firm});
  specs.push_back({"earnings",
                   "sue",
                   with(emotion_regressors(), {"sue_lag", "exret_m10_m2", "size", "mb", "analysts", "inst", "q4", "loss"}),
                   {},
                   {"firm", "year"},
                   Cluster::industry_quarter});
  specs.push_back({"sentiment", "exret_m1_p1", with(main, {"sentiment_pre"}), {}, fe, Cluster::firm});
  specs.push_back({"volatility_interaction", "exret_m1_p1", with(main, {"high_volatility"}),
                   {{"happy_pre", "high_volatility"}}, fe, Cluster::firm});
  specs.push_back({"sue_interaction", "exret_m1_p1", main, {{"happy_pre", "sue"}}, fe, Cluster::firm});
  return specs;
}

void write_regression_table(const std::string& path, const std::vector<FitResult>& fits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "spec,regressor,coef,se,t,p,stars,n_obs,adj_r2,within_sd_dep\n";
  for (const auto& f : fits)
    for (const auto& c : f.coefs) {
      if (c.name.find('=') != std::string::npos) continue;
      out << f.spec << ',' << c.name << ',' << format_double(c.coef) << ',' << format_double(c.se) << ','
          << format_double(c.t) << ',' << format_double(c.p) << ',' << stars(c.p) << ',' << f.n_obs << ','
          << format_double(f.adj_r2) << ',' << format_double(f.within_sd_dep) << '\n';
    }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace emopanel::econ
