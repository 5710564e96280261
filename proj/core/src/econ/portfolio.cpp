#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "emopanel/econ.hpp"

namespace emopanel::econ {

namespace {

struct Quote {
  double bid, ask;
};

using Signal = double (*)(const aggregate::PanelRow&);

double sentiment_signal(const aggregate::PanelRow& r) { return r.sentiment_pre; }
double happy_signal(const aggregate::PanelRow& r) { return at(r.emo_pre, Emotion::happy); }

std::vector<const aggregate::PanelRow*> top_group(std::vector<const aggregate::PanelRow*> rows, Signal signal,
                                                  std::size_t deciles) {
  std::erase_if(rows, [&](const auto* r) { return is_missing(signal(*r)); });
  std::stable_sort(rows.begin(), rows.end(), [&](const auto* a, const auto* b) {
    if (signal(*a) != signal(*b)) return signal(*a) > signal(*b);
    return a->announcement_key < b->announcement_key;
  });
  const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(rows.size()) / static_cast<double>(deciles)));
  rows.resize(std::min(rows.size(), k));
  return rows;
}

}  // namespace

PortfolioResult portfolio_backtest(const std::vector<aggregate::PanelRow>& panel,
                                   const std::vector<corpus::DailyQuote>& quotes,
                                   const aggregate::TradingCalendar& cal, const PortfolioConfig& cfg) {
  if (cfg.deciles < 1) throw InvalidArgument("portfolio_backtest: deciles must be >= 1");
  if (cfg.hold.a > cfg.hold.b) throw InvalidArgument("portfolio_backtest: bad holding window");
  std::unordered_map<std::string, std::map<Date, Quote>> book;
  for (const auto& q : quotes) book[q.firm_id][q.date] = {q.bid, q.ask};

  std::map<std::string, std::vector<const aggregate::PanelRow*>> by_quarter;
  for (const auto& r : panel) by_quarter[r.quarter_id].push_back(&r);

  PortfolioResult res;
  res.dates = cal.dates();
  std::vector<double> long_sum(cal.size(), 0), short_sum(cal.size(), 0);
  std::vector<std::size_t> long_n(cal.size(), 0), short_n(cal.size(), 0);

  auto trade = [&](const aggregate::PanelRow& r, bool is_long) {
    auto i0 = cal.index_of(r.day0);
    auto fb = book.find(r.firm_id);
    for (int h = cfg.hold.a; h <= cfg.hold.b; ++h) {
      const auto t = i0 ? static_cast<std::int64_t>(*i0) + h : -1;
      if (t < 1 || t >= static_cast<std::int64_t>(cal.size()) || fb == book.end()) {
        ++res.n_skipped;
        continue;
      }
      auto now = fb->second.find(cal[static_cast<std::size_t>(t)]);
      auto prev = fb->second.find(cal[static_cast<std::size_t>(t - 1)]);
      if (now == fb->second.end() || prev == fb->second.end()) {
        ++res.n_skipped;
        continue;
      }
      const Quote& q = now->second;
      const Quote& p = prev->second;
      double ret = is_long ? (q.bid - p.ask) / p.ask : -(q.ask - p.bid) / p.bid;
      if (!std::isfinite(ret)) {
        ++res.n_skipped;
        continue;
      }
      auto ti = static_cast<std::size_t>(t);
      if (is_long) {
        long_sum[ti] += ret;
        ++long_n[ti];
      } else {
        short_sum[ti] += ret;
        ++short_n[ti];
      }
    }
  };

  for (const auto& [q, rows] : by_quarter) {
    for (const auto* r : top_group(rows, sentiment_signal, cfg.deciles)) {
      trade(*r, true);
      ++res.n_long;
    }
    for (const auto* r : top_group(rows, happy_signal, cfg.deciles)) {
      trade(*r, false);
      ++res.n_short;
    }
  }

  res.daily.assign(cal.size(), 0.0);
  res.cumulative.assign(cal.size(), 0.0);
  double wealth = 1;
  for (std::size_t t = 0; t < cal.size(); ++t) {
    if (long_n[t]) res.daily[t] += long_sum[t] / static_cast<double>(long_n[t]);
    if (short_n[t]) res.daily[t] += short_sum[t] / static_cast<double>(short_n[t]);
    wealth *= 1 + res.daily[t];
    res.cumulative[t] = wealth - 1;
  }
  return res;
}

FitResult alpha_regression(const std::vector<Date>& dates, const std::vector<double>& returns,
                           const FactorIndex& factors) {
  if (dates.size() != returns.size()) throw InvalidArgument("alpha_regression: dates and returns differ in length");
  if (dates.size() < 30) throw InvalidArgument("alpha_regression: fewer than 30 days");
  const auto n = static_cast<Eigen::Index>(dates.size());
  Matrix X(n, 5);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& d = dates[static_cast<std::size_t>(i)];
    if (i > 0 && !(dates[static_cast<std::size_t>(i - 1)] < d))
      throw InvalidArgument("alpha_regression: dates not strictly increasing at " + d.iso());
    auto f = factors.find(d);
    if (f == factors.end()) throw InvalidArgument("alpha_regression: no factor row for " + d.iso());
    X.row(i) << 1.0, f->second.mktrf, f->second.smb, f->second.hml, f->second.umd;
    y(i) = returns[static_cast<std::size_t>(i)];
  }
  const std::vector<std::string> names{"alpha", "mktrf", "smb", "hml", "umd"};
  auto fit = ols(X, y, names);
  FitResult res;
  res.spec = "portfolio_alpha";
  res.n_obs = dates.size();
  res.vcov = hc1_covariance(X, fit.resid, fit.xtx_inv);
  const double df = static_cast<double>(n - 5);
  for (Eigen::Index j = 0; j < 5; ++j) {
    Coefficient c{names[static_cast<std::size_t>(j)], fit.beta(j), std::sqrt(res.vcov(j, j)), 0, 0};
    c.t = c.coef / c.se;
    c.p = t_pvalue(c.t, df);
    res.coefs.push_back(c);
  }
  res.r2 = fit.r2;
  if (std::isfinite(fit.r2)) res.adj_r2 = 1 - (1 - fit.r2) * static_cast<double>(n - 1) / df;
  return res;
}

void write_portfolio_csv(const std::string& path, const PortfolioResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "date,daily_return,cumulative\n";
  for (std::size_t t = 0; t < r.dates.size(); ++t)
    out << r.dates[t].iso() << ',' << format_double(r.daily[t]) << ',' << format_double(r.cumulative[t]) << '\n';
}

}  // namespace emopanel::econ
