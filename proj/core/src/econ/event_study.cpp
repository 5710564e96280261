#include <cmath>
#include <cstdlib>
#include <fstream>
#include <unordered_map>

#include "emopanel/econ.hpp"

namespace emopanel::econ {

namespace {

std::string offset_name(int k) { return (k < 0 ? "m" : "p") + std::to_string(std::abs(k)); }

}  // namespace

FactorIndex index_factors(const std::vector<corpus::FactorRow>& factors) {
  FactorIndex idx;
  for (const auto& f : factors)
    if (!idx.emplace(f.date, f).second) throw DataError("duplicate factor date " + f.date.iso());
  return idx;
}

FactorFit carhart_fit(std::span<const corpus::DailyQuote> quotes, const FactorIndex& factors, Date start, Date end,
                      std::size_t min_obs) {
  std::vector<std::pair<const corpus::DailyQuote*, const corpus::FactorRow*>> obs;
  for (const auto& q : quotes) {
    if (q.date < start || q.date > end || is_missing(q.ret)) continue;
    auto f = factors.find(q.date);
    if (f != factors.end()) obs.emplace_back(&q, &f->second);
  }
  if (obs.size() < min_obs)
    throw InvalidArgument("carhart_fit: " + std::to_string(obs.size()) + " observations, need " +
                          std::to_string(min_obs));
  const auto n = static_cast<Eigen::Index>(obs.size());
  Matrix X(n, 5);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [q, f] = obs[static_cast<std::size_t>(i)];
    X.row(i) << 1.0, f->mktrf, f->smb, f->hml, f->umd;
    y(i) = q->ret - f->rf;
  }
  auto fit = ols(X, y, {"alpha", "mktrf", "smb", "hml", "umd"});
  FactorFit out;
  out.alpha = fit.beta(0);
  for (int j = 0; j < 4; ++j) out.betas[static_cast<std::size_t>(j)] = fit.beta(j + 1);
  out.start = start;
  out.end = end;
  out.n_obs = obs.size();
  return out;
}

double bhar(std::span<const double> realized, std::span<const double> expected) {
  if (realized.size() != expected.size()) throw InvalidArgument("bhar: length mismatch");
  double pr = 1, pe = 1;
  for (std::size_t i = 0; i < realized.size(); ++i) {
    pr *= 1 + realized[i];
    pe *= 1 + expected[i];
  }
  return 100 * (pr - pe);
}

double expected_return(const FactorFit& fit, const corpus::FactorRow& f) {
  return f.rf + fit.alpha + fit.betas[0] * f.mktrf + fit.betas[1] * f.smb + fit.betas[2] * f.hml +
         fit.betas[3] * f.umd;
}

double bhar(const std::map<Date, double>& returns, const FactorIndex& factors, const FactorFit& fit,
            const std::vector<Date>& dates) {
  std::vector<double> r, e;
  for (const auto& d : dates) {
    auto q = returns.find(d);
    auto f = factors.find(d);
    if (q == returns.end() || f == factors.end() || is_missing(q->second)) return kNaN;
    r.push_back(q->second);
    e.push_back(expected_return(fit, f->second));
  }
  return bhar(r, e);
}

std::vector<EventStudyRow> event_study(const std::vector<corpus::Announcement>& announcements,
                                       const std::vector<corpus::DailyQuote>& quotes, const FactorIndex& factors,
                                       const aggregate::TradingCalendar& cal, const EventStudyConfig& cfg) {
  if (cfg.estimation.a > cfg.estimation.b) throw InvalidArgument("event_study: bad estimation window");
  std::unordered_map<std::string, std::vector<corpus::DailyQuote>> by_firm;
  std::unordered_map<std::string, std::map<Date, double>> returns;
  for (const auto& q : quotes) {
    by_firm[q.firm_id].push_back(q);
    returns[q.firm_id][q.date] = q.ret;
  }
  static const std::vector<corpus::DailyQuote> kNoQuotes;
  static const std::map<Date, double> kNoReturns;

  std::vector<EventStudyRow> out;
  for (const auto& a : announcements) {
    EventStudyRow row;
    row.announcement_key = a.key();
    row.firm_id = a.firm_id;
    std::size_t day0;
    try {
      day0 = aggregate::resolve_day0_index(a, cal);
    } catch (const DataError&) {
      row.note = "outside calendar";
      out.push_back(std::move(row));
      continue;
    }
    row.day0 = cal[day0];
    const auto i0 = static_cast<std::int64_t>(day0);
    const auto lo = std::max<std::int64_t>(0, i0 + cfg.estimation.a), hi = i0 + cfg.estimation.b;
    if (hi < lo) {
      row.note = "estimation window before calendar start";
      out.push_back(std::move(row));
      continue;
    }
    auto fq = by_firm.find(a.firm_id);
    const auto& firm_quotes = fq == by_firm.end() ? kNoQuotes : fq->second;
    try {
      row.fit = carhart_fit(firm_quotes, factors, cal[static_cast<std::size_t>(lo)], cal[static_cast<std::size_t>(hi)],
                            cfg.min_obs);
    } catch (const InvalidArgument& e) {
      row.note = e.what();
      out.push_back(std::move(row));
      continue;
    }
    auto fr = returns.find(a.firm_id);
    const auto& rets = fr == returns.end() ? kNoReturns : fr->second;
    for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
      const auto& win = cfg.windows[w];
      auto ew = aggregate::make_window(cal, day0, win.a, win.b, row.announcement_key);
      if (ew.dates.size() != static_cast<std::size_t>(win.b - win.a + 1)) continue;
      row.exret[w] = bhar(rets, factors, *row.fit, ew.dates);
    }
    out.push_back(std::move(row));
  }
  return out;
}

aggregate::ExretMap to_exret_map(const std::vector<EventStudyRow>& rows) {
  aggregate::ExretMap m;
  for (const auto& r : rows) m[r.announcement_key] = r.exret;
  return m;
}

void write_event_study_csv(const std::string& path, const std::vector<EventStudyRow>& rows,
                           const EventStudyConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "announcement_key,firm_id,day0,alpha,b_mktrf,b_smb,b_hml,b_umd,n_obs";
  for (const auto& w : config.windows) out << ",exret_" << offset_name(w.a) << '_' << offset_name(w.b);
  out << ",note\n";
  for (const auto& r : rows) {
    out << r.announcement_key << ',' << r.firm_id << ',' << (r.note == "outside calendar" ? "" : r.day0.iso());
    if (r.fit) {
      out << ',' << format_double(r.fit->alpha);
      for (double b : r.fit->betas) out << ',' << format_double(b);
      out << ',' << r.fit->n_obs;
    } else {
      out << ",,,,,,";
    }
    for (double e : r.exret) out << ',' << format_double(e);
    std::string note = r.note;
    for (char& c : note)
      if (c == ',' || c == '\n') c = ';';
    out << ',' << note << '\n';
  }
}

}  // namespace emopanel::econ
