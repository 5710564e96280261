#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "emopanel/aggregate.hpp"

namespace emopanel::aggregate {

namespace {

using Field = double PanelRow::*;

const std::vector<std::pair<std::string, Field>>& scalar_fields() {
  static const std::vector<std::pair<std::string, Field>> kFields{
      {"sentiment_pre", &PanelRow::sentiment_pre}, {"sentiment_evt", &PanelRow::sentiment_evt},
      {"exret_m1_p1", &PanelRow::exret_m1_p1},     {"exret_p2_p4", &PanelRow::exret_p2_p4},
      {"exret_m10_m2", &PanelRow::exret_m10_m2},   {"sue", &PanelRow::sue},
      {"sue_lag", &PanelRow::sue_lag},             {"loss", &PanelRow::loss},
      {"analysts", &PanelRow::analysts},           {"inst", &PanelRow::inst},
      {"size", &PanelRow::size},                   {"mb", &PanelRow::mb},
      {"q4", &PanelRow::q4},                       {"volatility", &PanelRow::volatility},
  };
  return kFields;
}

std::string emo_column(Emotion e, const char* suffix) { return std::string(emotion_name(e)) + suffix; }

EmotionVector nan_vector() {
  EmotionVector v;
  v.fill(kNaN);
  return v;
}

std::string list_some(const std::set<std::string>& items) {
  std::string out;
  std::size_t shown = 0;
  for (const auto& s : items) {
    if (shown == 10) {
      out += ", ... (" + std::to_string(items.size()) + " total)";
      break;
    }
    out += (shown++ ? ", " : "") + s;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& panel_columns() {
  static const std::vector<std::string> kColumns = [] {
    std::vector<std::string> c{"firm_id", "announcement_key", "quarter_id", "day0", "year", "month", "dow",
                               "industry_ff48", "industry_quarter"};
    for (auto e : kAllEmotions) c.push_back(emo_column(e, "_pre"));
    for (auto e : kAllEmotions) c.push_back(emo_column(e, "_evt"));
    for (const auto& [name, f] : scalar_fields()) c.push_back(name);
    c.push_back("n_messages");
    c.push_back("n_users");
    return c;
  }();
  return kColumns;
}

std::vector<std::pair<std::string, double>> numeric_fields(const PanelRow& row) {
  std::vector<std::pair<std::string, double>> out;
  for (auto e : kAllEmotions) out.emplace_back(emo_column(e, "_pre"), at(row.emo_pre, e));
  for (auto e : kAllEmotions) out.emplace_back(emo_column(e, "_evt"), at(row.emo_evt, e));
  for (const auto& [name, f] : scalar_fields()) out.emplace_back(name, row.*f);
  out.emplace_back("n_messages", static_cast<double>(row.n_messages));
  out.emplace_back("n_users", static_cast<double>(row.n_users));
  return out;
}

std::map<std::string, std::string> key_fields(const PanelRow& row) {
  return {{"firm", row.firm_id},
          {"year", std::to_string(row.year())},
          {"month", std::to_string(row.month())},
          {"dow", std::to_string(row.dow())},
          {"industry_quarter", row.industry_quarter()},
          {"quarter", row.quarter_id}};
}

PanelResult assemble_panel(const PanelInputs& in, const PanelConfig& cfg) {
  if (!in.announcements || !in.calendar || !in.messages)
    throw InvalidArgument("assemble_panel: announcements, calendar and messages are required");
  if (cfg.pre.a > cfg.pre.b || cfg.evt.a > cfg.evt.b || cfg.vol.a > cfg.vol.b)
    throw InvalidArgument("assemble_panel: window start after end");
  const auto& anns = *in.announcements;
  const auto& cal = *in.calendar;

  std::set<std::string> keys, firms, dupes;
  for (const auto& a : anns) {
    if (!keys.insert(a.key()).second) dupes.insert(a.key());
    firms.insert(a.firm_id);
  }
  if (!dupes.empty()) throw DataError("duplicate announcement keys: " + list_some(dupes));
  if (in.exret) {
    std::set<std::string> bad;
    for (const auto& [k, v] : *in.exret)
      if (!keys.count(k)) bad.insert(k);
    if (!bad.empty()) throw DataError("excess-return keys without an announcement: " + list_some(bad));
  }

  std::unordered_map<std::string, std::vector<const MessageObs*>> by_firm;
  {
    std::set<std::string> bad;
    for (const auto& m : *in.messages) {
      if (!firms.count(m.firm_id)) {
        bad.insert(m.firm_id);
        continue;
      }
      if (cfg.filter && !cfg.filter(m)) continue;
      by_firm[m.firm_id].push_back(&m);
    }
    if (!bad.empty()) throw DataError("message firms without announcements: " + list_some(bad));
  }
  for (auto& [f, v] : by_firm)
    std::stable_sort(v.begin(), v.end(),
                     [](const MessageObs* x, const MessageObs* y) { return x->day_index < y->day_index; });

  std::unordered_map<std::string, std::map<Date, double>> returns;
  if (in.quotes)
    for (const auto& q : *in.quotes) returns[q.firm_id][q.date] = q.ret;

  auto in_window = [](const std::vector<const MessageObs*>& msgs, std::int64_t lo, std::int64_t hi) {
    std::vector<const MessageObs*> out;
    for (const auto* m : msgs) {
      auto d = static_cast<std::int64_t>(m->day_index);
      if (d >= lo && d <= hi) out.push_back(m);
    }
    return out;
  };

  PanelResult res;
  static const std::vector<const MessageObs*> kNone;
  for (const auto& a : anns) {
    std::size_t day0;
    try {
      day0 = resolve_day0_index(a, cal);
    } catch (const DataError&) {
      ++res.dropped_outside_calendar;
      continue;
    }
    const auto i0 = static_cast<std::int64_t>(day0);
    auto fit = by_firm.find(a.firm_id);
    const auto& msgs = fit == by_firm.end() ? kNone : fit->second;

    auto pre = in_window(msgs, i0 + cfg.pre.a, i0 + cfg.pre.b);
    std::set<std::string> users;
    for (const auto* m : pre) users.insert(m->user.user_id);
    if (pre.empty() || users.size() < cfg.min_users) {
      ++res.dropped_min_users;
      continue;
    }

    PanelRow r;
    r.firm_id = a.firm_id;
    r.announcement_key = a.key();
    r.quarter_id = a.quarter_id;
    r.day0 = cal[day0];
    r.industry_ff48 = a.industry_ff48;
    r.emo_pre = *aggregate_emotions(pre, cfg.scheme);
    r.sentiment_pre = aggregate_sentiment(pre, cfg.scheme);
    auto evt = in_window(msgs, i0 + cfg.evt.a, i0 + cfg.evt.b);
    if (evt.empty()) {
      r.emo_evt = nan_vector();
    } else {
      r.emo_evt = *aggregate_emotions(evt, cfg.scheme);
      r.sentiment_evt = aggregate_sentiment(evt, cfg.scheme);
    }
    if (in.exret) {
      auto e = in.exret->find(a.key());
      if (e != in.exret->end()) {
        r.exret_m1_p1 = e->second[0];
        r.exret_p2_p4 = e->second[1];
        r.exret_m10_m2 = e->second[2];
      }
    }
    r.sue = a.sue;
    r.sue_lag = a.sue_lag;
    r.loss = a.loss;
    r.analysts = a.analysts;
    r.inst = a.inst;
    r.size = a.size;
    r.mb = a.mb;
    r.q4 = a.q4;
    auto rt = returns.find(a.firm_id);
    if (rt != returns.end()) {
      std::vector<double> rets;
      for (auto k = i0 + cfg.vol.a; k <= i0 + cfg.vol.b; ++k) {
        if (k < 0 || k >= static_cast<std::int64_t>(cal.size())) continue;
        auto q = rt->second.find(cal[static_cast<std::size_t>(k)]);
        if (q != rt->second.end() && !is_missing(q->second)) rets.push_back(q->second);
      }
      r.volatility = volatility(rets);
    }
    r.n_messages = static_cast<std::int64_t>(pre.size());
    r.n_users = static_cast<std::int64_t>(users.size());
    res.rows.push_back(std::move(r));
  }

  std::stable_sort(res.rows.begin(), res.rows.end(), [](const PanelRow& x, const PanelRow& y) {
    return std::tie(x.day0, x.firm_id) < std::tie(y.day0, y.firm_id);
  });

  if (cfg.winsorize && !res.rows.empty()) {
    for (const auto& name : cfg.winsorize_columns) {
      auto f = std::find_if(scalar_fields().begin(), scalar_fields().end(),
                            [&](const auto& p) { return p.first == name; });
      if (f == scalar_fields().end()) throw InvalidArgument("winsorize: unknown panel column '" + name + "'");
      std::vector<double> col;
      for (const auto& r : res.rows) col.push_back(r.*(f->second));
      if (std::all_of(col.begin(), col.end(), is_missing)) continue;
      col = winsorize(col, cfg.lower, cfg.upper);
      for (std::size_t i = 0; i < col.size(); ++i) res.rows[i].*(f->second) = col[i];
    }
  }
  return res;
}

std::vector<Variant> standard_variants() {
  using weaklabel::ChatType;
  std::vector<Variant> v;
  for (auto c : {ChatType::chat, ChatType::fundamental, ChatType::earnings})
    v.push_back({"chat_" + std::string(weaklabel::to_string(c)), [c](const MessageObs& m) { return m.chat_type == c; }});
  for (auto c : {corpus::Channel::original, corpus::Channel::dissemination})
    v.push_back({"channel_" + std::string(corpus::to_string(c)), [c](const MessageObs& m) { return m.channel == c; }});
  for (auto a : {corpus::AccountType::institution, corpus::AccountType::trader})
    v.push_back({"account_" + std::string(corpus::to_string(a)),
                 [a](const MessageObs& m) { return m.user.account_type == a; }});
  for (auto e : {corpus::Experience::novice, corpus::Experience::intermediate, corpus::Experience::professional})
    v.push_back({"experience_" + std::string(corpus::to_string(e)),
                 [e](const MessageObs& m) { return m.user.experience == e; }});
  for (auto h : {corpus::HoldingPeriod::day, corpus::HoldingPeriod::swing, corpus::HoldingPeriod::position,
                 corpus::HoldingPeriod::long_term})
    v.push_back({"holding_" + std::string(corpus::to_string(h)),
                 [h](const MessageObs& m) { return m.user.holding_period == h; }});
  for (auto a : {corpus::Approach::technical, corpus::Approach::fundamental, corpus::Approach::momentum,
                 corpus::Approach::value, corpus::Approach::growth, corpus::Approach::macro})
    v.push_back({"approach_" + std::string(corpus::to_string(a)),
                 [a](const MessageObs& m) { return m.user.approach == a; }});
  v.push_back({"weight_like", {}, WeightScheme::like});
  v.push_back({"weight_equal", {}, WeightScheme::equal});
  return v;
}

void write_panel_csv(const std::string& path, const std::vector<PanelRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const auto& cols = panel_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.firm_id << ',' << r.announcement_key << ',' << r.quarter_id << ',' << r.day0.iso() << ',' << r.year()
        << ',' << r.month() << ',' << r.dow() << ',' << r.industry_ff48 << ',' << r.industry_quarter();
    for (const auto& [name, v] : numeric_fields(r)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

std::vector<PanelRow> read_panel_csv(const std::string& path) {
  auto t = read_csv(path);
  auto col = [&](const std::string& n) { return t.column(n); };
  const auto c_firm = col("firm_id"), c_key = col("announcement_key"), c_q = col("quarter_id"), c_d0 = col("day0"),
             c_ind = col("industry_ff48"), c_nm = col("n_messages"), c_nu = col("n_users");
  std::vector<std::pair<std::size_t, Field>> scalars;
  for (const auto& [name, f] : scalar_fields()) scalars.emplace_back(col(name), f);
  std::vector<std::size_t> pre, evt;
  for (auto e : kAllEmotions) {
    pre.push_back(col(emo_column(e, "_pre")));
    evt.push_back(col(emo_column(e, "_evt")));
  }
  auto num = [](const std::string& s, std::size_t line) { return s.empty() ? kNaN : parse_double(s, line); };

  std::vector<PanelRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::size_t line = i + 2;
    PanelRow r;
    r.firm_id = c[c_firm];
    r.announcement_key = c[c_key];
    r.quarter_id = c[c_q];
    try {
      r.day0 = Date::parse(c[c_d0]);
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what(), line);
    }
    r.industry_ff48 = static_cast<int>(parse_int(c[c_ind], line));
    for (int k = 0; k < kNumEmotions; ++k) {
      r.emo_pre[k] = num(c[pre[k]], line);
      r.emo_evt[k] = num(c[evt[k]], line);
    }
    for (const auto& [idx, f] : scalars) r.*f = num(c[idx], line);
    r.n_messages = parse_int(c[c_nm], line);
    r.n_users = parse_int(c[c_nu], line);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace emopanel::aggregate
