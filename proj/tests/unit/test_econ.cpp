#include <doctest.h>

#include <cmath>

#include "emopanel/econ.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::econ;

namespace {

std::vector<Date> business_days(Date from, std::size_t n) {
  std::vector<Date> out;
  for (Date d = from; out.size() < n; d = d.plus_days(1))
    if (!d.is_weekend()) out.push_back(d);
  return out;
}

std::vector<corpus::FactorRow> random_factors(const std::vector<Date>& dates, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<corpus::FactorRow> out;
  for (const auto& d : dates)
    out.push_back({d, rng.normal(0, 0.01), rng.normal(0, 0.005), rng.normal(0, 0.005), rng.normal(0, 0.006),
                   0.0001 + rng.uniform(0, 0.00005)});
  return out;
}

// Five firms, unbalanced, with firm-specific intercepts and two regressors.
struct PanelFixture {
  Frame frame;
  std::vector<std::string> firms;
  Eigen::MatrixXd X;  // x1, x2
  Eigen::VectorXd y;
};

PanelFixture panel_fixture(std::uint64_t seed) {
  Rng rng(seed);
  PanelFixture f;
  std::vector<double> x1, x2, y;
  std::vector<std::string> firm, month;
  const int sizes[] = {4, 7, 5, 9, 6};
  for (int g = 0; g < 5; ++g) {
    double alpha = rng.normal(0, 2);
    for (int t = 0; t < sizes[g]; ++t) {
      double a = rng.normal() + 0.3 * alpha, b = rng.normal();
      x1.push_back(a);
      x2.push_back(b);
      y.push_back(alpha + 1.5 * a - 0.7 * b + rng.normal(0, 0.5));
      firm.push_back("F" + std::to_string(g));
      month.push_back(std::to_string(1 + t % 3));
    }
  }
  f.frame.n = y.size();
  f.frame.num = {{"x1", x1}, {"x2", x2}, {"y", y}};
  f.frame.keys = {{"firm", firm}, {"month", month}};
  f.firms = firm;
  f.X.resize(static_cast<Eigen::Index>(y.size()), 2);
  f.y.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    f.X(static_cast<Eigen::Index>(i), 0) = x1[i];
    f.X(static_cast<Eigen::Index>(i), 1) = x2[i];
    f.y(static_cast<Eigen::Index>(i)) = y[i];
  }
  return f;
}

RegressionSpec spec(std::vector<std::string> fe, Cluster c) {
  RegressionSpec s;
  s.name = "t";
  s.dependent = "y";
  s.regressors = {"x1", "x2"};
  s.fixed_effects = std::move(fe);
  s.cluster = c;
  return s;
}

}  // namespace

TEST_CASE("four-factor fit recovers exact betas") {
  auto dates = business_days(Date(2023, 1, 2), 80);
  auto f = random_factors(dates, 4);
  auto idx = index_factors(f);
  std::vector<corpus::DailyQuote> q;
  for (const auto& r : f) q.push_back({"A", r.date, r.rf + 0.5 * r.mktrf, kNaN, kNaN});
  auto fit = carhart_fit(q, idx, dates.front(), dates.back());
  CHECK(fit.n_obs == 80);
  CHECK(std::abs(fit.alpha) < 1e-10);
  CHECK(std::abs(fit.betas[0] - 0.5) < 1e-8);
  for (int j = 1; j < 4; ++j) CHECK(std::abs(fit.betas[static_cast<std::size_t>(j)]) < 1e-8);

  for (auto& x : q) x.ret += 0.002;
  CHECK(carhart_fit(q, idx, dates.front(), dates.back()).alpha == doctest::Approx(0.002).epsilon(1e-8));
  CHECK_THROWS_AS(carhart_fit(q, idx, dates.front(), dates[10]), InvalidArgument);

  auto flat = f;
  for (auto& r : flat) r.smb = 0;
  CHECK_THROWS_AS(carhart_fit(q, index_factors(flat), dates.front(), dates.back()), InvalidArgument);
}

TEST_CASE("buy-and-hold abnormal return") {
  std::vector<double> r{0.1, 0.2, 0.3}, er{0.05, 0.05, 0.05};
  double expect = 100 * (1.1 * 1.2 * 1.3 - std::pow(1.05, 3));
  CHECK(bhar(r, er) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bhar(r, er) == doctest::Approx(55.8375).epsilon(1e-10));
  std::vector<double> one{0.005}, zero{0.0};
  CHECK(bhar(one, zero) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bhar(r, r) == 0.0);
}

TEST_CASE("OLS agrees with the normal equations and names collinear columns") {
  Rng rng(8);
  Matrix X(50, 3);
  Vector y(50);
  for (int i = 0; i < 50; ++i) {
    X.row(i) << 1.0, rng.normal(), rng.normal();
    y(i) = 0.3 + 2 * X(i, 1) - X(i, 2) + rng.normal(0, 0.1);
  }
  auto fit = ols(X, y, {"c", "a", "b"});
  CHECK((fit.beta - oracle::normal_equations(X, y)).cwiseAbs().maxCoeff() < 1e-10);
  Vector planted = 2 * X.col(1);
  auto exact = ols(X, planted, {"c", "a", "b"});
  CHECK(exact.beta(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(exact.beta(0)) < 1e-12);
  CHECK(exact.r2 == doctest::Approx(1.0).epsilon(1e-12));

  Matrix D(50, 4);
  D << X, 3 * X.col(2);
  try {
    ols(D, y, {"c", "a", "b", "b3"});
    FAIL("expected a collinearity error");
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    CHECK(msg.find("b3") != std::string::npos);
    CHECK(msg.find("(with ") != std::string::npos);
  }
}

TEST_CASE("firm effects by demeaning match explicit firm dummies") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = panel_fixture(seed);
    auto fit = fe_regress(p.frame, spec({"firm"}, Cluster::none));
    Eigen::VectorXd b = oracle::normal_equations(oracle::with_group_dummies(p.X, p.firms), p.y);
    CHECK(fit.at("x1").coef == doctest::Approx(b(0)).epsilon(1e-8));
    CHECK(fit.at("x2").coef == doctest::Approx(b(1)).epsilon(1e-8));
    CHECK(fit.n_obs == 31);
  }
}

TEST_CASE("firm clustering matches the explicit sandwich") {
  auto p = panel_fixture(6);
  auto fit = fe_regress(p.frame, spec({}, Cluster::firm));
  Matrix X(p.X.rows(), 3);
  X << p.X, Vector::Ones(p.X.rows());
  Vector beta = oracle::normal_equations(X, p.y);
  Vector u = p.y - X * beta;
  Matrix V = oracle::cluster_sandwich(X, u, p.firms, 3);
  CHECK(fit.at("x1").se == doctest::Approx(std::sqrt(V(0, 0))).epsilon(1e-10));
  CHECK(fit.at("x2").se == doctest::Approx(std::sqrt(V(1, 1))).epsilon(1e-10));
  CHECK(fit.at("const").se == doctest::Approx(std::sqrt(V(2, 2))).epsilon(1e-10));
  CHECK(fit.n_clusters == 5);
  double t = fit.at("x1").t;
  CHECK(fit.at("x1").p == doctest::Approx(t_pvalue(t, 4)).epsilon(1e-12));
}

TEST_CASE("one cluster per row reduces to HC1") {
  Rng rng(9);
  const int n = 40;
  Matrix X(n, 2);
  Vector u(n);
  std::vector<std::string> own;
  for (int i = 0; i < n; ++i) {
    X.row(i) << 1.0, rng.normal();
    u(i) = rng.normal();
    own.push_back(std::to_string(i));
  }
  Matrix inv = (X.transpose() * X).inverse();
  Matrix a = cluster_covariance(X, u, inv, own, 2);
  Matrix b = hc1_covariance(X, u, inv);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adding a constant to the dependent variable leaves slopes unchanged") {
  auto p = panel_fixture(11);
  auto before = fe_regress(p.frame, spec({"firm", "month"}, Cluster::firm));
  for (auto& v : p.frame.num["y"]) v += 42;
  auto after = fe_regress(p.frame, spec({"firm", "month"}, Cluster::firm));
  CHECK(after.at("x1").coef == doctest::Approx(before.at("x1").coef).epsilon(1e-10));
  CHECK(after.at("x1").se == doctest::Approx(before.at("x1").se).epsilon(1e-8));
}

TEST_CASE("planted coefficient and listwise deletion") {
  auto p = panel_fixture(12);
  auto& y = p.frame.num["y"];
  const auto& x1 = p.frame.num["x1"];
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2 * x1[i];
  p.frame.num["x2"][3] = kNaN;
  auto fit = fe_regress(p.frame, spec({}, Cluster::none));
  CHECK(fit.at("x1").coef == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.n_dropped == 1);
  CHECK(fit.coefs[0].name == "x1");
}

TEST_CASE("collinear regressors are reported by name") {
  auto p = panel_fixture(13);
  p.frame.num["x3"] = p.frame.num["x1"];
  auto s = spec({}, Cluster::none);
  s.regressors.push_back("x3");
  try {
    fe_regress(p.frame, s);
    FAIL("expected a collinearity error");
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    CHECK(msg.find("x1") != std::string::npos);
    CHECK(msg.find("x3") != std::string::npos);
  }
  auto bad = spec({}, Cluster::none);
  bad.regressors.push_back("missing");
  CHECK_THROWS(fe_regress(p.frame, bad));
}

TEST_CASE("top share dummy") {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, kNaN};
  auto d = top_share_dummy(v, 0.1);
  CHECK(d[9] == 1);
  CHECK(d[8] == 0);
  CHECK(std::isnan(d[10]));
}

TEST_CASE("effect sizes") {
  CHECK(standardized_effect(-0.4423, 0.162) == doctest::Approx(-0.0716526).epsilon(1e-9));
  CHECK(standardized_effect(0.4359, 0.162, 3.8609) == doctest::Approx(0.0182893).epsilon(1e-5));
  double down = annualize_three_day(-0.07165);
  CHECK(down >= -0.060);
  CHECK(down <= -0.057);
  CHECK(annualize_three_day(0.07165) == doctest::Approx(std::pow(1.0007165, 84) - 1).epsilon(1e-12));
  CHECK(annualize_three_day(0.07165) == doctest::Approx(0.0620).epsilon(1e-2));
  CHECK(annualize_three_day(0) == 0.0);
}

TEST_CASE("significance stars") {
  CHECK(stars(0.005) == "***");
  CHECK(stars(0.03) == "**");
  CHECK(stars(0.07) == "*");
  CHECK(stars(0.2).empty());
  CHECK(t_pvalue(0, 10) == doctest::Approx(1.0));
  CHECK(t_pvalue(1.959964, 1e9) == doctest::Approx(0.05).epsilon(1e-5));
}

namespace {

aggregate::PanelRow prow(std::string firm, Date d0, double sentiment, double happy) {
  aggregate::PanelRow r;
  r.firm_id = std::move(firm);
  r.quarter_id = "2024Q1";
  r.announcement_key = r.firm_id + "|2024Q1";
  r.day0 = d0;
  r.sentiment_pre = sentiment;
  r.emo_pre = one_hot(Emotion::neutral);
  at(r.emo_pre, Emotion::happy) = happy;
  return r;
}

}  // namespace

TEST_CASE("long-short backtest on fixed quotes") {
  auto dates = business_days(Date(2024, 1, 1), 20);
  aggregate::TradingCalendar cal(dates);
  std::vector<corpus::DailyQuote> constant, crossed;
  for (const auto& d : dates)
    for (std::string f : {"L", "S"}) {
      constant.push_back({f, d, 0, 100, 100});
      crossed.push_back({f, d, 0, 101, 100});
    }
  std::vector<aggregate::PanelRow> panel{prow("L", dates[10], 0.9, 0.0), prow("S", dates[10], -0.5, 0.8)};
  PortfolioConfig one;
  one.deciles = 1;

  auto flat = portfolio_backtest(panel, constant, cal);
  for (double r : flat.daily) CHECK(r == 0.0);
  CHECK(flat.n_long == 1);
  CHECK(flat.n_short == 1);

  auto x = portfolio_backtest(panel, crossed, cal);
  CHECK(x.daily[10] == doctest::Approx(0.01 + 1.0 / 101).epsilon(1e-12));
  CHECK(x.daily[9] == doctest::Approx(x.daily[10]));
  CHECK(x.daily[12] == 0.0);
  double wealth = 1;
  for (std::size_t t = 0; t < x.daily.size(); ++t) {
    wealth *= 1 + x.daily[t];
    CHECK(x.cumulative[t] == doctest::Approx(wealth - 1).epsilon(1e-12));
  }

  auto idle = portfolio_backtest({}, crossed, cal);
  for (double r : idle.daily) CHECK(r == 0.0);
}

TEST_CASE("portfolio alpha regression") {
  auto dates = business_days(Date(2023, 3, 1), 60);
  auto f = random_factors(dates, 21);
  auto idx = index_factors(f);
  std::vector<double> r, c(dates.size(), 0.0004);
  for (const auto& x : f) r.push_back(0.5 * x.mktrf);
  auto fit = alpha_regression(dates, r, idx);
  CHECK(std::abs(fit.at("alpha").coef) < 1e-12);
  CHECK(fit.at("mktrf").coef == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(alpha_regression(dates, c, idx).at("alpha").coef == doctest::Approx(0.0004).epsilon(1e-10));
  auto swapped = dates;
  std::swap(swapped[3], swapped[4]);
  CHECK_THROWS_AS(alpha_regression(swapped, r, idx), InvalidArgument);
  auto extra = dates;
  extra.back() = Date(2030, 1, 1);
  CHECK_THROWS_AS(alpha_regression(extra, r, idx), InvalidArgument);
}
