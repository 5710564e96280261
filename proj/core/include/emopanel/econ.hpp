#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emopanel/aggregate.hpp"
#include "emopanel/common.hpp"
#include "emopanel/corpus.hpp"

/// Event-study abnormal returns, fixed-effects regressions with clustered
/// covariance, effect-size arithmetic and the decile long-short backtest.
namespace emopanel::econ {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Least squares

struct OlsFit {
  Vector beta;
  Vector resid;
  Matrix xtx_inv;
  double r2 = kNaN;
};

/// Throws InvalidArgument naming the collinear columns when X lacks full
/// column rank, and when there are no more rows than columns.
OlsFit ols(const Matrix& X, const Vector& y, const std::vector<std::string>& names);

/// (X'X)^-1 X' diag(u^2) X (X'X)^-1 scaled by n/(n-k).
Matrix hc1_covariance(const Matrix& X, const Vector& resid, const Matrix& xtx_inv);

/// Cluster sandwich sum_g X_g' u_g u_g' X_g with the G/(G-1) (N-1)/(N-K)
/// correction; `k` is the column count used in N-K.
Matrix cluster_covariance(const Matrix& X, const Vector& resid, const Matrix& xtx_inv,
                          const std::vector<std::string>& clusters, std::size_t k);

/// Two-sided p-value of a t statistic.
double t_pvalue(double t, double df);
/// "***", "**", "*" at 1/5/10 percent, else "".
std::string stars(double p);

// ---------------------------------------------------------------------------
// Four-factor event study

using FactorIndex = std::map<Date, corpus::FactorRow>;
FactorIndex index_factors(const std::vector<corpus::FactorRow>& factors);

struct FactorFit {
  double alpha = 0;
  std::array<double, 4> betas{};  // mktrf, smb, hml, umd
  Date start, end;
  std::size_t n_obs = 0;
};

/// OLS of ret - rf on the four factors with an intercept over the quotes
/// dated in [start, end]. Throws InvalidArgument below `min_obs` usable days
/// or on a rank-deficient design.
FactorFit carhart_fit(std::span<const corpus::DailyQuote> quotes, const FactorIndex& factors, Date start, Date end,
                      std::size_t min_obs = 30);

/// 100 (prod(1 + R) - prod(1 + ER)).
double bhar(std::span<const double> realized, std::span<const double> expected);

/// Expected return rf + alpha + beta'f on one day.
double expected_return(const FactorFit& fit, const corpus::FactorRow& f);

/// BHAR over the listed dates; NaN when a quote or factor row is missing.
double bhar(const std::map<Date, double>& returns, const FactorIndex& factors, const FactorFit& fit,
            const std::vector<Date>& dates);

struct EventStudyConfig {
  aggregate::Window estimation{-250, -21};
  std::size_t min_obs = 30;
  std::array<aggregate::Window, 3> windows{{{-1, 1}, {2, 4}, {-10, -2}}};
};

struct EventStudyRow {
  std::string announcement_key;
  std::string firm_id;
  Date day0;
  std::optional<FactorFit> fit;  // absent when estimation failed
  std::array<double, 3> exret{kNaN, kNaN, kNaN};
  std::string note;
};

std::vector<EventStudyRow> event_study(const std::vector<corpus::Announcement>& announcements,
                                       const std::vector<corpus::DailyQuote>& quotes, const FactorIndex& factors,
                                       const aggregate::TradingCalendar& calendar,
                                       const EventStudyConfig& config = {});

aggregate::ExretMap to_exret_map(const std::vector<EventStudyRow>& rows);
void write_event_study_csv(const std::string& path, const std::vector<EventStudyRow>& rows,
                           const EventStudyConfig& config = {});

// ---------------------------------------------------------------------------
// Fixed-effects regression

/// Numeric columns and categorical keys over the same rows.
struct Frame {
  std::size_t n = 0;
  std::map<std::string, std::vector<double>> num;
  std::map<std::string, std::vector<std::string>> keys;

  const std::vector<double>& column(const std::string& name) const;
  const std::vector<std::string>& key(const std::string& name) const;
};

/// Panel columns plus the keys firm, year, month, dow, industry_quarter and
/// quarter, and `high_volatility` (top decile of volatility).
Frame frame_from_panel(const std::vector<aggregate::PanelRow>& rows);

/// 1 for observations above the nearest-rank (1 - share) quantile of
/// `column`, 0 otherwise, NaN where the column is missing.
std::vector<double> top_share_dummy(const std::vector<double>& column, double share = 0.1);

enum class Cluster { firm, industry_quarter, none };
std::string_view to_string(Cluster c);
Cluster parse_cluster(std::string_view s);

struct RegressionSpec {
  std::string name;
  std::string dependent;
  std::vector<std::string> regressors;
  std::vector<std::pair<std::string, std::string>> interactions;  // named "a:b"
  std::vector<std::string> fixed_effects;                          // subset of firm, year, month, dow
  Cluster cluster = Cluster::firm;

  void validate(const Frame& frame) const;
};

struct Coefficient {
  std::string name;
  double coef = 0, se = 0, t = 0, p = 0;
};

struct FitResult {
  std::string spec;
  std::vector<Coefficient> coefs;  // regressors and interactions first, then dummies
  double r2 = kNaN, adj_r2 = kNaN;
  std::size_t n_obs = 0, n_dropped = 0, n_clusters = 0, n_singletons = 0;
  double within_sd_dep = kNaN;
  std::vector<std::string> absorbed;  // dummies dropped for adding no rank
  Matrix vcov;

  const Coefficient& at(const std::string& name) const;
};

/// Listwise deletion, firm effects by within-demeaning, year/month/dow
/// effects as drop-first dummies, OLS, cluster-robust (or HC1) covariance.
FitResult fe_regress(const Frame& frame, const RegressionSpec& spec);

/// Emotion regressors of the announcement-return design.
std::vector<std::string> emotion_regressors(const std::string& suffix = "_pre");

/// Announcement returns, drift, SUE, sentiment and interaction designs.
std::vector<RegressionSpec> standard_specs();

/// spec,regressor,coef,se,t,p,stars,n_obs,adj_r2,within_sd_dep
void write_regression_table(const std::string& path, const std::vector<FitResult>& fits);

// ---------------------------------------------------------------------------
// Effect sizes

/// coef * sd_regressor, divided by sd_dependent when given.
double standardized_effect(double coef, double sd_regressor, std::optional<double> sd_dependent = std::nullopt);
/// (1 + effect/100)^(252/3) - 1, as a fraction.
double annualize_three_day(double effect_percent);

// ---------------------------------------------------------------------------
// Long-short backtest

struct PortfolioConfig {
  std::size_t deciles = 10;
  aggregate::Window hold{-1, 1};
};

struct PortfolioResult {
  std::vector<Date> dates;
  std::vector<double> daily;       // zero on idle days
  std::vector<double> cumulative;  // compounded
  std::size_t n_long = 0, n_short = 0, n_skipped = 0;
};

/// Within each quarter, long the top sentiment decile and short the top happy
/// decile over the holding window. Long legs earn (bid_t - ask_{t-1}) / ask_{t-1},
/// short legs -(ask_t - bid_{t-1}) / bid_{t-1}; the daily return is the sum of
/// the equal-weighted leg means.
PortfolioResult portfolio_backtest(const std::vector<aggregate::PanelRow>& panel,
                                   const std::vector<corpus::DailyQuote>& quotes,
                                   const aggregate::TradingCalendar& calendar, const PortfolioConfig& config = {});

/// OLS of the daily returns on the four factors with HC1 errors. Dates must
/// be strictly increasing and present in `factors`; at least 30 days.
FitResult alpha_regression(const std::vector<Date>& dates, const std::vector<double>& returns,
                           const FactorIndex& factors);

void write_portfolio_csv(const std::string& path, const PortfolioResult& result);

}  // namespace emopanel::econ
