#pragma once

#include <cstdint>
#include <string>
#include <vector>

/// Closed-form prices of the one-period investor-emotion model.
namespace emopanel::toy {

struct ToyParams {
  double m = 1.0;        // mean dividend
  double m_tilde = 1.0;  // mean dividend of the other asset; enters no price formula
  int n = 1;             // number of stocks
  double rho = 1.0;      // risk aversion
  double sigma_i2 = 0.04, sigma_a2 = 0.02;  // idiosyncratic and aggregate shock variances
  double sigma_1_2 = 0.04, sigma_2_2 = 0.02;  // signal-noise variances
  double eta = 0.0;      // emotional overweighting of the mean, in (-1, 1)

  /// Throws InvalidArgument on inadmissible values.
  void validate() const;
};

struct Signals {
  double s1 = 0, s2 = 0;
};

struct Gammas {
  double g1 = 0, g2 = 0;
};

struct Normal {
  double mean = 0, var = 0;
};

/// g1 = s_i^2 / (s_i^2 + s_1^2), g2 = s_a^2 / (s_a^2 + s_2^2).
Gammas gamma(const ToyParams& p);
/// Posterior of the total shock given the signals.
Normal posterior(const ToyParams& p, const Signals& s);

/// m - rho (s_i^2 / n + s_a^2).
double price_q0_bayes(const ToyParams& p);
/// m + g1 s1 + g2 s2 - rho ((1 - g1) s_i^2 / n + (1 - g2) s_a^2).
double price_q1_bayes(const ToyParams& p, const Signals& s);
/// m (1 + eta) - rho (s_i^2 / n + s_a^2).
double price_q0_em(const ToyParams& p);

/// (q0_bayes - q1) - (q0_em - q1), which equals -eta m.
double delta_comparative(const ToyParams& p, const Signals& s);

struct MonteCarloPosterior {
  double empirical_mean = 0;  // regression-implied E[e_a + e_i | s]
  double se = 0;              // standard error of that prediction
  double analytic_mean = 0;   // g1 s1 + g2 s2
  std::size_t draws = 0;
};

/// Simulates (shocks, signals), regresses the total shock on the signals and
/// evaluates the fitted conditional mean at `s`.
MonteCarloPosterior monte_carlo_posterior(const ToyParams& p, const Signals& s, std::size_t draws,
                                          std::uint64_t seed);

struct SweepRow {
  double eta = 0;
  double q0_bayes = 0, q1_bayes = 0, q0_em = 0, delta = 0;
};

std::vector<SweepRow> sweep_eta(const ToyParams& p, const Signals& s, const std::vector<double>& etas);
/// Evenly spaced grid of `points` values over [lo, hi].
std::vector<double> eta_grid(double lo, double hi, std::size_t points);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace emopanel::toy
