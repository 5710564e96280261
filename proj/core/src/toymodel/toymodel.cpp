#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "emopanel/common.hpp"
#include "emopanel/toymodel.hpp"

namespace emopanel::toy {

void ToyParams::validate() const {
  if (n < 1) throw InvalidArgument("toy: n must be >= 1");
  if (rho < 0) throw InvalidArgument("toy: rho must be >= 0");
  if (!(sigma_i2 >= 0 && sigma_a2 >= 0 && sigma_1_2 >= 0 && sigma_2_2 >= 0))
    throw InvalidArgument("toy: variances must be non-negative");
  if (!(eta > -1 && eta < 1)) throw InvalidArgument("toy: eta must lie in (-1, 1)");
  if (!std::isfinite(m) || !std::isfinite(m_tilde)) throw InvalidArgument("toy: means must be finite");
}

Gammas gamma(const ToyParams& p) {
  p.validate();
  const double d1 = p.sigma_i2 + p.sigma_1_2, d2 = p.sigma_a2 + p.sigma_2_2;
  if (!(d1 > 0) || !(d2 > 0)) throw InvalidArgument("toy: signal variance is zero");
  return {p.sigma_i2 / d1, p.sigma_a2 / d2};
}

Normal posterior(const ToyParams& p, const Signals& s) {
  auto g = gamma(p);
  return {g.g1 * s.s1 + g.g2 * s.s2, (1 - g.g1) * p.sigma_i2 + (1 - g.g2) * p.sigma_a2};
}

double price_q0_bayes(const ToyParams& p) {
  p.validate();
  return p.m - p.rho * (p.sigma_i2 / p.n + p.sigma_a2);
}

double price_q1_bayes(const ToyParams& p, const Signals& s) {
  auto g = gamma(p);
  return p.m + g.g1 * s.s1 + g.g2 * s.s2 - p.rho * ((1 - g.g1) * p.sigma_i2 / p.n + (1 - g.g2) * p.sigma_a2);
}

double price_q0_em(const ToyParams& p) {
  p.validate();
  return p.m * (1 + p.eta) - p.rho * (p.sigma_i2 / p.n + p.sigma_a2);
}

double delta_comparative(const ToyParams& p, const Signals& s) {
  const double q1 = price_q1_bayes(p, s);
  return (price_q0_bayes(p) - q1) - (price_q0_em(p) - q1);
}

MonteCarloPosterior monte_carlo_posterior(const ToyParams& p, const Signals& s, std::size_t draws,
                                          std::uint64_t seed) {
  if (draws < 10) throw InvalidArgument("monte_carlo_posterior: need at least 10 draws");
  auto g = gamma(p);
  Rng rng(seed);
  Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
  Eigen::Vector3d xty = Eigen::Vector3d::Zero();
  double yy = 0;
  const double si = std::sqrt(p.sigma_i2), sa = std::sqrt(p.sigma_a2);
  const double n1 = std::sqrt(p.sigma_1_2), n2 = std::sqrt(p.sigma_2_2);
  for (std::size_t k = 0; k < draws; ++k) {
    const double ei = si * rng.normal(), ea = sa * rng.normal();
    const Eigen::Vector3d x(1.0, ei + n1 * rng.normal(), ea + n2 * rng.normal());
    const double y = ea + ei;
    xtx.noalias() += x * x.transpose();
    xty += x * y;
    yy += y * y;
  }
  const Eigen::Matrix3d inv = xtx.inverse();
  const Eigen::Vector3d beta = inv * xty;
  const double ssr = std::max(0.0, yy - beta.dot(xty));
  const double s2 = ssr / static_cast<double>(draws - 3);
  const Eigen::Vector3d x0(1.0, s.s1, s.s2);
  MonteCarloPosterior out;
  out.empirical_mean = beta.dot(x0);
  out.se = std::sqrt(std::max(0.0, s2 * x0.dot(inv * x0)));
  out.analytic_mean = g.g1 * s.s1 + g.g2 * s.s2;
  out.draws = draws;
  return out;
}

std::vector<SweepRow> sweep_eta(const ToyParams& p, const Signals& s, const std::vector<double>& etas) {
  std::vector<SweepRow> rows;
  for (double e : etas) {
    ToyParams q = p;
    q.eta = e;
    rows.push_back({e, price_q0_bayes(q), price_q1_bayes(q, s), price_q0_em(q), delta_comparative(q, s)});
  }
  return rows;
}

std::vector<double> eta_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw InvalidArgument("eta_grid: need at least one point");
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "eta,q0_bayes,q1_bayes,q0_em,delta\n";
  for (const auto& r : rows)
    out << format_double(r.eta) << ',' << format_double(r.q0_bayes) << ',' << format_double(r.q1_bayes) << ','
        << format_double(r.q0_em) << ',' << format_double(r.delta) << '\n';
}

}  // namespace emopanel::toy
