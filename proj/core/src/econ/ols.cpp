#include <cmath>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "emopanel/econ.hpp"

namespace emopanel::econ {

OlsFit ols(const Matrix& X, const Vector& y, const std::vector<std::string>& names) {
  const auto n = X.rows(), k = X.cols();
  if (y.size() != n) throw InvalidArgument("ols: X and y row counts differ");
  if (static_cast<Eigen::Index>(names.size()) != k) throw InvalidArgument("ols: one name per column required");
  if (n <= k) throw InvalidArgument("ols: " + std::to_string(n) + " observations for " + std::to_string(k) + " parameters");
  if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("ols: non-finite data");

  // Scale columns so the rank threshold is unit-free.
  Vector scale = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < k; ++j)
    if (scale(j) == 0) throw InvalidArgument("ols: collinear columns: " + names[static_cast<std::size_t>(j)]);
  Matrix Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index r = qr.rank();
    Matrix basis(n, r);
    for (Eigen::Index i = 0; i < r; ++i) basis.col(i) = Xs.col(perm(i));
    Eigen::ColPivHouseholderQR<Matrix> bqr(basis);
    std::string bad;
    for (Eigen::Index j = r; j < k; ++j) {
      bad += (bad.empty() ? "" : "; ") + names[static_cast<std::size_t>(perm(j))];
      Vector c = bqr.solve(Vector(Xs.col(perm(j))));
      std::string with;
      for (Eigen::Index i = 0; i < r; ++i)
        if (std::abs(c(i)) > 1e-8) with += (with.empty() ? "" : ", ") + names[static_cast<std::size_t>(perm(i))];
      if (!with.empty()) bad += " (with " + with + ")";
    }
    throw InvalidArgument("ols: collinear columns: " + bad);
  }
  OlsFit fit;
  fit.beta = qr.solve(y).cwiseQuotient(scale);
  fit.resid = y - X * fit.beta;
  fit.xtx_inv = (X.transpose() * X).ldlt().solve(Matrix::Identity(k, k));
  const double sst = (y.array() - y.mean()).square().sum();
  fit.r2 = sst > 0 ? 1.0 - fit.resid.squaredNorm() / sst : kNaN;
  return fit;
}

Matrix hc1_covariance(const Matrix& X, const Vector& resid, const Matrix& xtx_inv) {
  const auto n = static_cast<double>(X.rows()), k = static_cast<double>(X.cols());
  Matrix meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
  return n / (n - k) * xtx_inv * meat * xtx_inv;
}

Matrix cluster_covariance(const Matrix& X, const Vector& resid, const Matrix& xtx_inv,
                          const std::vector<std::string>& clusters, std::size_t k) {
  if (static_cast<Eigen::Index>(clusters.size()) != X.rows())
    throw InvalidArgument("cluster_covariance: one cluster id per row required");
  std::map<std::string, Vector> scores;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    auto [it, fresh] = scores.try_emplace(clusters[static_cast<std::size_t>(i)], Vector::Zero(X.cols()));
    it->second.noalias() += X.row(i).transpose() * resid(i);
  }
  const auto G = static_cast<double>(scores.size());
  if (G < 2) throw InvalidArgument("cluster_covariance: need at least two clusters");
  Matrix meat = Matrix::Zero(X.cols(), X.cols());
  for (const auto& [g, s] : scores) meat.noalias() += s * s.transpose();
  const auto N = static_cast<double>(X.rows());
  const double c = G / (G - 1) * (N - 1) / (N - static_cast<double>(k));
  return c * xtx_inv * meat * xtx_inv;
}

double t_pvalue(double t, double df) {
  if (!std::isfinite(t) || !(df > 0)) return kNaN;
  boost::math::students_t dist(df);
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::string stars(double p) {
  if (!(p == p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

}  // namespace emopanel::econ
