#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emopanel/bigru.hpp"

// Reference computations written independently of the library code paths
// they check: brute force, finite differences, explicit dummy matrices.
namespace emopanel::oracle {

struct GroupError {
  std::string name;
  double relative = 0;  // ||analytic - numeric|| / (||analytic|| + ||numeric||)
  double max_abs = 0;
};

/// Central differences of the loss over every scalar of every tensor.
inline std::vector<GroupError> gradient_check(bigru::ModelParams params, const text::TokenSequence& seq,
                                              std::size_t target, const bigru::Matrix* mask, double step) {
  bigru::ForwardCache cache;
  bigru::forward(seq, params, &cache, mask);
  auto grads = bigru::backward(cache, params, target);
  auto embed = grads.embed_dense(params.vocab_size(), params.embed_dim());

  auto tensors = params.tensors();
  auto analytic = grads.dense.tensors();
  std::vector<GroupError> out;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    bigru::Matrix& M = *tensors[k].second;
    const bigru::Matrix& A = tensors[k].first == "E" ? embed : *analytic[k].second;
    bigru::Matrix N(M.rows(), M.cols());
    for (Eigen::Index i = 0; i < M.size(); ++i) {
      double orig = M.data()[i];
      M.data()[i] = orig + step;
      double up = bigru::loss(bigru::forward(seq, params, nullptr, mask), target);
      M.data()[i] = orig - step;
      double down = bigru::loss(bigru::forward(seq, params, nullptr, mask), target);
      M.data()[i] = orig;
      N.data()[i] = (up - down) / (2 * step);
    }
    GroupError e;
    e.name = tensors[k].first;
    double diff = (A - N).norm(), scale = A.norm() + N.norm();
    e.relative = scale > 0 ? diff / scale : diff;
    e.max_abs = (A - N).cwiseAbs().maxCoeff();
    out.push_back(e);
  }
  return out;
}

/// Shapley values by averaging marginal contributions over all n! orderings
/// of the first `n` positions; positions outside a coalition become PAD.
template <typename F>
std::vector<double> shapley_by_permutations(const F& value, const text::TokenSequence& seq) {
  const std::size_t n = seq.true_length;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(n, 0.0);
  double count = 0;
  do {
    auto cur = seq;
    for (std::size_t i = 0; i < n; ++i) cur.ids[i] = text::kPad;
    double prev = value(cur);
    for (std::size_t p : order) {
      cur.ids[p] = seq.ids[p];
      double next = value(cur);
      phi[p] += next - prev;
      prev = next;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

/// OLS by normal equations solved with a full-pivot LU.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::MatrixXd xtx = X.transpose() * X;
  return xtx.fullPivLu().solve(X.transpose() * y);
}

/// X with one 0/1 column per level of `groups` (all levels, no intercept).
inline Eigen::MatrixXd with_group_dummies(const Eigen::MatrixXd& X, const std::vector<std::string>& groups) {
  std::map<std::string, Eigen::Index> level;
  for (const auto& g : groups) level.emplace(g, 0);
  Eigen::Index k = 0;
  for (auto& [g, idx] : level) idx = k++;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), X.cols() + k);
  out.leftCols(X.cols()) = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i, X.cols() + level.at(groups[static_cast<std::size_t>(i)])) = 1;
  return out;
}

/// Cluster-robust sandwich with the small-sample factor, summing scores
/// group by group in explicit loops.
inline Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                                        const std::vector<std::string>& groups, double n_params) {
  const Eigen::Index k = X.cols();
  std::map<std::string, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    auto& s = scores.try_emplace(groups[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k)).first->second;
    for (Eigen::Index j = 0; j < k; ++j) s(j) += X(i, j) * u(i);
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [g, s] : scores)
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) meat(a, b) += s(a) * s(b);
  Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  double G = static_cast<double>(scores.size()), N = static_cast<double>(X.rows());
  double c = G / (G - 1) * (N - 1) / (N - n_params);
  return c * bread * meat * bread;
}

}  // namespace emopanel::oracle
