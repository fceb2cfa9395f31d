/*
 * Copyright (c) 2026, SGKL developers.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sgkl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sgkl {

Graph::Graph(Matrix weights) : weights_(std::move(weights)) {
  const Index n = weights_.rows();
  require(n > 0 && weights_.cols() == n, "weight matrix must be square and non-empty");
  for (Index i = 0; i < n; ++i) {
    require(weights_(i, i) == 0.0, "weight matrix must have zero diagonal");
    for (Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      require(std::isfinite(w) && w >= 0.0, "weights must be finite and nonnegative");
      require(w == weights_(j, i), "weight matrix must be symmetric");
    }
  }
  const Vector deg = degrees();
  for (Index i = 0; i < n; ++i)
    if (!(deg(i) > 0.0)) fail(ErrorCode::invalid_argument, "isolated node " + std::to_string(i));
}

Matrix ObservedSignalSet::masked_values() const {
  return observed.select(values.array(), 0.0).matrix();
}

Vector ObservedSignalSet::masked_column(Index i) const {
  return observed.col(i).select(values.col(i).array(), 0.0).matrix();
}

void ObservedSignalSet::validate() const {
  require(values.rows() == observed.rows() && values.cols() == observed.cols(),
          "signal values and mask shapes differ");
  for (Index i = 0; i < signal_count(); ++i) {
    if (observed.col(i).count() == 0)
      fail(ErrorCode::invalid_argument, "signal " + std::to_string(i) + " has no observed entry");
    for (Index n = 0; n < node_count(); ++n)
      if (observed(n, i) && !std::isfinite(values(n, i)))
        fail(ErrorCode::invalid_argument, "observed entry is not finite");
  }
}

Graph build_knn_graph(const Matrix& coords, int k, double scale) {
  const Index n = coords.rows();
  require(k >= 1, "k must be at least 1");
  require(scale > 0.0, "scale must be positive");
  if (n <= k) fail(ErrorCode::invalid_argument, "k too large");

  Matrix dist2(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) dist2(i, j) = (coords.row(i) - coords.row(j)).squaredNorm();

  Matrix w = Matrix::Zero(n, n);
  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return dist2(i, a) < dist2(i, b) || (dist2(i, a) == dist2(i, b) && a < b);
    });
    for (int r = 0; r < k; ++r) {
      const Index j = order[static_cast<std::size_t>(r)];
      const double weight = std::exp(-dist2(i, j) / (scale * scale));
      w(i, j) = weight;
      w(j, i) = weight;
    }
  }
  return Graph(std::move(w));
}

Matrix normalized_laplacian(const Graph& g) {
  const Vector deg = g.degrees();
  const Vector inv_sqrt = deg.array().rsqrt().matrix();
  Matrix l = -(inv_sqrt.asDiagonal() * g.weights() * inv_sqrt.asDiagonal());
  l.diagonal().setOnes();
  return l;
}

SpectralDecomposition eigendecompose(const Matrix& laplacian) {
  require(laplacian.rows() == laplacian.cols(), "matrix must be square");
  const double asym = (laplacian - laplacian.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10, "matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) fail(ErrorCode::numerical, "eigendecomposition failed");

  SpectralDecomposition dec{solver.eigenvalues(), solver.eigenvectors()};
  for (Index c = 0; c < dec.eigenvectors.cols(); ++c) {
    Index arg = 0;
    dec.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (dec.eigenvectors(arg, c) < 0.0) dec.eigenvectors.col(c) *= -1.0;
  }
  return dec;
}

namespace {

// Squared restricted distance and the number of common observed nodes.
std::pair<double, Index> restricted_distance2(const ObservedSignalSet& obs, Index i, Index j) {
  double d2 = 0.0;
  Index common = 0;
  for (Index n = 0; n < obs.node_count(); ++n) {
    if (obs.observed(n, i) && obs.observed(n, j)) {
      const double diff = obs.values(n, i) - obs.values(n, j);
      d2 += diff * diff;
      ++common;
    }
  }
  return {d2, common};
}

}  // namespace

double median_signal_distance(const ObservedSignalSet& obs, bool normalize_by_common_count) {
  std::vector<double> d;
  const Index k = obs.signal_count();
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      auto [d2, common] = restricted_distance2(obs, i, j);
      if (common == 0) continue;
      if (normalize_by_common_count) d2 /= static_cast<double>(common);
      d.push_back(std::sqrt(d2));
    }
  }
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
  return median > 0.0 ? median : 1.0;
}

SignalGraphLaplacian build_signal_graph(const ObservedSignalSet& obs,
                                        const SignalGraphOptions& options) {
  const double gamma = options.gamma.value_or(
      median_signal_distance(obs, options.normalize_by_common_count));
  require(gamma > 0.0, "gamma must be positive");

  const Index k = obs.signal_count();
  SignalGraphLaplacian sg;
  sg.gamma = gamma;
  sg.affinity = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      auto [d2, common] = restricted_distance2(obs, i, j);
      if (common == 0) continue;  // no shared evidence, no coupling
      if (options.normalize_by_common_count) d2 /= static_cast<double>(common);
      const double w = std::exp(-d2 / (gamma * gamma));
      sg.affinity(i, j) = w;
      sg.affinity(j, i) = w;
    }
  }
  sg.laplacian = -sg.affinity;
  sg.laplacian.diagonal() = sg.affinity.rowwise().sum();
  return sg;
}

Matrix coupling_matrix(const SignalGraphLaplacian& sg, SignalLaplacianKind kind) {
  if (kind == SignalLaplacianKind::combinatorial) return sg.laplacian;
  const Vector deg = sg.affinity.rowwise().sum();
  const Index k = deg.size();
  Vector inv_sqrt(k);
  for (Index i = 0; i < k; ++i) inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Matrix c = -(inv_sqrt.asDiagonal() * sg.affinity * inv_sqrt.asDiagonal());
  for (Index i = 0; i < k; ++i) c(i, i) = deg(i) > 0.0 ? 1.0 : 0.0;
  return c;
}

}  // namespace sgkl
