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

#pragma once

#include "sgkl/common.hpp"

#include <optional>

namespace sgkl {

/// Weighted undirected graph stored as a dense symmetric weight matrix.
class Graph {
 public:
  /// Validates symmetry, nonnegativity, zero diagonal and positive degrees.
  explicit Graph(Matrix weights);

  Index node_count() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }
  Vector degrees() const { return weights_.rowwise().sum(); }

 private:
  Matrix weights_;
};

struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns

  Index size() const { return eigenvalues.size(); }
};

/// Partially observed signals on one graph. Entries where the mask is false
/// carry no meaning; loaders store NaN there.
struct ObservedSignalSet {
  Matrix values;        // N x K
  MaskMatrix observed;  // N x K

  Index node_count() const { return values.rows(); }
  Index signal_count() const { return values.cols(); }
  /// Observed entries kept, everything else zero.
  Matrix masked_values() const;
  Vector masked_column(Index i) const;
  void validate() const;
};

struct SignalGraphLaplacian {
  Matrix laplacian;  // diag(W 1) - W
  Matrix affinity;   // W, entries in [0, 1], zero diagonal
  double gamma = 1.0;
};

/// Which matrix the coefficient coupling term uses.
enum class SignalLaplacianKind {
  normalized,     // I - D^{-1/2} W D^{-1/2}, unit diagonal on non-isolated signals
  combinatorial,  // diag(W 1) - W
};

struct SignalGraphOptions {
  std::optional<double> gamma;  // median heuristic when empty
  bool normalize_by_common_count = false;
};

/// k-NN graph over the rows of `coords` (N x d), symmetrized by union, with
/// Gaussian weights exp(-|p_i - p_j|^2 / scale^2).
Graph build_knn_graph(const Matrix& coords, int k, double scale);

/// Gamma^{-1/2} (Gamma - W) Gamma^{-1/2}.
Matrix normalized_laplacian(const Graph& g);

/// Symmetric eigendecomposition, ascending eigenvalues, and the sign of each
/// eigenvector fixed so that its largest-magnitude entry is positive.
SpectralDecomposition eigendecompose(const Matrix& laplacian);

/// Median of the restricted pairwise distances |y_i[Q] - y_j[Q]| over pairs
/// sharing at least one observed node. Returns 1 when no such pair exists or
/// every distance is zero.
double median_signal_distance(const ObservedSignalSet& obs,
                              bool normalize_by_common_count = false);

SignalGraphLaplacian build_signal_graph(const ObservedSignalSet& obs,
                                        const SignalGraphOptions& options = {});

/// K x K matrix used by the coupling regularizer tr(X C X^T).
Matrix coupling_matrix(const SignalGraphLaplacian& sg, SignalLaplacianKind kind);

}  // namespace sgkl
