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

#include "oracles.hpp"

#include "sgkl/dictionary.hpp"
#include "sgkl/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>

namespace fixtures {

using sgkl::Index;
using sgkl::Matrix;
using sgkl::Vector;

// Small random problem: k-NN graph, random kernels, sparse coefficients,
// noisy partially observed signals.
struct Instance {
  sgkl::Graph graph;
  Matrix laplacian;
  std::shared_ptr<const sgkl::SpectralDecomposition> dec;
  sgkl::KernelParamVector psi;
  sgkl::ObservedSignalSet obs;
  Matrix x_true;
};

inline Instance make_instance(Index n, Index kernels, Index signals, std::uint64_t seed,
                              double missing = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  sgkl::Graph g = sgkl::build_knn_graph(oracle::uniform_coords(n, seed + 101),
                                        static_cast<int>(std::min<Index>(4, n - 1)), 0.5);
  Matrix l = sgkl::normalized_laplacian(g);
  auto dec = std::make_shared<const sgkl::SpectralDecomposition>(sgkl::eigendecompose(l));

  Vector mu(kernels), s(kernels);
  for (Index j = 0; j < kernels; ++j) {
    mu(j) = 2.0 * u(rng);
    s(j) = 0.2 + 0.6 * u(rng);
  }
  sgkl::KernelParamVector psi(mu, s);

  Matrix x = Matrix::Zero(kernels * n, signals);
  for (Index i = 0; i < signals; ++i)
    for (Index r = 0; r < x.rows(); ++r)
      if (u(rng) < 0.25) x(r, i) = normal(rng);
  const sgkl::Dictionary dict(dec, psi);
  Matrix y = dict.apply(x);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] += 0.05 * normal(rng);

  sgkl::MaskMatrix obs(n, signals);
  for (Index i = 0; i < signals; ++i) {
    for (Index a = 0; a < n; ++a) obs(a, i) = u(rng) >= missing;
    obs(static_cast<Index>(u(rng) * n) % n, i) = true;
  }
  return {std::move(g), std::move(l), std::move(dec), std::move(psi), {y, obs}, std::move(x)};
}

}  // namespace fixtures
