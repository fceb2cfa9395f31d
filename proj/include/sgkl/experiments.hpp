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
#include "sgkl/dictionary.hpp"
#include "sgkl/graph.hpp"
#include "sgkl/learner.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sgkl {

/// Generative setup for synthetic multi-graph data.
struct SyntheticSetup {
  std::vector<Index> nodes{100, 100};     // one entry per graph
  std::vector<Index> signals{200, 400};   // K per graph
  int knn = 10;
  double knn_scale = 0.2;  // Gaussian weight scale; node positions are uniform in [0,1]^2
  Index kernels = 4;       // J of the generating model

  // Ground-truth kernels: given explicitly, or drawn once from normals.
  std::optional<KernelParamVector> psi;
  double mu_mean = 0.2;
  double mu_std = 0.2;
  double scale_mean = 0.4;
  double scale_std = 0.02;

  Index sparsity = 40;          // nonzeros per coefficient column
  double coefficient_scale = 1.0;  // std of the nonzero coefficients
  std::optional<double> snr_db; // noiseless when empty
  double missing_ratio = 0.2;

  /// Graphs after the first get psi + delta_psi * direction, the direction
  /// drawn uniformly on the 2J-sphere from the run seed.
  double delta_psi = 0.0;

  std::uint64_t structure_seed = 1;  // graphs and ground-truth kernels
  std::uint64_t seed = 0;            // coefficients, noise, masks, perturbation

  Index graph_count() const { return static_cast<Index>(nodes.size()); }
  void validate() const;
};

struct SyntheticGraph {
  Matrix coords;
  Graph graph;
  KernelParamVector psi;  // generating kernels on this graph
  Matrix coefficients;    // X*
  Matrix clean;           // D X*
  Matrix noisy;           // clean + noise
  MaskMatrix observed;
  double noise_sigma = 0.0;

  ObservedSignalSet observed_signals() const;
};

struct SyntheticData {
  KernelParamVector psi;  // reference kernels (graph 0)
  std::vector<SyntheticGraph> graphs;

  std::vector<GraphInput> inputs() const;
};

SyntheticData generate_synthetic(const SyntheticSetup& setup);

/// Hides exactly round(ratio * N) uniformly chosen nodes of every signal.
MaskMatrix apply_mask(Index nodes, Index signals, double missing_ratio, std::uint64_t seed);

/// |y_missing - yhat_missing|^2 / |y_missing|^2 over the entries where the
/// mask is false.
double nmse(const Matrix& truth, const Matrix& estimate, const MaskMatrix& observed);

/// Fills each signal's missing entries with the mean of its observed entries.
Matrix mean_fill(const ObservedSignalSet& obs);

/// Mixes a base seed with a stream id into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct ExperimentConfig {
  SgklConfig learner;
  SyntheticSetup synthetic;
};

/// One (grid value, seed, graph) outcome.
struct RunRecord {
  std::string parameter;
  double value = 0.0;
  std::string regime = "joint";
  double signals = 0.0;  // K of the run (per graph)
  double delta_psi = 0.0;
  std::uint64_t seed = 0;
  Index graph = 0;
  double nmse = 0.0;
  double baseline_nmse = 0.0;  // mean fill
  double runtime_s = 0.0;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  int outer_iterations = 0;
  std::string config_hash;

  bool operator==(const RunRecord&) const = default;
};

struct AggregateRecord {
  std::string parameter;
  double value = 0.0;
  std::string regime;
  double signals = 0.0;
  double delta_psi = 0.0;
  Index graph = 0;
  std::size_t count = 0;
  double nmse_mean = 0.0;
  double nmse_std = 0.0;
  double baseline_mean = 0.0;
};

struct ThresholdPoint {
  double delta_psi = 0.0;
  double threshold_k = 0.0;  // 0 when joint never wins
  bool operator==(const ThresholdPoint&) const = default;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::vector<ThresholdPoint> thresholds;

  /// Mean and std per (parameter, value, regime, K, delta, graph), in order
  /// of first appearance.
  std::vector<AggregateRecord> aggregates() const;
};

/// Short stable hash of a JSON-serializable experiment configuration.
std::string config_hash(const ExperimentConfig& cfg);

/// Fits once and scores every graph.
std::vector<RunRecord> run_cell(const ExperimentConfig& cfg, const std::string& parameter,
                                double value);

/// parameter: snr, J, eta_s, eta_x, eta_w, eta_y or eta_c.
ExperimentReport run_sensitivity_sweep(const std::string& parameter,
                                       const std::vector<double>& grid,
                                       const ExperimentConfig& base,
                                       const std::vector<std::uint64_t>& seeds, unsigned jobs = 1);

/// Reference-graph NMSE of joint (both graphs) and individual (graph 0 only)
/// learning over a (delta_psi, K) grid, plus the threshold curve.
ExperimentReport run_joint_vs_individual(const std::vector<double>& deltas,
                                         const std::vector<Index>& ks, const ExperimentConfig& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         unsigned jobs = 1);

/// Largest K whose smoothed, seed-averaged joint NMSE is at most the
/// individual one; 0 when there is none. Curves are smoothed with a centered
/// 3-point moving average (2 points at the ends).
double threshold_k(const std::vector<double>& ks, const std::vector<double>& joint,
                   const std::vector<double>& individual);

std::vector<double> moving_average3(const std::vector<double>& v);

}  // namespace sgkl
