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
#include "sgkl/kernel_optimizer.hpp"
#include "sgkl/sparse_coder.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sgkl {

struct SgklConfig {
  Index kernels = 4;
  double eta_s = 1e8;
  double eta_x = 500.0;
  double eta_w = 1e5;
  double eta_y = 1e2;
  double eta_c = 1e3;
  double nominal_scale = 0.4;

  std::optional<double> gamma;  // median heuristic per graph when empty
  bool gamma_normalize_by_common_count = false;
  SignalLaplacianKind signal_laplacian = SignalLaplacianKind::normalized;

  AdmmConfig admm;  // weights are taken from the fields above
  DescentConfig descent;

  int outer_max_iters = 100;
  double outer_tol = 1e-5;
  std::uint64_t seed = 0;
  double mu_lo = 0.0;
  double mu_hi = 2.0;
  double scale_lo_factor = 0.5;  // s ~ U[lo * s_0, hi * s_0]
  double scale_hi_factor = 1.5;

  AdmmConfig admm_config() const;
  KernelPrior prior() const { return {nominal_scale, eta_s}; }
  void validate() const;
};

struct GraphInput {
  Graph graph;
  ObservedSignalSet signals;
};

/// Everything the learner keeps per graph.
struct GraphState {
  std::shared_ptr<const SpectralDecomposition> dec;
  Matrix laplacian;
  ObservedSignalSet obs;
  SignalGraphLaplacian signal_graph;
  Matrix coupling;  // matrix used by the coupling term
  std::shared_ptr<const Dictionary> dict;
  Matrix x;      // JN x K
  Matrix duals;  // ADMM warm starts
};

struct ObjectiveBreakdown {
  double mu_prior = 0.0;
  double scale_prior = 0.0;
  double sparsity = 0.0;    // eta_x |X|_1
  double fidelity = 0.0;    // eta_w weighted
  double smoothness = 0.0;  // eta_y weighted
  double coupling = 0.0;    // eta_c weighted

  double total() const {
    return mu_prior + scale_prior + sparsity + fidelity + smoothness + coupling;
  }
  /// The part the kernel update minimizes (no l1 and no coupling term).
  double kernel_part() const { return mu_prior + scale_prior + fidelity + smoothness; }
};

struct TraceEntry {
  int outer = 0;
  std::string stage;  // "init", "psi" or "x"
  double objective = 0.0;
  double kernel_objective = 0.0;
};

struct SgklModel {
  SgklConfig config;
  KernelParamVector psi;
  std::vector<GraphState> graphs;
  std::vector<TraceEntry> trace;
  std::vector<DescentStep> descent_trace;  // all kernel steps, in order
  int outer_iterations = 0;
  bool converged = false;
};

ObjectiveBreakdown objective_breakdown(const SgklModel& model);
double total_objective(const SgklModel& model);

/// Per-graph preparation: Laplacian, eigendecomposition, signal graph.
GraphState prepare_graph(const GraphInput& input, const SgklConfig& cfg);

/// Uniform draw from the configured initialization box.
KernelParamVector draw_initial_psi(const SgklConfig& cfg);

/// Alternating kernel / coefficient minimization. When `resume` is given, its
/// kernels and coefficients replace the random initialization.
SgklModel fit(const std::vector<GraphInput>& data, const SgklConfig& cfg,
              const SgklModel* resume = nullptr);

/// D^m(psi) X^m.
Matrix reconstruct(const SgklModel& model, Index graph);

struct InductiveResult {
  Matrix coefficients;    // JN x K_test
  Matrix reconstruction;  // N x K_test
  int sweeps = 0;
};

/// Codes new signals on graph `graph` with the learned kernels frozen. The
/// signal graph is rebuilt over training and test signals (training gamma),
/// training columns stay fixed and test columns are swept until the
/// objective settles.
InductiveResult infer_inductive(const SgklModel& model, Index graph,
                                const ObservedSignalSet& test);

}  // namespace sgkl
