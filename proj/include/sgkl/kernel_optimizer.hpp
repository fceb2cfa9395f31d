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

#include <memory>
#include <vector>

namespace sgkl {

struct KernelPrior {
  double nominal_scale = 0.4;  // s_0
  double eta_s = 1e8;
};

struct DescentConfig {
  // With preconditioning the direction is -g scaled by the inverse of a
  // Gauss-Newton curvature estimate, so a unit step is the natural scale.
  bool precondition = true;
  int curvature_refresh = 10;  // steps between curvature estimates
  double initial_step = 1.0;
  double backtrack = 0.5;
  double sufficient_decrease = 1e-4;
  int max_steps = 200;
  int max_backtracks = 60;
  double grad_tol = 1e-6;  // relative: stop when |grad| <= grad_tol (1 + |f|)

  void validate() const;
};

/// One graph's contribution to the kernel objective. Coefficients are held
/// fixed while the kernels move.
struct KernelTermData {
  std::shared_ptr<const SpectralDecomposition> dec;
  const ObservedSignalSet* obs = nullptr;
  const Matrix* coefficients = nullptr;  // JN x K
};

/// f(psi) = sum mu_j^2 + eta_s sum (s_j - s_0)^2
///        + eta_w sum_{m,i} |S_i (y_i - D^m(psi) x_i)|^2
///        + eta_y sum_m tr(X^T D^T L D X)
class KernelObjective {
 public:
  KernelObjective(std::vector<KernelTermData> graphs, KernelPrior prior, double eta_w,
                  double eta_y);

  double value(const KernelParamVector& psi) const;
  Vector gradient(const KernelParamVector& psi) const;
  /// Masked-fidelity sum without the eta_w weight.
  double fidelity(const KernelParamVector& psi) const;
  double prior_term(const KernelParamVector& psi) const;
  /// Diagonal of the Gauss-Newton Hessian plus the prior curvature.
  Vector curvature(const KernelParamVector& psi) const;

  const KernelPrior& prior() const { return prior_; }

 private:
  struct Prepared {
    std::shared_ptr<const SpectralDecomposition> dec;
    Matrix observed_values;  // zero where missing
    MaskMatrix observed;
    Matrix spectral;         // V^T X
  };
  struct Terms {
    double fidelity = 0.0;
    double smoothness = 0.0;
  };
  Terms data_terms(const Prepared& g, const KernelParamVector& psi) const;

  std::vector<Prepared> graphs_;
  KernelPrior prior_;
  double eta_w_;
  double eta_y_;
};

double objective_psi(const KernelParamVector& psi, const std::vector<KernelTermData>& graphs,
                     const KernelPrior& prior, double eta_w, double eta_y);
Vector gradient_psi(const KernelParamVector& psi, const std::vector<KernelTermData>& graphs,
                    const KernelPrior& prior, double eta_w, double eta_y);

struct DescentStep {
  double f = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // accepted step length, 0 for the starting point
  int backtracks = 0;
};

struct DescentResult {
  KernelParamVector psi;
  std::vector<DescentStep> trace;  // starting point first
  bool clamped = false;
  bool converged = false;
};

/// Projected (optionally diagonally preconditioned) gradient descent with
/// Armijo backtracking; scales are clamped to kMinScale after every step and
/// each accepted step strictly lowers f.
DescentResult descend(const KernelParamVector& psi0, const KernelObjective& objective,
                      const DescentConfig& cfg);

}  // namespace sgkl
