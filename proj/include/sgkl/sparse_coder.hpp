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

#include <optional>
#include <span>
#include <vector>

namespace sgkl {

struct AdmmConfig {
  double rho = 1e4;
  int max_iters = 500;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  // Residual balancing: every 10 iterations during the first half of the
  // budget, rho is doubled or halved when one residual exceeds the other
  // tenfold.
  bool adaptive_rho = true;
  double eta_x = 500.0;
  double eta_w = 1e5;
  double eta_y = 1e2;
  double eta_c = 1e3;

  void validate() const;
};

struct AdmmDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;  // |x - z|
  double dual_residual = 0.0;    // |z - z_prev|
  bool converged = false;
};

struct AdmmWarmStart {
  Vector z;
  Vector u;
};

struct CoefficientSolution {
  Vector z;  // returned estimate, exact zeros from shrinkage
  Vector u;  // scaled dual, reusable as a warm start
  AdmmDiagnostics diagnostics;
};

/// sign(v) max(|v| - tau, 0), elementwise.
Vector soft_threshold(const Vector& v, double tau);

/// ADMM for one coefficient column with every other column held fixed.
///
/// The quadratic part is handled in the graph Fourier domain: with
/// D = U G V^T, A + A~ = V (G^T M G + c I) V^T where
/// M = eta_w U^T S^T S U + eta_y Lambda and c = rho/2 + eta_c C_ii, so each
/// x-update costs two block transforms plus an N x N solve.
class SignalCoefficientSolver {
 public:
  /// `y` only needs valid values where `observed` is true.
  SignalCoefficientSolver(const Dictionary& dict, const Vector& y,
                          const MaskColumn& observed,
                          double coupling_diag, const AdmmConfig& cfg);

  /// Sum over l != i of C_il x_l, given in the coefficient domain.
  void set_coupling_offset(const Vector& offset);
  /// Same, already transformed by V^T.
  void set_spectral_coupling_offset(const Vector& spectral_offset);

  /// Solves 2(A + A~) x + (b + b~) = 0 for the given z, u.
  Vector x_update(const Vector& z, const Vector& u) const;

  CoefficientSolution solve(const AdmmWarmStart* warm = nullptr) const;

 private:
  struct Factor {
    double rho = 0.0;
    double shift = 0.0;
    Eigen::PartialPivLU<Matrix> lu;
  };
  Factor factor(double rho) const;
  Vector solve_spectral(const Factor& f, const Vector& rhs) const;
  Vector x_update(const Factor& f, const Vector& z, const Vector& u) const;

  const Dictionary& dict_;
  AdmmConfig cfg_;
  double coupling_diag_;
  Matrix weighted_gram_;  // M
  Vector response_energy_;  // Gamma = sum_j g_j(lambda)^2
  Factor factor_;           // at the configured rho
  Vector data_term_;      // eta_w G^T U^T S^T S y
  Vector linear_term_;    // data term minus eta_c V^T offset
};

/// One-column objective: the terms of the coefficient problem that depend on
/// x_i, plus the constant-free coupling contribution
/// C_ii |x|^2 + 2 x^T offset.
double column_objective(const Dictionary& dict, const Vector& y,
                        const MaskColumn& observed,
                        const Vector& x, double coupling_diag, const Vector& coupling_offset,
                        const AdmmConfig& cfg);

CoefficientSolution solve_signal_coefficients(const Dictionary& dict, const Vector& y,
                                              const MaskColumn& observed,
                                              const Matrix& x_context, Index column,
                                              const Vector& coupling_row, const AdmmConfig& cfg,
                                              const AdmmWarmStart* warm = nullptr);

struct CoefficientProblem {
  const Dictionary& dict;
  const ObservedSignalSet& obs;
  const Matrix& coupling;  // K x K
  AdmmConfig cfg;
};

/// eta_x |X|_1 + eta_w sum_i |S_i(y_i - D x_i)|^2 + eta_y tr(X^T D^T L D X)
/// + eta_c tr(X C X^T).
double coefficient_objective(const CoefficientProblem& problem, const Matrix& x);

struct SweepResult {
  Matrix x;
  Matrix duals;
  std::vector<AdmmDiagnostics> diagnostics;  // one per visited column
  int rejected_updates = 0;
};

/// One Gauss-Seidel pass: every listed column (all, in order, by default) is
/// re-solved against the latest values of the others. A column keeps its old
/// value when the new solution does not lower its objective.
SweepResult sweep_coefficients(const CoefficientProblem& problem, Matrix x,
                               std::optional<Matrix> duals = std::nullopt,
                               std::span<const Index> columns = {});

}  // namespace sgkl
