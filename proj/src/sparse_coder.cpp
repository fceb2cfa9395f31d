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

#include "sgkl/sparse_coder.hpp"

#include <cmath>
#include <numeric>

namespace sgkl {

void AdmmConfig::validate() const {
  require(rho > 0.0, "rho must be positive");
  require(max_iters > 0, "max_iters must be positive");
  require(tol_primal > 0.0 && tol_dual > 0.0, "ADMM tolerances must be positive");
  require(eta_x >= 0.0 && eta_w >= 0.0 && eta_y >= 0.0 && eta_c >= 0.0,
          "regularization weights must be nonnegative");
}

Vector soft_threshold(const Vector& v, double tau) {
  require(tau >= 0.0, "threshold must be nonnegative");
  return v.unaryExpr([tau](double a) {
    const double m = std::abs(a) - tau;
    return m > 0.0 ? std::copysign(m, a) : 0.0;
  });
}

namespace {

// Spectral signal G c for one spectral coefficient vector.
Vector spectrum_of(const Dictionary& dict, const Vector& spectral) {
  return dict.synthesize_spectrum(spectral);
}

// G^T v: block j is g_j(Lambda) v.
Vector spectral_adjoint(const Dictionary& dict, const Vector& v) {
  const Index n = dict.node_count();
  Vector out(dict.atom_count());
  for (Index j = 0; j < dict.kernel_count(); ++j)
    out.segment(j * n, n) = dict.response().col(j).cwiseProduct(v);
  return out;
}

double column_objective_spectral(const Dictionary& dict, const Vector& y,
                                 const MaskColumn& observed, const Vector& x, const Vector& x_hat,
                                 double coupling_diag, const Vector& offset_hat,
                                 const AdmmConfig& cfg) {
  const Vector y_hat = spectrum_of(dict, x_hat);
  const Vector recon = dict.decomposition().eigenvectors * y_hat;
  const double fidelity = observed.select((y - recon).array(), 0.0).matrix().squaredNorm();
  const double smooth = (dict.decomposition().eigenvalues.array() * y_hat.array().square()).sum();
  const double coupling = coupling_diag * x_hat.squaredNorm() + 2.0 * x_hat.dot(offset_hat);
  return cfg.eta_x * x.lpNorm<1>() + cfg.eta_w * fidelity + cfg.eta_y * smooth +
         cfg.eta_c * coupling;
}

}  // namespace

SignalCoefficientSolver::SignalCoefficientSolver(const Dictionary& dict, const Vector& y,
                                                 const MaskColumn& observed, double coupling_diag,
                                                 const AdmmConfig& cfg)
    : dict_(dict), cfg_(cfg) {
  cfg_.validate();
  const Index n = dict.node_count();
  require(y.size() == n && observed.size() == n, "signal length must match the graph");
  require(observed.count() > 0, "signal has no observed entry");

  coupling_diag_ = coupling_diag;
  const Matrix& u = dict.decomposition().eigenvectors;
  const Index missing = n - observed.count();
  Matrix gram;  // U^T S^T S U
  if (missing < observed.count()) {
    Matrix rows(missing, n);
    for (Index r = 0, k = 0; r < n; ++r)
      if (!observed(r)) rows.row(k++) = u.row(r);
    gram = Matrix::Identity(n, n);
    gram.noalias() -= rows.transpose() * rows;
  } else {
    Matrix rows(observed.count(), n);
    for (Index r = 0, k = 0; r < n; ++r)
      if (observed(r)) rows.row(k++) = u.row(r);
    gram.noalias() = rows.transpose() * rows;
  }
  weighted_gram_ = cfg_.eta_w * gram;
  weighted_gram_.diagonal() += cfg_.eta_y * dict.decomposition().eigenvalues;

  response_energy_ = dict.response().rowwise().squaredNorm();
  factor_ = factor(cfg_.rho);

  const Vector ym = observed.select(y.array(), 0.0).matrix();
  data_term_ = cfg_.eta_w * spectral_adjoint(dict, u.transpose() * ym);
  linear_term_ = data_term_;
}

void SignalCoefficientSolver::set_coupling_offset(const Vector& offset) {
  set_spectral_coupling_offset(dict_.to_spectral(offset));
}

void SignalCoefficientSolver::set_spectral_coupling_offset(const Vector& spectral_offset) {
  linear_term_ = data_term_ - cfg_.eta_c * spectral_offset;
}

SignalCoefficientSolver::Factor SignalCoefficientSolver::factor(double rho) const {
  Factor f;
  f.rho = rho;
  f.shift = 0.5 * rho + cfg_.eta_c * coupling_diag_;
  if (!(f.shift > 0.0)) fail(ErrorCode::numerical, "ill-conditioned x-update");
  Matrix system = weighted_gram_ * response_energy_.asDiagonal();
  system.diagonal().array() += f.shift;
  f.lu.compute(system);
  return f;
}

// (c I + G^T M G)^{-1} rhs = (rhs - G^T (c I + M Gamma)^{-1} M G rhs) / c
Vector SignalCoefficientSolver::solve_spectral(const Factor& f, const Vector& rhs) const {
  const Vector g_rhs = spectrum_of(dict_, rhs);
  const Vector inner = f.lu.solve(weighted_gram_ * g_rhs);
  return (rhs - spectral_adjoint(dict_, inner)) / f.shift;
}

Vector SignalCoefficientSolver::x_update(const Factor& f, const Vector& z, const Vector& u) const {
  const Vector rhs = 0.5 * f.rho * dict_.to_spectral(z - u) + linear_term_;
  return dict_.from_spectral(solve_spectral(f, rhs));
}

Vector SignalCoefficientSolver::x_update(const Vector& z, const Vector& u) const {
  return x_update(factor_, z, u);
}

CoefficientSolution SignalCoefficientSolver::solve(const AdmmWarmStart* warm) const {
  constexpr int kBalanceEvery = 10;
  constexpr double kImbalance = 10.0;
  constexpr double kRhoStep = 2.0;

  const Index dim = dict_.atom_count();
  CoefficientSolution out;
  Vector z = Vector::Zero(dim);
  Vector u = Vector::Zero(dim);
  if (warm != nullptr) {
    if (warm->z.size() == dim) z = warm->z;
    if (warm->u.size() == dim) u = warm->u;
  }
  std::optional<Factor> adapted;  // set once rho leaves the configured value
  const double scale = std::sqrt(static_cast<double>(dim));
  auto& diag = out.diagnostics;
  for (int it = 1; it <= cfg_.max_iters; ++it) {
    const Factor& f = adapted ? *adapted : factor_;
    const Vector x = x_update(f, z, u);
    if (!x.allFinite()) fail(ErrorCode::numerical, "ill-conditioned x-update");
    Vector z_next = soft_threshold(x + u, cfg_.eta_x / f.rho);
    u += x - z_next;
    diag.iterations = it;
    diag.primal_residual = (x - z_next).norm();
    diag.dual_residual = (z_next - z).norm();
    z = std::move(z_next);
    if (diag.primal_residual <= cfg_.tol_primal * scale &&
        diag.dual_residual <= cfg_.tol_dual * scale) {
      diag.converged = true;
      break;
    }
    if (cfg_.adaptive_rho && it % kBalanceEvery == 0 && 2 * it <= cfg_.max_iters) {
      double next = f.rho;
      if (diag.primal_residual > kImbalance * diag.dual_residual) next *= kRhoStep;
      else if (diag.dual_residual > kImbalance * diag.primal_residual) next /= kRhoStep;
      if (next != f.rho) {
        u *= f.rho / next;  // the scaled dual is y / rho
        adapted = factor(next);
      }
    }
  }
  // warm starts are stated at the configured rho
  if (adapted) u *= adapted->rho / cfg_.rho;
  out.z = std::move(z);
  out.u = std::move(u);
  return out;
}

double column_objective(const Dictionary& dict, const Vector& y, const MaskColumn& observed,
                        const Vector& x, double coupling_diag, const Vector& coupling_offset,
                        const AdmmConfig& cfg) {
  return column_objective_spectral(dict, y, observed, x, dict.to_spectral(x), coupling_diag,
                                   dict.to_spectral(coupling_offset), cfg);
}

CoefficientSolution solve_signal_coefficients(const Dictionary& dict, const Vector& y,
                                              const MaskColumn& observed, const Matrix& x_context,
                                              Index column, const Vector& coupling_row,
                                              const AdmmConfig& cfg, const AdmmWarmStart* warm) {
  require(x_context.rows() == dict.atom_count(), "coefficient rows must equal J*N");
  require(coupling_row.size() == x_context.cols(), "coupling row length must equal K");
  require(column >= 0 && column < x_context.cols(), "column out of range");
  Vector offset = x_context * coupling_row;
  offset -= coupling_row(column) * x_context.col(column);
  SignalCoefficientSolver solver(dict, y, observed, coupling_row(column), cfg);
  solver.set_coupling_offset(offset);
  return solver.solve(warm);
}

double coefficient_objective(const CoefficientProblem& p, const Matrix& x) {
  const Dictionary& dict = p.dict;
  require(x.rows() == dict.atom_count() && x.cols() == p.obs.signal_count(),
          "coefficient matrix shape mismatch");
  const Matrix y_hat = dict.synthesize_spectrum(dict.to_spectral(x));
  const Matrix recon = dict.decomposition().eigenvectors * y_hat;
  const double fidelity =
      p.obs.observed.select(p.obs.values.array() - recon.array(), 0.0).matrix().squaredNorm();
  const double smooth =
      (dict.decomposition().eigenvalues.asDiagonal() * y_hat.array().square().matrix()).sum();
  const double coupling = (x.transpose() * x).cwiseProduct(p.coupling).sum();
  return p.cfg.eta_x * x.lpNorm<1>() + p.cfg.eta_w * fidelity + p.cfg.eta_y * smooth +
         p.cfg.eta_c * coupling;
}

SweepResult sweep_coefficients(const CoefficientProblem& p, Matrix x, std::optional<Matrix> duals,
                               std::span<const Index> columns) {
  const Dictionary& dict = p.dict;
  const Index k = p.obs.signal_count();
  require(x.rows() == dict.atom_count() && x.cols() == k, "coefficient matrix shape mismatch");
  require(p.coupling.rows() == k && p.coupling.cols() == k, "coupling matrix must be K x K");

  SweepResult out;
  out.duals = duals ? std::move(*duals) : Matrix::Zero(x.rows(), k);
  require(out.duals.rows() == x.rows() && out.duals.cols() == k, "dual matrix shape mismatch");

  std::vector<Index> all;
  if (columns.empty()) {
    all.resize(static_cast<std::size_t>(k));
    std::iota(all.begin(), all.end(), Index{0});
    columns = all;
  }

  Matrix x_hat = dict.to_spectral(x);
  for (const Index i : columns) {
    require(i >= 0 && i < k, "column out of range");
    const Vector y = p.obs.masked_column(i);
    const MaskColumn observed = p.obs.observed.col(i);
    const double c_ii = p.coupling(i, i);
    Vector offset_hat = Vector::Zero(x.rows());
    if (p.cfg.eta_c != 0.0) {
      offset_hat = x_hat * p.coupling.col(i);
      offset_hat -= c_ii * x_hat.col(i);
    }

    SignalCoefficientSolver solver(dict, y, observed, c_ii, p.cfg);
    solver.set_spectral_coupling_offset(offset_hat);
    const AdmmWarmStart warm{x.col(i), out.duals.col(i)};
    CoefficientSolution sol = solver.solve(&warm);
    out.diagnostics.push_back(sol.diagnostics);
    out.duals.col(i) = sol.u;

    const Vector z_hat = dict.to_spectral(sol.z);
    const double before = column_objective_spectral(dict, y, observed, x.col(i), x_hat.col(i), c_ii,
                                                    offset_hat, p.cfg);
    const double after =
        column_objective_spectral(dict, y, observed, sol.z, z_hat, c_ii, offset_hat, p.cfg);
    if (after <= before) {
      x.col(i) = sol.z;
      x_hat.col(i) = z_hat;
    } else {
      ++out.rejected_updates;
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace sgkl
