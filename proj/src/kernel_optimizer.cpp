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

#include "sgkl/kernel_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgkl {

void DescentConfig::validate() const {
  require(initial_step > 0.0, "initial step must be positive");
  require(backtrack > 0.0 && backtrack < 1.0, "backtracking factor must lie in (0, 1)");
  require(sufficient_decrease > 0.0 && sufficient_decrease < 1.0,
          "sufficient decrease constant must lie in (0, 1)");
  require(max_steps > 0 && max_backtracks > 0, "step limits must be positive");
  require(grad_tol > 0.0, "gradient tolerance must be positive");
  require(curvature_refresh > 0, "curvature refresh interval must be positive");
}

KernelObjective::KernelObjective(std::vector<KernelTermData> graphs, KernelPrior prior,
                                 double eta_w, double eta_y)
    : prior_(prior), eta_w_(eta_w), eta_y_(eta_y) {
  require(prior.nominal_scale > 0.0, "nominal scale must be positive");
  require(prior.eta_s >= 0.0 && eta_w >= 0.0 && eta_y >= 0.0, "weights must be nonnegative");
  for (auto& g : graphs) {
    require(g.dec && g.obs && g.coefficients, "kernel term data is incomplete");
    const Index n = g.dec->size();
    const Matrix& x = *g.coefficients;
    require(g.obs->node_count() == n && x.cols() == g.obs->signal_count() && x.rows() % n == 0,
            "kernel term shapes are inconsistent");
    Prepared p;
    p.dec = g.dec;
    p.observed_values = g.obs->masked_values();
    p.observed = g.obs->observed;
    const Index kernels = x.rows() / n;
    p.spectral.resize(x.rows(), x.cols());
    for (Index j = 0; j < kernels; ++j)
      p.spectral.middleRows(j * n, n).noalias() =
          g.dec->eigenvectors.transpose() * x.middleRows(j * n, n);
    graphs_.push_back(std::move(p));
  }
}

namespace {

Matrix synthesize(const Matrix& response, const Matrix& spectral) {
  const Index n = response.rows();
  Matrix y_hat = Matrix::Zero(n, spectral.cols());
  for (Index j = 0; j < response.cols(); ++j)
    y_hat += response.col(j).asDiagonal() * spectral.middleRows(j * n, n);
  return y_hat;
}

void check_kernel_count(const Matrix& spectral, Index n, const KernelParamVector& psi) {
  require(spectral.rows() == n * psi.kernel_count(),
          "coefficient rows do not match the number of kernels");
}

}  // namespace

KernelObjective::Terms KernelObjective::data_terms(const Prepared& g,
                                                   const KernelParamVector& psi) const {
  check_kernel_count(g.spectral, g.dec->size(), psi);
  const Matrix y_hat = synthesize(kernel_response(*g.dec, psi), g.spectral);
  const Matrix recon = g.dec->eigenvectors * y_hat;
  Terms t;
  t.fidelity =
      g.observed.select(g.observed_values.array() - recon.array(), 0.0).matrix().squaredNorm();
  t.smoothness = (g.dec->eigenvalues.asDiagonal() * y_hat.array().square().matrix()).sum();
  return t;
}

double KernelObjective::prior_term(const KernelParamVector& psi) const {
  return psi.mu().squaredNorm() +
         prior_.eta_s * (psi.scale().array() - prior_.nominal_scale).square().sum();
}

double KernelObjective::fidelity(const KernelParamVector& psi) const {
  double total = 0.0;
  for (const auto& g : graphs_) total += data_terms(g, psi).fidelity;
  return total;
}

double KernelObjective::value(const KernelParamVector& psi) const {
  double total = prior_term(psi);
  for (const auto& g : graphs_) {
    const Terms t = data_terms(g, psi);
    total += eta_w_ * t.fidelity + eta_y_ * t.smoothness;
  }
  return total;
}

Vector KernelObjective::gradient(const KernelParamVector& psi) const {
  const Index kernels = psi.kernel_count();
  Vector grad(2 * kernels);
  grad << 2.0 * psi.mu(),
      2.0 * prior_.eta_s * (psi.scale().array() - prior_.nominal_scale).matrix();

  for (const auto& g : graphs_) {
    const Index n = g.dec->size();
    check_kernel_count(g.spectral, n, psi);
    const Matrix response = kernel_response(*g.dec, psi);
    const Matrix y_hat = synthesize(response, g.spectral);
    const Matrix residual =
        g.observed.select(g.observed_values.array() - (g.dec->eigenvectors * y_hat).array(), 0.0)
            .matrix();
    // C^T (C G c - a) summed over signals, in the Fourier domain: -U^T E
    const Matrix back = g.dec->eigenvectors.transpose() * residual;

    // df/dG restricted to the J N nonzero positions of G, vectorized per kernel
    Vector dg(n * kernels);
    for (Index j = 0; j < kernels; ++j) {
      const auto cj = g.spectral.middleRows(j * n, n);
      const Vector fit = -2.0 * back.cwiseProduct(cj).rowwise().sum();
      const Vector smooth =
          2.0 * g.dec->eigenvalues.cwiseProduct(y_hat.cwiseProduct(cj).rowwise().sum());
      dg.segment(j * n, n) = eta_w_ * fit + eta_y_ * smooth;
    }
    grad.noalias() += kernel_param_jacobian(*g.dec, psi).transpose() * dg;
  }
  return grad;
}

Vector KernelObjective::curvature(const KernelParamVector& psi) const {
  const Index kernels = psi.kernel_count();
  Vector h(2 * kernels);
  h << Vector::Constant(kernels, 2.0), Vector::Constant(kernels, 2.0 * prior_.eta_s);

  for (const auto& g : graphs_) {
    const Index n = g.dec->size();
    check_kernel_count(g.spectral, n, psi);
    const Matrix jac = kernel_param_jacobian(*g.dec, psi);
    for (Index p = 0; p < 2 * kernels; ++p) {
      const Index j = p % kernels;
      const Vector d = jac.col(p).segment(j * n, n);
      const Matrix dy_hat = d.asDiagonal() * g.spectral.middleRows(j * n, n);
      const Matrix drecon = g.dec->eigenvectors * dy_hat;
      const double fit = g.observed.select(drecon.array().square(), 0.0).sum();
      const double smooth =
          (g.dec->eigenvalues.asDiagonal() * dy_hat.array().square().matrix()).sum();
      h(p) += 2.0 * (eta_w_ * fit + eta_y_ * smooth);
    }
  }
  return h;
}

double objective_psi(const KernelParamVector& psi, const std::vector<KernelTermData>& graphs,
                     const KernelPrior& prior, double eta_w, double eta_y) {
  return KernelObjective(graphs, prior, eta_w, eta_y).value(psi);
}

Vector gradient_psi(const KernelParamVector& psi, const std::vector<KernelTermData>& graphs,
                    const KernelPrior& prior, double eta_w, double eta_y) {
  return KernelObjective(graphs, prior, eta_w, eta_y).gradient(psi);
}

namespace {

[[noreturn]] void blow_up(const KernelParamVector& psi) {
  std::ostringstream os;
  os << "numerical blow-up at psi = [" << psi.flat().transpose() << "]";
  fail(ErrorCode::numerical, os.str());
}

}  // namespace

DescentResult descend(const KernelParamVector& psi0, const KernelObjective& objective,
                      const DescentConfig& cfg) {
  cfg.validate();
  DescentResult out;
  out.psi = psi0;
  out.clamped = out.psi.clamp_scales();

  double f = objective.value(out.psi);
  Vector grad = objective.gradient(out.psi);
  if (!std::isfinite(f) || !grad.allFinite()) blow_up(out.psi);
  out.trace.push_back({f, grad.norm(), 0.0, 0});

  double step = cfg.initial_step;
  Vector scaling = Vector::Ones(grad.size());
  for (int it = 0; it < cfg.max_steps; ++it) {
    if (grad.norm() <= cfg.grad_tol * (1.0 + std::abs(f))) {
      out.converged = true;
      break;
    }
    if (cfg.precondition && it % cfg.curvature_refresh == 0) {
      const Vector h = objective.curvature(out.psi);
      if (!h.allFinite()) blow_up(out.psi);
      scaling = h.cwiseMax(1e-12 * h.maxCoeff()).cwiseInverse();
    }
    const Vector direction = scaling.cwiseProduct(grad);
    const Vector current = out.psi.flat();
    bool accepted = false;
    int backtracks = 0;
    for (; backtracks <= cfg.max_backtracks; ++backtracks, step *= cfg.backtrack) {
      Vector flat = current - step * direction;
      auto tail = flat.tail(psi0.kernel_count());
      const bool clamped = (tail.array() < kMinScale).any();
      tail = tail.cwiseMax(kMinScale);
      if (!flat.allFinite()) continue;
      KernelParamVector trial = KernelParamVector::from_flat(flat);
      const double f_trial = objective.value(trial);
      if (!std::isfinite(f_trial)) continue;
      const double predicted = grad.dot(trial.flat() - current);
      if (f_trial < f && f_trial <= f + cfg.sufficient_decrease * predicted) {
        out.psi = std::move(trial);
        out.clamped = out.clamped || clamped;
        f = f_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no representable decrease along -grad: stationary to working precision
      out.converged = true;
      break;
    }
    grad = objective.gradient(out.psi);
    if (!std::isfinite(f) || !grad.allFinite()) blow_up(out.psi);
    out.trace.push_back({f, grad.norm(), step, backtracks});
    step /= cfg.backtrack;
    if (cfg.precondition) step = std::min(step, cfg.initial_step);
  }
  return out;
}

}  // namespace sgkl
