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
#include "sgkl/graph.hpp"

#include <memory>
#include <string>

namespace sgkl {

/// Floor applied to every kernel scale.
inline constexpr double kMinScale = 1e-3;

struct KernelParams {
  double mu = 0.0;
  double scale = 1.0;
};

/// exp(-(lambda - mu)^2 / scale^2).
double eval_kernel(const KernelParams& p, double lambda);

/// J Gaussian kernels, flattened as [mu_1..mu_J, s_1..s_J].
class KernelParamVector {
 public:
  KernelParamVector() = default;
  KernelParamVector(Vector mu, Vector scale);
  static KernelParamVector from_flat(const Vector& flat);
  /// mu = 0 and every scale at `nominal_scale`.
  static KernelParamVector nominal(Index kernels, double nominal_scale);

  Index kernel_count() const { return mu_.size(); }
  KernelParams kernel(Index j) const { return {mu_(j), scale_(j)}; }
  const Vector& mu() const { return mu_; }
  const Vector& scale() const { return scale_; }
  Vector flat() const;
  /// Raises every scale below `floor` to `floor`; returns true if any moved.
  bool clamp_scales(double floor = kMinScale);
  void validate() const;

 private:
  Vector mu_;
  Vector scale_;
};

std::string psi_to_json(const KernelParamVector& psi);
KernelParamVector psi_from_json(const std::string& text);

/// g_j(lambda_n) arranged as an N x J matrix.
Matrix kernel_response(const SpectralDecomposition& dec, const KernelParamVector& psi);

/// D = [D_1 ... D_J] with D_j = U g_j(Lambda) U^T.
class Dictionary {
 public:
  Dictionary(std::shared_ptr<const SpectralDecomposition> dec, KernelParamVector psi);

  Index node_count() const { return dec_->size(); }
  Index kernel_count() const { return psi_.kernel_count(); }
  Index atom_count() const { return node_count() * kernel_count(); }

  const Matrix& matrix() const { return atoms_; }
  auto block(Index j) const { return atoms_.middleCols(j * node_count(), node_count()); }
  /// N x J kernel response on the eigenvalues.
  const Matrix& response() const { return response_; }
  const SpectralDecomposition& decomposition() const { return *dec_; }
  const std::shared_ptr<const SpectralDecomposition>& decomposition_ptr() const { return dec_; }
  const KernelParamVector& psi() const { return psi_; }

  /// V^T x for V = blkdiag(U, ..., U): the per-kernel graph Fourier transform
  /// of a coefficient vector (or of every column of a JN x K matrix).
  Matrix to_spectral(const Matrix& coefficients) const;
  Matrix from_spectral(const Matrix& spectral) const;
  /// G c for spectral coefficients c (JN x K) -> N x K signal spectra.
  Matrix synthesize_spectrum(const Matrix& spectral) const;
  /// D X through the spectral route.
  Matrix apply(const Matrix& coefficients) const;

 private:
  std::shared_ptr<const SpectralDecomposition> dec_;
  KernelParamVector psi_;
  Matrix response_;
  Matrix atoms_;
};

/// dG/dpsi in the JN x 2J layout: column j carries dg_j/dmu_j on rows
/// [jN, (j+1)N), column J+j carries dg_j/ds_j on the same rows.
Matrix kernel_param_jacobian(const SpectralDecomposition& dec, const KernelParamVector& psi);

}  // namespace sgkl
