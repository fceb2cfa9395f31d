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

#include "sgkl/dictionary.hpp"

#include <json.hpp>

#include <cmath>
#include <vector>

namespace sgkl {

double eval_kernel(const KernelParams& p, double lambda) {
  const double d = (lambda - p.mu) / p.scale;
  return std::exp(-d * d);
}

KernelParamVector::KernelParamVector(Vector mu, Vector scale)
    : mu_(std::move(mu)), scale_(std::move(scale)) {
  validate();
}

KernelParamVector KernelParamVector::from_flat(const Vector& flat) {
  require(flat.size() % 2 == 0 && flat.size() > 0, "kernel parameter vector must have even length");
  const Index j = flat.size() / 2;
  return {flat.head(j), flat.tail(j)};
}

KernelParamVector KernelParamVector::nominal(Index kernels, double nominal_scale) {
  return {Vector::Zero(kernels), Vector::Constant(kernels, nominal_scale)};
}

Vector KernelParamVector::flat() const {
  Vector v(2 * kernel_count());
  v << mu_, scale_;
  return v;
}

bool KernelParamVector::clamp_scales(double floor) {
  bool moved = false;
  for (Index j = 0; j < scale_.size(); ++j) {
    if (scale_(j) < floor) {
      scale_(j) = floor;
      moved = true;
    }
  }
  return moved;
}

void KernelParamVector::validate() const {
  require(mu_.size() == scale_.size() && mu_.size() > 0, "need matching, non-empty mu and s");
  require(mu_.allFinite() && scale_.allFinite(), "kernel parameters must be finite");
  require((scale_.array() > 0.0).all(), "kernel scales must be positive");
}

std::string psi_to_json(const KernelParamVector& psi) {
  nlohmann::json j;
  j["mu"] = std::vector<double>(psi.mu().begin(), psi.mu().end());
  j["s"] = std::vector<double>(psi.scale().begin(), psi.scale().end());
  return j.dump();
}

KernelParamVector psi_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto s = j.at("s").get<std::vector<double>>();
    require(mu.size() == s.size(), "mu and s must have the same length");
    return {Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size())),
            Eigen::Map<const Vector>(s.data(), static_cast<Index>(s.size()))};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("bad kernel parameter json: ") + e.what());
  }
}

Matrix kernel_response(const SpectralDecomposition& dec, const KernelParamVector& psi) {
  Matrix r(dec.size(), psi.kernel_count());
  for (Index j = 0; j < psi.kernel_count(); ++j)
    for (Index n = 0; n < dec.size(); ++n) r(n, j) = eval_kernel(psi.kernel(j), dec.eigenvalues(n));
  return r;
}

Dictionary::Dictionary(std::shared_ptr<const SpectralDecomposition> dec, KernelParamVector psi)
    : dec_(std::move(dec)), psi_(std::move(psi)) {
  require(dec_ != nullptr, "dictionary needs a spectral decomposition");
  psi_.validate();
  response_ = kernel_response(*dec_, psi_);
  const Index n = node_count();
  const Matrix& u = dec_->eigenvectors;
  atoms_.resize(n, atom_count());
  for (Index j = 0; j < kernel_count(); ++j) {
    Matrix block = u * response_.col(j).asDiagonal() * u.transpose();
    // exact symmetry; the two triangles differ only by rounding
    atoms_.middleCols(j * n, n) = 0.5 * (block + block.transpose());
  }
}

Matrix Dictionary::to_spectral(const Matrix& coefficients) const {
  const Index n = node_count();
  require(coefficients.rows() == atom_count(), "coefficient rows must equal J*N");
  Matrix out(coefficients.rows(), coefficients.cols());
  for (Index j = 0; j < kernel_count(); ++j)
    out.middleRows(j * n, n).noalias() =
        dec_->eigenvectors.transpose() * coefficients.middleRows(j * n, n);
  return out;
}

Matrix Dictionary::from_spectral(const Matrix& spectral) const {
  const Index n = node_count();
  require(spectral.rows() == atom_count(), "spectral rows must equal J*N");
  Matrix out(spectral.rows(), spectral.cols());
  for (Index j = 0; j < kernel_count(); ++j)
    out.middleRows(j * n, n).noalias() = dec_->eigenvectors * spectral.middleRows(j * n, n);
  return out;
}

Matrix Dictionary::synthesize_spectrum(const Matrix& spectral) const {
  const Index n = node_count();
  Matrix out = Matrix::Zero(n, spectral.cols());
  for (Index j = 0; j < kernel_count(); ++j)
    out += response_.col(j).asDiagonal() * spectral.middleRows(j * n, n);
  return out;
}

Matrix Dictionary::apply(const Matrix& coefficients) const {
  return dec_->eigenvectors * synthesize_spectrum(to_spectral(coefficients));
}

Matrix kernel_param_jacobian(const SpectralDecomposition& dec, const KernelParamVector& psi) {
  const Index n = dec.size();
  const Index kernels = psi.kernel_count();
  Matrix jac = Matrix::Zero(kernels * n, 2 * kernels);
  for (Index j = 0; j < kernels; ++j) {
    const double mu = psi.mu()(j);
    const double s = psi.scale()(j);
    for (Index r = 0; r < n; ++r) {
      const double d = dec.eigenvalues(r) - mu;
      const double g = eval_kernel(psi.kernel(j), dec.eigenvalues(r));
      jac(j * n + r, j) = g * 2.0 * d / (s * s);
      jac(j * n + r, kernels + j) = g * 2.0 * d * d / (s * s * s);
    }
  }
  return jac;
}

}  // namespace sgkl
