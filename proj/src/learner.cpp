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

#include "sgkl/learner.hpp"

#include "sgkl/logging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sgkl {

AdmmConfig SgklConfig::admm_config() const {
  AdmmConfig a = admm;
  a.eta_x = eta_x;
  a.eta_w = eta_w;
  a.eta_y = eta_y;
  a.eta_c = eta_c;
  return a;
}

void SgklConfig::validate() const {
  require(kernels >= 1, "need at least one kernel");
  require(eta_s >= 0.0 && eta_x >= 0.0 && eta_w >= 0.0 && eta_y >= 0.0 && eta_c >= 0.0,
          "regularization weights must be nonnegative");
  require(nominal_scale > 0.0, "nominal scale must be positive");
  require(!gamma || *gamma > 0.0, "gamma must be positive");
  require(outer_max_iters >= 0 && outer_tol >= 0.0, "bad outer loop settings");
  require(mu_lo <= mu_hi, "empty mu initialization range");
  require(0.0 < scale_lo_factor && scale_lo_factor <= scale_hi_factor,
          "bad scale initialization range");
  admm_config().validate();
  descent.validate();
}

GraphState prepare_graph(const GraphInput& input, const SgklConfig& cfg) {
  input.signals.validate();
  require(input.signals.node_count() == input.graph.node_count(),
          "signal rows must match the graph node count");
  GraphState s;
  s.laplacian = normalized_laplacian(input.graph);
  s.dec = std::make_shared<const SpectralDecomposition>(eigendecompose(s.laplacian));
  s.obs = input.signals;
  s.signal_graph = build_signal_graph(s.obs, {cfg.gamma, cfg.gamma_normalize_by_common_count});
  s.coupling = coupling_matrix(s.signal_graph, cfg.signal_laplacian);
  if (cfg.signal_laplacian == SignalLaplacianKind::normalized) {
    // the x-update takes A~ = eta_c I on every coupled signal
    for (Index i = 0; i < s.coupling.rows(); ++i)
      require(s.coupling(i, i) == 1.0 || s.signal_graph.affinity.row(i).sum() == 0.0,
              "normalized signal Laplacian must have unit diagonal");
  }
  return s;
}

KernelParamVector draw_initial_psi(const SgklConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> mu(cfg.mu_lo, cfg.mu_hi);
  std::uniform_real_distribution<double> scale(cfg.scale_lo_factor * cfg.nominal_scale,
                                               cfg.scale_hi_factor * cfg.nominal_scale);
  Vector m(cfg.kernels), s(cfg.kernels);
  for (Index j = 0; j < cfg.kernels; ++j) m(j) = mu(rng);
  for (Index j = 0; j < cfg.kernels; ++j) s(j) = scale(rng);
  KernelParamVector psi(m, s);
  psi.clamp_scales();
  return psi;
}

namespace {

ObjectiveBreakdown graph_terms(const GraphState& g, const SgklConfig& cfg) {
  const Dictionary& dict = *g.dict;
  const Matrix y_hat = dict.synthesize_spectrum(dict.to_spectral(g.x));
  const Matrix recon = g.dec->eigenvectors * y_hat;
  ObjectiveBreakdown b;
  b.sparsity = cfg.eta_x * g.x.lpNorm<1>();
  b.fidelity =
      cfg.eta_w *
      g.obs.observed.select(g.obs.values.array() - recon.array(), 0.0).matrix().squaredNorm();
  b.smoothness =
      cfg.eta_y * (g.dec->eigenvalues.asDiagonal() * y_hat.array().square().matrix()).sum();
  b.coupling = cfg.eta_c * (g.x.transpose() * g.x).cwiseProduct(g.coupling).sum();
  return b;
}

void rebuild_dictionaries(SgklModel& model) {
  for (auto& g : model.graphs) g.dict = std::make_shared<const Dictionary>(g.dec, model.psi);
}

void sweep_all(SgklModel& model) {
  const AdmmConfig admm = model.config.admm_config();
  for (auto& g : model.graphs) {
    const CoefficientProblem problem{*g.dict, g.obs, g.coupling, admm};
    SweepResult r = sweep_coefficients(problem, std::move(g.x), std::move(g.duals));
    g.x = std::move(r.x);
    g.duals = std::move(r.duals);
    const auto unconverged = std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                                           [](const AdmmDiagnostics& d) { return !d.converged; });
    if (unconverged > 0)
      log().debug("{} of {} ADMM solves hit max_iters", unconverged, r.diagnostics.size());
  }
}

void record(SgklModel& model, int outer, const char* stage) {
  const ObjectiveBreakdown b = objective_breakdown(model);
  if (!std::isfinite(b.total()))
    fail(ErrorCode::numerical, std::string("non-finite objective after ") + stage + " update");
  model.trace.push_back({outer, stage, b.total(), b.kernel_part()});
  log().info("outer {} {:>4}: objective {:.10g}", outer, stage, b.total());
}

}  // namespace

ObjectiveBreakdown objective_breakdown(const SgklModel& model) {
  const KernelPrior prior = model.config.prior();
  ObjectiveBreakdown total;
  total.mu_prior = model.psi.mu().squaredNorm();
  total.scale_prior =
      prior.eta_s * (model.psi.scale().array() - prior.nominal_scale).square().sum();
  for (const auto& g : model.graphs) {
    const ObjectiveBreakdown b = graph_terms(g, model.config);
    total.sparsity += b.sparsity;
    total.fidelity += b.fidelity;
    total.smoothness += b.smoothness;
    total.coupling += b.coupling;
  }
  return total;
}

double total_objective(const SgklModel& model) { return objective_breakdown(model).total(); }

SgklModel fit(const std::vector<GraphInput>& data, const SgklConfig& cfg, const SgklModel* resume) {
  cfg.validate();
  if (data.empty()) fail(ErrorCode::invalid_argument, "empty dataset");

  SgklModel model;
  model.config = cfg;
  for (const auto& input : data) model.graphs.push_back(prepare_graph(input, cfg));

  if (resume != nullptr) {
    require(resume->psi.kernel_count() == cfg.kernels, "checkpoint kernel count differs");
    require(resume->graphs.size() == model.graphs.size(), "checkpoint graph count differs");
    model.psi = resume->psi;
    for (std::size_t m = 0; m < model.graphs.size(); ++m) {
      auto& g = model.graphs[m];
      const Matrix& x = resume->graphs[m].x;
      require(x.rows() == cfg.kernels * g.dec->size() && x.cols() == g.obs.signal_count(),
              "checkpoint coefficient shape differs");
      g.x = x;
      g.duals = Matrix::Zero(x.rows(), x.cols());
    }
    rebuild_dictionaries(model);
  } else {
    model.psi = draw_initial_psi(cfg);
    rebuild_dictionaries(model);
    for (auto& g : model.graphs) {
      g.x = Matrix::Zero(g.dict->atom_count(), g.obs.signal_count());
      g.duals = g.x;
    }
    sweep_all(model);
  }
  record(model, 0, "init");

  double previous = model.trace.back().objective;
  for (int outer = 1; outer <= cfg.outer_max_iters; ++outer) {
    std::vector<KernelTermData> terms;
    for (const auto& g : model.graphs) terms.push_back({g.dec, &g.obs, &g.x});
    const KernelObjective objective(std::move(terms), cfg.prior(), cfg.eta_w, cfg.eta_y);
    DescentResult step = descend(model.psi, objective, cfg.descent);
    if (step.clamped) log().warn("kernel scale clamped to the floor {}", kMinScale);
    model.descent_trace.insert(model.descent_trace.end(), step.trace.begin(), step.trace.end());
    model.psi = std::move(step.psi);
    rebuild_dictionaries(model);
    record(model, outer, "psi");

    sweep_all(model);
    record(model, outer, "x");
    model.outer_iterations = outer;

    const double current = model.trace.back().objective;
    const double change = (previous - current) / std::max(std::abs(previous), 1e-300);
    previous = current;
    if (change <= cfg.outer_tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

Matrix reconstruct(const SgklModel& model, Index graph) {
  require(graph >= 0 && graph < static_cast<Index>(model.graphs.size()),
          "graph index out of range");
  const GraphState& g = model.graphs[static_cast<std::size_t>(graph)];
  return g.dict->apply(g.x);
}

InductiveResult infer_inductive(const SgklModel& model, Index graph,
                                const ObservedSignalSet& test) {
  require(graph >= 0 && graph < static_cast<Index>(model.graphs.size()),
          "graph index out of range");
  const GraphState& g = model.graphs[static_cast<std::size_t>(graph)];
  if (test.node_count() != g.dec->size())
    fail(ErrorCode::invalid_argument, "node-count mismatch between test signals and graph");
  test.validate();

  const Index k_train = g.obs.signal_count();
  const Index k_test = test.signal_count();
  ObservedSignalSet combined;
  combined.values.resize(test.node_count(), k_train + k_test);
  combined.values << g.obs.values, test.values;
  combined.observed.resize(test.node_count(), k_train + k_test);
  combined.observed << g.obs.observed, test.observed;

  const SgklConfig& cfg = model.config;
  const SignalGraphLaplacian sg =
      build_signal_graph(combined, {g.signal_graph.gamma, cfg.gamma_normalize_by_common_count});
  const Matrix coupling = coupling_matrix(sg, cfg.signal_laplacian);

  Matrix x(g.x.rows(), k_train + k_test);
  x << g.x, Matrix::Zero(g.x.rows(), k_test);
  Matrix duals = Matrix::Zero(x.rows(), x.cols());
  std::vector<Index> columns(static_cast<std::size_t>(k_test));
  std::iota(columns.begin(), columns.end(), k_train);

  const CoefficientProblem problem{*g.dict, combined, coupling, cfg.admm_config()};
  InductiveResult out;
  double previous = coefficient_objective(problem, x);
  const int max_sweeps = std::max(1, cfg.outer_max_iters);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    SweepResult r = sweep_coefficients(problem, std::move(x), std::move(duals), columns);
    x = std::move(r.x);
    duals = std::move(r.duals);
    out.sweeps = sweep;
    const double current = coefficient_objective(problem, x);
    const double change = (previous - current) / std::max(std::abs(previous), 1e-300);
    previous = current;
    if (change <= cfg.outer_tol) break;
  }
  out.coefficients = x.rightCols(k_test);
  out.reconstruction = g.dict->apply(out.coefficients);
  return out;
}

}  // namespace sgkl
