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

#include "sgkl/experiments.hpp"

#include "sgkl/config.hpp"
#include "sgkl/logging.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>
#include <cstdio>
#include <limits>
#include <tuple>

namespace sgkl {

void SyntheticSetup::validate() const {
  require(!nodes.empty() && nodes.size() == signals.size(),
          "need one node count and one signal count per graph");
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    require(nodes[m] > knn, "k too large");
    require(signals[m] >= 1, "need at least one signal per graph");
    require(sparsity >= 0 && sparsity <= kernels * nodes[m], "sparsity must lie in [0, J N]");
  }
  require(knn >= 1 && knn_scale > 0.0, "bad k-NN settings");
  require(kernels >= 1, "need at least one kernel");
  require(coefficient_scale > 0.0, "coefficient scale must be positive");
  require(mu_std >= 0.0 && scale_std >= 0.0, "standard deviations must be nonnegative");
  require(!snr_db || std::isfinite(*snr_db), "SNR must be finite");
  require(missing_ratio >= 0.0 && missing_ratio < 1.0, "missing ratio must lie in [0, 1)");
  require(delta_psi >= 0.0, "delta_psi must be nonnegative");
  if (psi) require(psi->kernel_count() == kernels, "ground-truth kernel count mismatch");
}

ObservedSignalSet SyntheticGraph::observed_signals() const {
  ObservedSignalSet obs;
  obs.values = observed.select(noisy.array(), std::numeric_limits<double>::quiet_NaN()).matrix();
  obs.observed = observed;
  return obs;
}

std::vector<GraphInput> SyntheticData::inputs() const {
  std::vector<GraphInput> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back({g.graph, g.observed_signals()});
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MaskMatrix apply_mask(Index nodes, Index signals, double missing_ratio, std::uint64_t seed) {
  require(missing_ratio >= 0.0 && missing_ratio < 1.0, "missing ratio must lie in [0, 1)");
  const auto hidden = static_cast<Index>(std::llround(missing_ratio * static_cast<double>(nodes)));
  if (hidden >= nodes)
    fail(ErrorCode::invalid_argument, "missing ratio leaves a signal with no observed entry");
  std::mt19937_64 rng(seed);
  MaskMatrix mask = MaskMatrix::Constant(nodes, signals, true);
  std::vector<Index> order(static_cast<std::size_t>(nodes));
  for (Index i = 0; i < signals; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Index r = 0; r < hidden; ++r) mask(order[static_cast<std::size_t>(r)], i) = false;
  }
  return mask;
}

double nmse(const Matrix& truth, const Matrix& estimate, const MaskMatrix& observed) {
  require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols() &&
              truth.rows() == observed.rows() && truth.cols() == observed.cols(),
          "shape mismatch");
  double err = 0.0, norm = 0.0;
  for (Index i = 0; i < truth.cols(); ++i) {
    for (Index n = 0; n < truth.rows(); ++n) {
      if (observed(n, i)) continue;
      const double d = truth(n, i) - estimate(n, i);
      err += d * d;
      norm += truth(n, i) * truth(n, i);
    }
  }
  if (!(norm > 0.0)) fail(ErrorCode::invalid_argument, "degenerate ground truth");
  return err / norm;
}

Matrix mean_fill(const ObservedSignalSet& obs) {
  Matrix out = obs.values;
  for (Index i = 0; i < obs.signal_count(); ++i) {
    double sum = 0.0;
    Index count = 0;
    for (Index n = 0; n < obs.node_count(); ++n)
      if (obs.observed(n, i)) {
        sum += obs.values(n, i);
        ++count;
      }
    const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
    for (Index n = 0; n < obs.node_count(); ++n)
      if (!obs.observed(n, i)) out(n, i) = mean;
  }
  return out;
}

namespace {

KernelParamVector draw_ground_truth(const SyntheticSetup& setup) {
  if (setup.psi) return *setup.psi;
  std::mt19937_64 rng(derive_seed(setup.structure_seed, 2));
  std::normal_distribution<double> mu(setup.mu_mean, setup.mu_std);
  std::normal_distribution<double> scale(setup.scale_mean, setup.scale_std);
  Vector m(setup.kernels), s(setup.kernels);
  for (Index j = 0; j < setup.kernels; ++j) m(j) = mu(rng);
  for (Index j = 0; j < setup.kernels; ++j) s(j) = std::max(scale(rng), kMinScale);
  return {m, s};
}

KernelParamVector perturb(const KernelParamVector& psi, double delta, std::uint64_t seed) {
  if (delta == 0.0) return psi;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector dir(2 * psi.kernel_count());
  for (Index i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
  KernelParamVector out = KernelParamVector::from_flat(psi.flat() + delta * dir.normalized());
  out.clamp_scales();
  return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSetup& setup) {
  setup.validate();
  SyntheticData data;
  data.psi = draw_ground_truth(setup);
  const KernelParamVector perturbed =
      perturb(data.psi, setup.delta_psi, derive_seed(setup.seed, 400));

  std::mt19937_64 structure(derive_seed(setup.structure_seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t m = 0; m < setup.nodes.size(); ++m) {
    const Index n = setup.nodes[m];
    const Index k = setup.signals[m];
    Matrix coords(n, 2);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < 2; ++c) coords(r, c) = unit(structure);
    Graph graph = build_knn_graph(coords, setup.knn, setup.knn_scale);

    const KernelParamVector psi = m == 0 ? data.psi : perturbed;
    auto dec =
        std::make_shared<const SpectralDecomposition>(eigendecompose(normalized_laplacian(graph)));
    const Dictionary dict(dec, psi);

    std::mt19937_64 coef_rng(derive_seed(setup.seed, 100 + m));
    std::normal_distribution<double> normal;
    Matrix x = Matrix::Zero(dict.atom_count(), k);
    std::vector<Index> support(static_cast<std::size_t>(dict.atom_count()));
    for (Index i = 0; i < k; ++i) {
      std::iota(support.begin(), support.end(), Index{0});
      std::shuffle(support.begin(), support.end(), coef_rng);
      for (Index r = 0; r < setup.sparsity; ++r)
        x(support[static_cast<std::size_t>(r)], i) = setup.coefficient_scale * normal(coef_rng);
    }
    Matrix clean = dict.matrix() * x;

    double sigma = 0.0;
    Matrix noisy = clean;
    if (setup.snr_db) {
      const double power = clean.squaredNorm() / static_cast<double>(clean.size());
      sigma = std::sqrt(power / std::pow(10.0, *setup.snr_db / 10.0));
      std::mt19937_64 noise_rng(derive_seed(setup.seed, 200 + m));
      for (Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += sigma * normal(noise_rng);
    }
    log().debug("graph {}: noise sigma {:.6g}", m, sigma);

    MaskMatrix observed = apply_mask(n, k, setup.missing_ratio, derive_seed(setup.seed, 300 + m));
    data.graphs.push_back(SyntheticGraph{std::move(coords), std::move(graph), psi, std::move(x),
                                         std::move(clean), std::move(noisy), std::move(observed),
                                         sigma});
  }
  return data;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = experiment_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<RunRecord> run_cell(const ExperimentConfig& cfg, const std::string& parameter,
                                double value) {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticData data = generate_synthetic(cfg.synthetic);
  const SgklModel model = fit(data.inputs(), cfg.learner);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string hash = config_hash(cfg);
  std::vector<RunRecord> out;
  for (std::size_t m = 0; m < data.graphs.size(); ++m) {
    const auto& g = data.graphs[m];
    RunRecord r;
    r.parameter = parameter;
    r.value = value;
    r.signals = static_cast<double>(g.clean.cols());
    r.delta_psi = cfg.synthetic.delta_psi;
    r.seed = cfg.synthetic.seed;
    r.graph = static_cast<Index>(m);
    r.nmse = nmse(g.clean, reconstruct(model, r.graph), g.observed);
    r.baseline_nmse = nmse(g.clean, mean_fill(g.observed_signals()), g.observed);
    r.runtime_s = runtime;
    r.objective_initial = model.trace.front().objective;
    r.objective_final = model.trace.back().objective;
    r.outer_iterations = model.outer_iterations;
    r.config_hash = hash;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// Runs independent jobs on up to `jobs` threads; results land in job order.
template <typename Result, typename Job>
std::vector<Result> run_parallel(std::size_t count, unsigned jobs, Job job) {
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

void apply_parameter(ExperimentConfig& cfg, const std::string& parameter, double value) {
  if (parameter == "snr") cfg.synthetic.snr_db = value;
  else if (parameter == "J") cfg.learner.kernels = static_cast<Index>(std::llround(value));
  else if (parameter == "eta_s") cfg.learner.eta_s = value;
  else if (parameter == "eta_x") cfg.learner.eta_x = value;
  else if (parameter == "eta_w") cfg.learner.eta_w = value;
  else if (parameter == "eta_y") cfg.learner.eta_y = value;
  else if (parameter == "eta_c") cfg.learner.eta_c = value;
  else fail(ErrorCode::config, "unknown sweep parameter '" + parameter + "'");
}

}  // namespace

ExperimentReport run_sensitivity_sweep(const std::string& parameter,
                                       const std::vector<double>& grid,
                                       const ExperimentConfig& base,
                                       const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  ExperimentConfig probe = base;
  apply_parameter(probe, parameter, base.learner.eta_x);  // validates the name

  const std::size_t cells = grid.size() * seeds.size();
  auto results = run_parallel<std::vector<RunRecord>>(cells, jobs, [&](std::size_t c) {
    ExperimentConfig cfg = base;
    const double value = grid[c / seeds.size()];
    apply_parameter(cfg, parameter, value);
    cfg.synthetic.seed = seeds[c % seeds.size()];
    cfg.learner.seed = seeds[c % seeds.size()];
    return run_cell(cfg, parameter, value);
  });

  ExperimentReport report;
  for (auto& r : results) report.runs.insert(report.runs.end(), r.begin(), r.end());
  return report;
}

std::vector<double> moving_average3(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(v.size() - 1, i + 1);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += v[k];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double threshold_k(const std::vector<double>& ks, const std::vector<double>& joint,
                   const std::vector<double>& individual) {
  require(ks.size() == joint.size() && ks.size() == individual.size(), "curve lengths differ");
  const auto js = moving_average3(joint);
  const auto is = moving_average3(individual);
  double best = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (js[i] <= is[i]) best = std::max(best, ks[i]);
  return best;
}

ExperimentReport run_joint_vs_individual(const std::vector<double>& deltas,
                                         const std::vector<Index>& ks, const ExperimentConfig& base,
                                         const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  require(base.synthetic.nodes.size() == 2, "joint-vs-individual needs a two-graph setup");
  require(!ks.empty() && !seeds.empty(), "empty K grid or seed list");

  const std::size_t per_delta = ks.size() * seeds.size();
  const std::size_t cells = deltas.size() * per_delta;
  auto results = run_parallel<std::vector<RunRecord>>(cells, jobs, [&](std::size_t c) {
    const double delta = deltas[c / per_delta];
    const Index k = ks[(c % per_delta) / seeds.size()];
    const std::uint64_t seed = seeds[c % seeds.size()];

    ExperimentConfig cfg = base;
    cfg.synthetic.signals = {k, k};
    cfg.synthetic.delta_psi = delta;
    cfg.synthetic.seed = seed;
    cfg.learner.seed = seed;
    const std::string hash = config_hash(cfg);

    const auto start = std::chrono::steady_clock::now();
    const SyntheticData data = generate_synthetic(cfg.synthetic);
    const auto inputs = data.inputs();
    const auto& ref = data.graphs.front();

    std::vector<RunRecord> out;
    for (const char* regime : {"joint", "individual"}) {
      const bool joint = std::string(regime) == "joint";
      const SgklModel model =
          fit(joint ? inputs : std::vector<GraphInput>{inputs.front()}, cfg.learner);
      RunRecord r;
      r.parameter = "K";
      r.value = static_cast<double>(k);
      r.regime = regime;
      r.signals = static_cast<double>(k);
      r.delta_psi = delta;
      r.seed = seed;
      r.graph = 0;
      r.nmse = nmse(ref.clean, reconstruct(model, 0), ref.observed);
      r.baseline_nmse = nmse(ref.clean, mean_fill(ref.observed_signals()), ref.observed);
      r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      r.objective_initial = model.trace.front().objective;
      r.objective_final = model.trace.back().objective;
      r.outer_iterations = model.outer_iterations;
      r.config_hash = hash;
      out.push_back(std::move(r));
    }
    return out;
  });

  ExperimentReport report;
  for (auto& r : results) report.runs.insert(report.runs.end(), r.begin(), r.end());

  std::vector<double> kd(ks.begin(), ks.end());
  for (const double delta : deltas) {
    std::vector<double> joint(ks.size(), 0.0), individual(ks.size(), 0.0);
    for (const auto& r : report.runs) {
      if (r.delta_psi != delta) continue;
      const auto pos = static_cast<std::size_t>(
          std::find(kd.begin(), kd.end(), r.signals) - kd.begin());
      auto& target = r.regime == "joint" ? joint : individual;
      target[pos] += r.nmse / static_cast<double>(seeds.size());
    }
    report.thresholds.push_back({delta, threshold_k(kd, joint, individual)});
  }
  return report;
}

std::vector<AggregateRecord> ExperimentReport::aggregates() const {
  using Key = std::tuple<std::string, double, std::string, double, double, Index>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    Key key{r.parameter, r.value, r.regime, r.signals, r.delta_psi, r.graph};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<AggregateRecord> out;
  for (const auto& key : order) {
    const auto& rs = groups[key];
    AggregateRecord a;
    std::tie(a.parameter, a.value, a.regime, a.signals, a.delta_psi, a.graph) = key;
    a.count = rs.size();
    for (const auto* r : rs) {
      a.nmse_mean += r->nmse;
      a.baseline_mean += r->baseline_nmse;
    }
    a.nmse_mean /= static_cast<double>(a.count);
    a.baseline_mean /= static_cast<double>(a.count);
    double var = 0.0;
    for (const auto* r : rs) var += (r->nmse - a.nmse_mean) * (r->nmse - a.nmse_mean);
    a.nmse_std = a.count > 1 ? std::sqrt(var / static_cast<double>(a.count - 1)) : 0.0;
    out.push_back(a);
  }
  return out;
}

}  // namespace sgkl
