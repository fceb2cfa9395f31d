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

#include "oracles.hpp"

#include "sgkl/experiments.hpp"
#include "sgkl/kernel_optimizer.hpp"
#include "sgkl/learner.hpp"

#include <doctest.h>

#include <cmath>

using namespace sgkl;

namespace {

SyntheticSetup small_setup(Index n, Index k, Index kernels, std::uint64_t seed) {
  SyntheticSetup s;
  s.nodes = {n};
  s.signals = {k};
  s.knn = 4;
  s.knn_scale = 0.3;
  s.kernels = kernels;
  s.sparsity = 4;
  s.snr_db = 20.0;
  s.seed = seed;
  return s;
}

SgklConfig small_config(Index kernels, std::uint64_t seed) {
  SgklConfig c;
  c.kernels = kernels;
  c.outer_max_iters = 8;
  c.seed = seed;
  return c;
}

void check_monotone(const SgklModel& m) {
  REQUIRE(!m.trace.empty());
  CHECK(m.trace.front().stage == "init");
  for (std::size_t t = 1; t < m.trace.size(); ++t)
    CHECK(m.trace[t].objective <= m.trace[t - 1].objective * (1.0 + 1e-9));
}

}  // namespace

TEST_CASE("config validation") {
  SgklConfig c;
  c.validate();
  c.kernels = 0;
  CHECK_THROWS(c.validate());
  c = SgklConfig{};
  c.eta_y = -1.0;
  CHECK_THROWS(c.validate());
  c = SgklConfig{};
  c.mu_lo = 3.0;
  CHECK_THROWS(c.validate());
  c = SgklConfig{};
  c.admm.rho = 0.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("initial kernels lie in the configured box") {
  SgklConfig c;
  c.kernels = 50;
  const auto psi = draw_initial_psi(c);
  CHECK(psi.mu().minCoeff() >= c.mu_lo);
  CHECK(psi.mu().maxCoeff() <= c.mu_hi);
  CHECK(psi.scale().minCoeff() >= 0.5 * c.nominal_scale);
  CHECK(psi.scale().maxCoeff() <= 1.5 * c.nominal_scale);
  CHECK(draw_initial_psi(c).flat() == psi.flat());
}

TEST_CASE("fit: zero signals give zero coefficients and the nominal kernels") {
  auto data = generate_synthetic(small_setup(20, 6, 2, 1));
  auto inputs = data.inputs();
  inputs[0].signals.values.setZero();
  const SgklConfig cfg = small_config(2, 3);
  const SgklModel m = fit(inputs, cfg);
  CHECK(m.graphs[0].x.cwiseAbs().maxCoeff() == 0.0);
  CHECK((m.psi.flat() - KernelParamVector::nominal(2, cfg.nominal_scale).flat()).norm() <= 1e-6);
  CHECK(total_objective(m) <= 1e-10);
  CHECK(reconstruct(m, 0).cwiseAbs().maxCoeff() == 0.0);
  check_monotone(m);
}

TEST_CASE("objective: breakdown matches the dense oracle") {
  const auto data = generate_synthetic(small_setup(15, 6, 2, 2));
  SgklConfig cfg = small_config(2, 4);
  cfg.outer_max_iters = 2;
  const SgklModel m = fit(data.inputs(), cfg);
  const auto& g = m.graphs[0];
  const double expect_terms = oracle::coefficient_objective(
      g.dict->matrix(), g.laplacian, g.obs.masked_values(), g.obs.observed, g.coupling, g.x,
      {cfg.eta_x, cfg.eta_w, cfg.eta_y, cfg.eta_c});
  const double prior = m.psi.mu().squaredNorm() +
                       cfg.eta_s * (m.psi.scale().array() - cfg.nominal_scale).square().sum();
  CHECK(total_objective(m) == doctest::Approx(expect_terms + prior).epsilon(1e-10));
  CHECK(m.trace.back().objective == doctest::Approx(total_objective(m)).epsilon(1e-12));
}

TEST_CASE("objective: without smoothness and coupling it splits into kernel and l1 parts") {
  const auto data = generate_synthetic(small_setup(15, 6, 2, 3));
  SgklConfig cfg = small_config(2, 5);
  cfg.eta_y = 0.0;
  cfg.eta_c = 0.0;
  cfg.outer_max_iters = 1;
  const SgklModel m = fit(data.inputs(), cfg);
  const auto& g = m.graphs[0];
  const double f = objective_psi(m.psi, {{g.dec, &g.obs, &g.x}}, cfg.prior(), cfg.eta_w, 0.0);
  CHECK(total_objective(m) == doctest::Approx(f + cfg.eta_x * g.x.lpNorm<1>()).epsilon(1e-12));
}

TEST_CASE("fit: objective trace is non-increasing and the fit is deterministic") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SyntheticSetup s = small_setup(20, 10, 2, seed);
    s.nodes = {20, 22};
    s.signals = {10, 12};
    const auto data = generate_synthetic(s);
    const SgklModel a = fit(data.inputs(), small_config(2, seed));
    check_monotone(a);
    const SgklModel b = fit(data.inputs(), small_config(2, seed));
    CHECK(a.psi.flat() == b.psi.flat());
    CHECK(a.graphs[1].x == b.graphs[1].x);
    CHECK(a.trace.size() == b.trace.size());
    CHECK(a.trace.back().objective == b.trace.back().objective);
  }
}

TEST_CASE("fit: one noiseless fully observed signal is matched closely") {
  // default weights; the generating kernel sits at the nominal scale so the
  // scale prior does not pull away from it
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SyntheticSetup s = small_setup(30, 1, 1, seed);
    s.snr_db.reset();
    s.missing_ratio = 0.0;
    s.psi = KernelParamVector(Vector::Constant(1, 0.3), Vector::Constant(1, 0.4));
    const auto data = generate_synthetic(s);
    SgklConfig cfg;
    cfg.kernels = 1;
    cfg.seed = seed + 100;
    const SgklModel m = fit(data.inputs(), cfg);
    const Matrix& y = data.graphs[0].noisy;
    const double fid = (reconstruct(m, 0) - y).squaredNorm();
    CHECK(fid <= 1e-4 * y.squaredNorm());
  }
}

TEST_CASE("reconstruct: tiny sparsity weight reproduces observed entries") {
  SyntheticSetup s = small_setup(16, 4, 2, 6);
  s.snr_db.reset();
  s.missing_ratio = 0.0;
  const auto data = generate_synthetic(s);
  SgklConfig cfg = small_config(2, 7);
  cfg.eta_x = 1e-3;
  // the normalized coupling term carries a ridge |x_i|^2 part that would keep
  // the fit away from the data, so it is switched off here
  cfg.eta_c = 0.0;
  cfg.admm.max_iters = 20000;
  const SgklModel m = fit(data.inputs(), cfg);
  const Matrix& y = data.graphs[0].noisy;
  CHECK((reconstruct(m, 0) - y).norm() <= 1e-3 * y.norm());
  CHECK_THROWS(reconstruct(m, 1));
}

TEST_CASE("fit: resume continues from a model") {
  const auto data = generate_synthetic(small_setup(18, 8, 2, 7));
  SgklConfig cfg = small_config(2, 8);
  cfg.outer_max_iters = 2;
  const SgklModel first = fit(data.inputs(), cfg);
  const SgklModel second = fit(data.inputs(), cfg, &first);
  CHECK(second.trace.front().objective <= first.trace.back().objective * (1.0 + 1e-9));
  check_monotone(second);

  SgklConfig other = cfg;
  other.kernels = 3;
  CHECK_THROWS(fit(data.inputs(), other, &first));
}

TEST_CASE("fit: bad inputs") {
  CHECK_THROWS_WITH(fit({}, SgklConfig{}), doctest::Contains("empty dataset"));
  auto inputs = generate_synthetic(small_setup(12, 3, 1, 8)).inputs();
  inputs[0].signals.observed.col(1).setConstant(false);
  CHECK_THROWS(fit(inputs, small_config(1, 1)));
}

TEST_CASE("fit: non-finite objective aborts with a numerical error") {
  const auto data = generate_synthetic(small_setup(12, 3, 1, 9));
  SgklConfig cfg = small_config(1, 1);
  cfg.eta_w = 1e308;
  try {
    fit(data.inputs(), cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numerical);
  }
}

TEST_CASE("inductive: zero test signal gives zero coefficients") {
  const auto data = generate_synthetic(small_setup(20, 8, 2, 10));
  SgklConfig cfg = small_config(2, 11);
  cfg.eta_c = 0.0;
  const SgklModel m = fit(data.inputs(), cfg);
  ObservedSignalSet test{Matrix::Zero(20, 2), MaskMatrix::Constant(20, 2, true)};
  test.observed(3, 1) = false;
  const auto r = infer_inductive(m, 0, test);
  CHECK(r.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.reconstruction.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inductive: training signals reproduce their transductive coefficients") {
  const auto data = generate_synthetic(small_setup(20, 8, 2, 11));
  SgklConfig cfg = small_config(2, 12);
  cfg.eta_c = 0.0;
  cfg.admm.max_iters = 20000;
  cfg.outer_max_iters = 20;
  const SgklModel m = fit(data.inputs(), cfg);
  const auto r = infer_inductive(m, 0, m.graphs[0].obs);
  const Matrix trans = reconstruct(m, 0);
  CHECK((r.reconstruction - trans).norm() <= 1e-3 * trans.norm());
  CHECK((r.coefficients - m.graphs[0].x).norm() <= 1e-2 * m.graphs[0].x.norm());
  // the learned kernels are untouched
  CHECK(m.graphs[0].dict->psi().flat() == m.psi.flat());
}

TEST_CASE("inductive: a fully observed signal fits at least as well as a half-masked one") {
  const auto data = generate_synthetic(small_setup(24, 10, 2, 12));
  const SgklModel m = fit(data.inputs(), small_config(2, 13));
  auto fresh = small_setup(24, 6, 2, 99);
  fresh.psi = m.psi;
  fresh.missing_ratio = 0.0;
  const auto test_data = generate_synthetic(fresh);
  const Matrix& y = test_data.graphs[0].noisy;

  ObservedSignalSet full{y, MaskMatrix::Constant(24, 6, true)};
  ObservedSignalSet half{y, apply_mask(24, 6, 0.5, 5)};
  const auto rf = infer_inductive(m, 0, full);
  const auto rh = infer_inductive(m, 0, half);
  for (Index i = 0; i < 6; ++i)
    CHECK((rf.reconstruction.col(i) - y.col(i)).norm() <=
          (rh.reconstruction.col(i) - y.col(i)).norm() + 1e-12);
}

TEST_CASE("inductive: node-count mismatch") {
  const auto data = generate_synthetic(small_setup(20, 4, 1, 13));
  SgklConfig cfg = small_config(1, 1);
  cfg.outer_max_iters = 1;
  const SgklModel m = fit(data.inputs(), cfg);
  ObservedSignalSet test{Matrix::Zero(19, 1), MaskMatrix::Constant(19, 1, true)};
  CHECK_THROWS_WITH(infer_inductive(m, 0, test), doctest::Contains("node-count mismatch"));
}
