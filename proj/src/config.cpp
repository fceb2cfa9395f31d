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

#include "sgkl/config.hpp"

#include <set>

namespace sgkl {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* section) {
  if (!j.is_object()) fail(ErrorCode::config, std::string(section) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key))
      fail(ErrorCode::config, std::string("unknown key '") + key + "' in " + section);
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

json psi_json(const KernelParamVector& psi) {
  return {{"mu", std::vector<double>(psi.mu().begin(), psi.mu().end())},
          {"s", std::vector<double>(psi.scale().begin(), psi.scale().end())}};
}

}  // namespace

json learner_config_to_json(const SgklConfig& c) {
  return {
      {"kernels", c.kernels},
      {"eta_s", c.eta_s},
      {"eta_x", c.eta_x},
      {"eta_w", c.eta_w},
      {"eta_y", c.eta_y},
      {"eta_c", c.eta_c},
      {"nominal_scale", c.nominal_scale},
      {"gamma", c.gamma ? json(*c.gamma) : json(nullptr)},
      {"gamma_normalize_by_common_count", c.gamma_normalize_by_common_count},
      {"signal_laplacian",
       c.signal_laplacian == SignalLaplacianKind::normalized ? "normalized" : "combinatorial"},
      {"admm",
       {{"rho", c.admm.rho},
        {"max_iters", c.admm.max_iters},
        {"tol_primal", c.admm.tol_primal},
        {"tol_dual", c.admm.tol_dual},
        {"adaptive_rho", c.admm.adaptive_rho}}},
      {"descent",
       {{"precondition", c.descent.precondition},
        {"curvature_refresh", c.descent.curvature_refresh},
        {"initial_step", c.descent.initial_step},
        {"backtrack", c.descent.backtrack},
        {"sufficient_decrease", c.descent.sufficient_decrease},
        {"max_steps", c.descent.max_steps},
        {"max_backtracks", c.descent.max_backtracks},
        {"grad_tol", c.descent.grad_tol}}},
      {"outer_max_iters", c.outer_max_iters},
      {"outer_tol", c.outer_tol},
      {"seed", c.seed},
      {"mu_range", {c.mu_lo, c.mu_hi}},
      {"scale_range_factor", {c.scale_lo_factor, c.scale_hi_factor}},
  };
}

SgklConfig learner_config_from_json(const json& j, SgklConfig c) {
  try {
    reject_unknown(j,
                   {"kernels", "eta_s", "eta_x", "eta_w", "eta_y", "eta_c", "nominal_scale",
                    "gamma", "gamma_normalize_by_common_count", "signal_laplacian", "admm",
                    "descent", "outer_max_iters", "outer_tol", "seed", "mu_range",
                    "scale_range_factor"},
                   "learner");
    read(j, "kernels", c.kernels);
    read(j, "eta_s", c.eta_s);
    read(j, "eta_x", c.eta_x);
    read(j, "eta_w", c.eta_w);
    read(j, "eta_y", c.eta_y);
    read(j, "eta_c", c.eta_c);
    read(j, "nominal_scale", c.nominal_scale);
    if (j.contains("gamma")) {
      if (j["gamma"].is_null()) c.gamma.reset();
      else c.gamma = j["gamma"].get<double>();
    }
    read(j, "gamma_normalize_by_common_count", c.gamma_normalize_by_common_count);
    if (j.contains("signal_laplacian")) {
      const auto kind = j["signal_laplacian"].get<std::string>();
      if (kind == "normalized") c.signal_laplacian = SignalLaplacianKind::normalized;
      else if (kind == "combinatorial") c.signal_laplacian = SignalLaplacianKind::combinatorial;
      else fail(ErrorCode::config, "signal_laplacian must be 'normalized' or 'combinatorial'");
    }
    if (j.contains("admm")) {
      const json& a = j["admm"];
      reject_unknown(a, {"rho", "max_iters", "tol_primal", "tol_dual", "adaptive_rho"}, "admm");
      read(a, "rho", c.admm.rho);
      read(a, "max_iters", c.admm.max_iters);
      read(a, "tol_primal", c.admm.tol_primal);
      read(a, "tol_dual", c.admm.tol_dual);
      read(a, "adaptive_rho", c.admm.adaptive_rho);
    }
    if (j.contains("descent")) {
      const json& d = j["descent"];
      reject_unknown(d,
                     {"precondition", "curvature_refresh", "initial_step", "backtrack",
                      "sufficient_decrease", "max_steps", "max_backtracks", "grad_tol"},
                     "descent");
      read(d, "precondition", c.descent.precondition);
      read(d, "curvature_refresh", c.descent.curvature_refresh);
      read(d, "initial_step", c.descent.initial_step);
      read(d, "backtrack", c.descent.backtrack);
      read(d, "sufficient_decrease", c.descent.sufficient_decrease);
      read(d, "max_steps", c.descent.max_steps);
      read(d, "max_backtracks", c.descent.max_backtracks);
      read(d, "grad_tol", c.descent.grad_tol);
    }
    read(j, "outer_max_iters", c.outer_max_iters);
    read(j, "outer_tol", c.outer_tol);
    read(j, "seed", c.seed);
    if (j.contains("mu_range")) {
      const auto r = j["mu_range"].get<std::vector<double>>();
      if (r.size() != 2) fail(ErrorCode::config, "mu_range needs two values");
      c.mu_lo = r[0];
      c.mu_hi = r[1];
    }
    if (j.contains("scale_range_factor")) {
      const auto r = j["scale_range_factor"].get<std::vector<double>>();
      if (r.size() != 2) fail(ErrorCode::config, "scale_range_factor needs two values");
      c.scale_lo_factor = r[0];
      c.scale_hi_factor = r[1];
    }
    c.validate();
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("bad learner config: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return c;
}

json synthetic_setup_to_json(const SyntheticSetup& s) {
  return {
      {"nodes", s.nodes},
      {"signals", s.signals},
      {"knn", s.knn},
      {"knn_scale", s.knn_scale},
      {"kernels", s.kernels},
      {"psi", s.psi ? psi_json(*s.psi) : json(nullptr)},
      {"mu_mean", s.mu_mean},
      {"mu_std", s.mu_std},
      {"scale_mean", s.scale_mean},
      {"scale_std", s.scale_std},
      {"sparsity", s.sparsity},
      {"coefficient_scale", s.coefficient_scale},
      {"snr_db", s.snr_db ? json(*s.snr_db) : json(nullptr)},
      {"missing_ratio", s.missing_ratio},
      {"delta_psi", s.delta_psi},
      {"structure_seed", s.structure_seed},
      {"seed", s.seed},
  };
}

SyntheticSetup synthetic_setup_from_json(const json& j, SyntheticSetup s) {
  try {
    reject_unknown(j,
                   {"nodes", "signals", "knn", "knn_scale", "kernels", "psi", "mu_mean", "mu_std",
                    "scale_mean", "scale_std", "sparsity", "coefficient_scale", "snr_db",
                    "missing_ratio", "delta_psi", "structure_seed", "seed"},
                   "synthetic");
    read(j, "nodes", s.nodes);
    read(j, "signals", s.signals);
    read(j, "knn", s.knn);
    read(j, "knn_scale", s.knn_scale);
    read(j, "kernels", s.kernels);
    if (j.contains("psi")) {
      if (j["psi"].is_null()) s.psi.reset();
      else s.psi = psi_from_json(j["psi"].dump());
    }
    read(j, "mu_mean", s.mu_mean);
    read(j, "mu_std", s.mu_std);
    read(j, "scale_mean", s.scale_mean);
    read(j, "scale_std", s.scale_std);
    read(j, "sparsity", s.sparsity);
    read(j, "coefficient_scale", s.coefficient_scale);
    if (j.contains("snr_db")) {
      if (j["snr_db"].is_null()) s.snr_db.reset();
      else s.snr_db = j["snr_db"].get<double>();
    }
    read(j, "missing_ratio", s.missing_ratio);
    read(j, "delta_psi", s.delta_psi);
    read(j, "structure_seed", s.structure_seed);
    read(j, "seed", s.seed);
    s.validate();
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("bad synthetic config: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return s;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  return {{"learner", learner_config_to_json(cfg.learner)},
          {"synthetic", synthetic_setup_to_json(cfg.synthetic)}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  reject_unknown(j, {"learner", "synthetic"}, "config");
  ExperimentConfig cfg;
  if (j.contains("learner")) cfg.learner = learner_config_from_json(j["learner"]);
  if (j.contains("synthetic")) cfg.synthetic = synthetic_setup_from_json(j["synthetic"]);
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  return experiment_config_from_json(j);
}

}  // namespace sgkl
