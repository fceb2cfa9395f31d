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

#include "sgkl/sgkl.h"

#include "sgkl/config.hpp"
#include "sgkl/experiments.hpp"
#include "sgkl/io.hpp"
#include "sgkl/learner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

struct sgkl_dataset {
  sgkl::Dataset data;
};

struct sgkl_model {
  sgkl::SgklModel model;
};

struct sgkl_report {
  sgkl::ExperimentReport report;
};

namespace {

thread_local std::string last_error;

sgkl_status set_error(sgkl_status status, const std::string& message) {
  last_error = message;
  return status;
}

sgkl_status to_status(sgkl::ErrorCode code) {
  switch (code) {
    case sgkl::ErrorCode::invalid_argument:
      return SGKL_ERR_INVALID;
    case sgkl::ErrorCode::config:
      return SGKL_ERR_CONFIG;
    case sgkl::ErrorCode::numerical:
      return SGKL_ERR_NUMERICAL;
    case sgkl::ErrorCode::io:
      return SGKL_ERR_IO;
  }
  return SGKL_ERR_INTERNAL;
}

template <class F>
sgkl_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SGKL_OK;
  } catch (const sgkl::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SGKL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SGKL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SGKL_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) sgkl::fail(sgkl::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

sgkl::ExperimentConfig parse_config(const char* text, const uint64_t* seed) {
  sgkl::ExperimentConfig cfg =
      text != nullptr ? sgkl::parse_experiment_config(text) : sgkl::ExperimentConfig{};
  if (seed != nullptr) {
    cfg.learner.seed = *seed;
    cfg.synthetic.seed = *seed;
  }
  return cfg;
}

const sgkl::DatasetGraph& graph_of(const sgkl_dataset* d, size_t graph) {
  need(d, "dataset");
  if (graph >= d->data.graphs.size())
    sgkl::fail(sgkl::ErrorCode::invalid_argument, "graph index out of range");
  return d->data.graphs[graph];
}

const sgkl::GraphState& state_of(const sgkl_model* m, size_t graph) {
  need(m, "model");
  if (graph >= m->model.graphs.size())
    sgkl::fail(sgkl::ErrorCode::invalid_argument, "graph index out of range");
  return m->model.graphs[graph];
}

void copy_out(const sgkl::Matrix& m, double* out, size_t len) {
  need(out, "output buffer");
  if (len != static_cast<size_t>(m.size()))
    sgkl::fail(sgkl::ErrorCode::invalid_argument,
               "output buffer must hold " + std::to_string(m.size()) + " values");
  std::memcpy(out, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
}

sgkl::ObservedSignalSet signals_from_values(const double* values, size_t nodes, size_t signals) {
  need(values, "values");
  sgkl::ObservedSignalSet obs;
  obs.values = Eigen::Map<const sgkl::Matrix>(values, static_cast<sgkl::Index>(nodes),
                                              static_cast<sgkl::Index>(signals));
  obs.observed = obs.values.array().isFinite();
  return obs;
}

void write_dump(const char* dir, const sgkl::SgklConfig& cfg, const std::string& message) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(dir) / "diagnostic.json";
  nlohmann::json j = {{"error", message}, {"config", sgkl::learner_config_to_json(cfg)}};
  sgkl::write_text_file(path, j.dump(2) + "\n");
  last_error = message + " (diagnostics in " + path.string() + ")";
}

}  // namespace

extern "C" {

const char* sgkl_last_error(void) { return last_error.c_str(); }

const char* sgkl_version(void) { return "0.1.0"; }

sgkl_status sgkl_config_validate(const char* config_json) {
  return guarded([&] {
    need(config_json, "config");
    const auto cfg = sgkl::parse_experiment_config(config_json);
    cfg.learner.validate();
  });
}

sgkl_status sgkl_dataset_generate(const char* config_json, const uint64_t* seed,
                                  sgkl_dataset** out) {
  return guarded([&] {
    need(out, "out");
    const auto cfg = parse_config(config_json, seed);
    const auto synthetic = sgkl::generate_synthetic(cfg.synthetic);
    *out = new sgkl_dataset{sgkl::dataset_from_synthetic(synthetic)};
  });
}

sgkl_status sgkl_dataset_load_dir(const char* dir, sgkl_dataset** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new sgkl_dataset{sgkl::load_dataset_dir(dir)};
  });
}

sgkl_status sgkl_dataset_load_files(const char* graph_csv, const char* signals_csv,
                                    sgkl_dataset** out) {
  return guarded([&] {
    need(graph_csv, "graph path");
    need(signals_csv, "signals path");
    need(out, "out");
    sgkl::Dataset d;
    d.graphs.push_back(sgkl::load_dataset(graph_csv, signals_csv));
    *out = new sgkl_dataset{std::move(d)};
  });
}

sgkl_status sgkl_dataset_save_dir(const sgkl_dataset* data, const char* dir) {
  return guarded([&] {
    need(data, "dataset");
    need(dir, "dir");
    sgkl::save_dataset_dir(dir, data->data);
  });
}

sgkl_status sgkl_dataset_graph_count(const sgkl_dataset* data, size_t* count) {
  return guarded([&] {
    need(data, "dataset");
    need(count, "count");
    *count = data->data.graphs.size();
  });
}

sgkl_status sgkl_dataset_shape(const sgkl_dataset* data, size_t graph, size_t* nodes,
                               size_t* signals, double* observed_fraction) {
  return guarded([&] {
    const auto& g = graph_of(data, graph).input.signals;
    if (nodes) *nodes = static_cast<size_t>(g.node_count());
    if (signals) *signals = static_cast<size_t>(g.signal_count());
    if (observed_fraction)
      *observed_fraction =
          static_cast<double>(g.observed.count()) / static_cast<double>(g.observed.size());
  });
}

sgkl_status sgkl_dataset_signals(const sgkl_dataset* data, size_t graph, double* out, size_t len) {
  return guarded([&] {
    const auto& obs = graph_of(data, graph).input.signals;
    const sgkl::Matrix values = obs.observed.select(obs.values, std::nan(""));
    copy_out(values, out, len);
  });
}

sgkl_status sgkl_dataset_has_truth(const sgkl_dataset* data, size_t graph, int* has_truth) {
  return guarded([&] {
    need(has_truth, "has_truth");
    *has_truth = graph_of(data, graph).truth.has_value() ? 1 : 0;
  });
}

void sgkl_dataset_free(sgkl_dataset* data) { delete data; }

sgkl_status sgkl_fit(const sgkl_dataset* data, const char* config_json, const uint64_t* seed,
                     const sgkl_model* resume, const char* dump_dir, sgkl_model** out) {
  sgkl::SgklConfig learner;
  const sgkl_status status = guarded([&] {
    need(data, "dataset");
    need(out, "out");
    learner = parse_config(config_json, seed).learner;
    auto model = sgkl::fit(data->data.inputs(), learner, resume ? &resume->model : nullptr);
    *out = new sgkl_model{std::move(model)};
  });
  if (status == SGKL_ERR_NUMERICAL && dump_dir != nullptr) {
    const std::string message = last_error;
    try {
      write_dump(dump_dir, learner, message);
    } catch (const std::exception& e) {
      last_error = message + " (could not write diagnostics: " + e.what() + ")";
    }
  }
  return status;
}

sgkl_status sgkl_model_save(const sgkl_model* model, const char* dir) {
  return guarded([&] {
    need(model, "model");
    need(dir, "dir");
    sgkl::save_checkpoint(dir, model->model);
  });
}

sgkl_status sgkl_model_load(const char* dir, const sgkl_dataset* data, sgkl_model** out) {
  return guarded([&] {
    need(dir, "dir");
    need(data, "dataset");
    need(out, "out");
    const sgkl::Checkpoint cp = sgkl::load_checkpoint(dir);
    *out = new sgkl_model{sgkl::restore_model(cp, data->data.inputs())};
  });
}

sgkl_status sgkl_model_kernel_count(const sgkl_model* model, size_t* kernels) {
  return guarded([&] {
    need(model, "model");
    need(kernels, "kernels");
    *kernels = static_cast<size_t>(model->model.psi.kernel_count());
  });
}

sgkl_status sgkl_model_psi(const sgkl_model* model, double* mu, double* s) {
  return guarded([&] {
    need(model, "model");
    need(mu, "mu");
    need(s, "s");
    const auto& psi = model->model.psi;
    for (sgkl::Index j = 0; j < psi.kernel_count(); ++j) {
      mu[j] = psi.mu()(j);
      s[j] = psi.scale()(j);
    }
  });
}

sgkl_status sgkl_model_summary(const sgkl_model* model, int* outer_iterations, int* converged,
                               double* objective) {
  return guarded([&] {
    need(model, "model");
    if (outer_iterations) *outer_iterations = model->model.outer_iterations;
    if (converged) *converged = model->model.converged ? 1 : 0;
    if (objective) *objective = sgkl::total_objective(model->model);
  });
}

sgkl_status sgkl_model_trace_length(const sgkl_model* model, size_t* len) {
  return guarded([&] {
    need(model, "model");
    need(len, "len");
    *len = model->model.trace.size();
  });
}

sgkl_status sgkl_model_trace(const sgkl_model* model, double* objectives, size_t len) {
  return guarded([&] {
    need(model, "model");
    need(objectives, "objectives");
    const auto& trace = model->model.trace;
    if (len != trace.size())
      sgkl::fail(sgkl::ErrorCode::invalid_argument, "trace buffer length mismatch");
    for (size_t i = 0; i < len; ++i) objectives[i] = trace[i].objective;
  });
}

sgkl_status sgkl_model_reconstruct(const sgkl_model* model, size_t graph, double* out,
                                   size_t len) {
  return guarded([&] {
    state_of(model, graph);
    copy_out(sgkl::reconstruct(model->model, static_cast<sgkl::Index>(graph)), out, len);
  });
}

sgkl_status sgkl_model_reconstruct_csv(const sgkl_model* model, size_t graph, const char* path) {
  return guarded([&] {
    state_of(model, graph);
    need(path, "path");
    sgkl::save_matrix_csv(path, sgkl::reconstruct(model->model, static_cast<sgkl::Index>(graph)));
  });
}

sgkl_status sgkl_model_nmse(const sgkl_model* model, const sgkl_dataset* truth, size_t graph,
                            double* nmse, double* baseline_nmse) {
  return guarded([&] {
    const auto& g = state_of(model, graph);
    const auto& d = graph_of(truth, graph);
    if (!d.truth) sgkl::fail(sgkl::ErrorCode::invalid_argument, "dataset has no clean signals");
    if (d.truth->rows() != g.obs.node_count() || d.truth->cols() != g.obs.signal_count())
      sgkl::fail(sgkl::ErrorCode::invalid_argument, "dataset does not match the model");
    if (nmse)
      *nmse = sgkl::nmse(*d.truth, sgkl::reconstruct(model->model, static_cast<sgkl::Index>(graph)),
                         g.obs.observed);
    if (baseline_nmse)
      *baseline_nmse = sgkl::nmse(*d.truth, sgkl::mean_fill(g.obs), g.obs.observed);
  });
}

sgkl_status sgkl_infer(const sgkl_model* model, size_t graph, const double* values, size_t nodes,
                       size_t signals, double* out) {
  return guarded([&] {
    state_of(model, graph);
    const auto obs = signals_from_values(values, nodes, signals);
    const auto r = sgkl::infer_inductive(model->model, static_cast<sgkl::Index>(graph), obs);
    copy_out(r.reconstruction, out, nodes * signals);
  });
}

sgkl_status sgkl_infer_csv(const sgkl_model* model, size_t graph, const char* signals_csv,
                           const char* out_csv) {
  return guarded([&] {
    state_of(model, graph);
    need(signals_csv, "signals path");
    need(out_csv, "output path");
    const auto obs = sgkl::load_signals_csv(signals_csv);
    const auto r = sgkl::infer_inductive(model->model, static_cast<sgkl::Index>(graph), obs);
    sgkl::save_matrix_csv(out_csv, r.reconstruction);
  });
}

void sgkl_model_free(sgkl_model* model) { delete model; }

sgkl_status sgkl_run_sweep(const char* config_json, const char* parameter, const double* grid,
                           size_t grid_len, const uint64_t* seeds, size_t seed_count,
                           unsigned jobs, sgkl_report** out) {
  return guarded([&] {
    need(parameter, "parameter");
    need(out, "out");
    if (grid_len > 0) need(grid, "grid");
    if (seed_count > 0) need(seeds, "seeds");
    const auto cfg = parse_config(config_json, nullptr);
    auto report = sgkl::run_sensitivity_sweep(parameter, {grid, grid + grid_len}, cfg,
                                              {seeds, seeds + seed_count}, jobs);
    *out = new sgkl_report{std::move(report)};
  });
}

sgkl_status sgkl_run_joint_vs_individual(const char* config_json, const double* deltas,
                                         size_t delta_count, const size_t* ks, size_t k_count,
                                         const uint64_t* seeds, size_t seed_count, unsigned jobs,
                                         sgkl_report** out) {
  return guarded([&] {
    need(out, "out");
    if (delta_count > 0) need(deltas, "deltas");
    if (k_count > 0) need(ks, "ks");
    if (seed_count > 0) need(seeds, "seeds");
    const auto cfg = parse_config(config_json, nullptr);
    std::vector<sgkl::Index> k_grid;
    for (size_t i = 0; i < k_count; ++i) k_grid.push_back(static_cast<sgkl::Index>(ks[i]));
    auto report = sgkl::run_joint_vs_individual({deltas, deltas + delta_count}, k_grid, cfg,
                                                {seeds, seeds + seed_count}, jobs);
    *out = new sgkl_report{std::move(report)};
  });
}

sgkl_status sgkl_report_write(const sgkl_report* report, const char* path, const char* format,
                              int with_timing) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    need(format, "format");
    sgkl::write_report(path, report->report, sgkl::parse_report_format(format), with_timing != 0);
  });
}

sgkl_status sgkl_report_render(const sgkl_report* report, const char* format, int with_timing,
                               char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(report, "report");
    need(format, "format");
    const std::string text = sgkl::report_to_string(
        report->report, sgkl::parse_report_format(format), with_timing != 0);
    if (needed) *needed = text.size() + 1;
    if (buf != nullptr && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

sgkl_status sgkl_report_load(const char* path, const char* format, sgkl_report** out) {
  return guarded([&] {
    need(path, "path");
    need(format, "format");
    need(out, "out");
    *out = new sgkl_report{sgkl::read_report(path, sgkl::parse_report_format(format))};
  });
}

sgkl_status sgkl_report_run_count(const sgkl_report* report, size_t* count) {
  return guarded([&] {
    need(report, "report");
    need(count, "count");
    *count = report->report.runs.size();
  });
}

sgkl_status sgkl_report_run(const sgkl_report* report, size_t index, double* value, double* nmse,
                            double* baseline_nmse, uint64_t* seed) {
  return guarded([&] {
    need(report, "report");
    if (index >= report->report.runs.size())
      sgkl::fail(sgkl::ErrorCode::invalid_argument, "run index out of range");
    const auto& r = report->report.runs[index];
    if (value) *value = r.value;
    if (nmse) *nmse = r.nmse;
    if (baseline_nmse) *baseline_nmse = r.baseline_nmse;
    if (seed) *seed = r.seed;
  });
}

sgkl_status sgkl_report_threshold_count(const sgkl_report* report, size_t* count) {
  return guarded([&] {
    need(report, "report");
    need(count, "count");
    *count = report->report.thresholds.size();
  });
}

sgkl_status sgkl_report_threshold(const sgkl_report* report, size_t index, double* delta_psi,
                                  double* threshold_k) {
  return guarded([&] {
    need(report, "report");
    if (index >= report->report.thresholds.size())
      sgkl::fail(sgkl::ErrorCode::invalid_argument, "threshold index out of range");
    const auto& t = report->report.thresholds[index];
    if (delta_psi) *delta_psi = t.delta_psi;
    if (threshold_k) *threshold_k = t.threshold_k;
  });
}

void sgkl_report_free(sgkl_report* report) { delete report; }

}  // extern "C"
