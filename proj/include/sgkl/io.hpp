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

#include "sgkl/experiments.hpp"
#include "sgkl/graph.hpp"
#include "sgkl/learner.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sgkl {

namespace fs = std::filesystem;

// Graph files: first line `nodes=N`, then one `i,j,weight` line per edge
// (0-based). An edge given in one direction is mirrored; an edge given in
// both directions must agree, and the larger weight is kept.
Graph load_graph_csv(const fs::path& path);
void save_graph_csv(const fs::path& path, const Graph& g);

// Signal files: rows are nodes, columns are signals. An empty cell or `NaN`
// marks a missing entry.
ObservedSignalSet load_signals_csv(const fs::path& path);
void save_signals_csv(const fs::path& path, const ObservedSignalSet& obs);

Matrix load_matrix_csv(const fs::path& path);
void save_matrix_csv(const fs::path& path, const Matrix& m);

/// One graph of a dataset directory.
struct DatasetGraph {
  GraphInput input;
  std::optional<Matrix> truth;  // clean signals, when known
};

struct Dataset {
  std::vector<DatasetGraph> graphs;
  std::optional<KernelParamVector> psi_true;

  std::vector<GraphInput> inputs() const;
};

/// Directory with `dataset.json` listing the per-graph files.
Dataset load_dataset_dir(const fs::path& dir);
void save_dataset_dir(const fs::path& dir, const Dataset& data);
Dataset dataset_from_synthetic(const SyntheticData& data);

/// Reads one graph file and one signal file and checks they agree.
DatasetGraph load_dataset(const fs::path& graph_path, const fs::path& signals_path);

struct Checkpoint {
  SgklConfig config;
  KernelParamVector psi;
  std::vector<Matrix> coefficients;
  std::vector<double> gammas;
  std::vector<TraceEntry> trace;
  int outer_iterations = 0;
  bool converged = false;
};

/// model.json plus coefficients_<m>.csv and descent_trace.csv.
void save_checkpoint(const fs::path& dir, const SgklModel& model);
Checkpoint load_checkpoint(const fs::path& dir);

/// Rebuilds a usable model from a checkpoint and the data it was fitted on.
SgklModel restore_model(const Checkpoint& cp, const std::vector<GraphInput>& data);

/// `iter,f,grad_norm,step` rows.
void save_descent_trace_csv(const fs::path& path, const std::vector<DescentStep>& trace);

enum class ReportFormat { csv, json };
ReportFormat parse_report_format(const std::string& name);

/// Long-format report: run rows, aggregate rows, threshold rows. Wall-clock
/// runtimes are written only with `with_timing`, so that equal inputs give
/// byte-identical files.
void write_report(const fs::path& path, const ExperimentReport& report, ReportFormat format,
                  bool with_timing = false);
ExperimentReport read_report(const fs::path& path, ReportFormat format);
std::string report_to_string(const ExperimentReport& report, ReportFormat format,
                             bool with_timing = false);
ExperimentReport report_from_string(const std::string& text, ReportFormat format);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace sgkl
