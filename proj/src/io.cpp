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

#include "sgkl/io.hpp"

#include "sgkl/config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sgkl {

using nlohmann::json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::io, path.string() + ": line " + std::to_string(line) + ": " + what);
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "NAN") return std::nullopt;
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto res = std::from_chars(cell.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument(cell);
  return v;
}

double parse_number(const fs::path& path, std::size_t line, const std::string& cell) {
  try {
    auto v = parse_cell(cell);
    if (v) return *v;
  } catch (const std::invalid_argument&) {
  }
  parse_error(path, line, "expected a number, got '" + cell + "'");
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

// Rows of optional numbers; every row must have the same width.
std::vector<std::vector<std::optional<double>>> read_table(const fs::path& path) {
  std::vector<std::vector<std::optional<double>>> rows;
  const auto lines = read_lines(path);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto cells = split(lines[l]);
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      try {
        row.push_back(parse_cell(c));
      } catch (const std::invalid_argument&) {
        parse_error(path, l + 1, "expected a number or an empty cell, got '" + c + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      parse_error(path, l + 1,
                  "expected " + std::to_string(rows.front().size()) + " columns, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::io, path.string() + ": empty file");
  return rows;
}

}  // namespace

Graph load_graph_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) fail(ErrorCode::io, path.string() + ": empty file");
  const std::string header = trim(lines.front());
  if (header.rfind("nodes=", 0) != 0) parse_error(path, 1, "expected header 'nodes=N'");
  const double nd = parse_number(path, 1, header.substr(6));
  if (nd < 1 || nd != std::floor(nd)) parse_error(path, 1, "node count must be a positive integer");
  const auto n = static_cast<Index>(nd);

  Matrix w = Matrix::Zero(n, n);
  Matrix given = Matrix::Zero(n, n);  // 1 where (i, j) was listed explicitly
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) continue;
    const auto cells = split(lines[l]);
    if (cells.size() != 3) parse_error(path, l + 1, "expected 'i,j,weight'");
    const double i = parse_number(path, l + 1, cells[0]);
    const double j = parse_number(path, l + 1, cells[1]);
    const double weight = parse_number(path, l + 1, cells[2]);
    if (i < 0 || j < 0 || i >= nd || j >= nd || i != std::floor(i) || j != std::floor(j))
      parse_error(path, l + 1, "node index out of range");
    if (i == j) parse_error(path, l + 1, "self loops are not allowed");
    if (!(weight >= 0.0) || !std::isfinite(weight)) parse_error(path, l + 1, "bad edge weight");
    const auto a = static_cast<Index>(i), b = static_cast<Index>(j);
    w(a, b) = std::max(w(a, b), weight);
    given(a, b) = 1.0;
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (given(a, b) != 0.0 && given(b, a) != 0.0) {
        const double tol = 1e-9 * std::max({1.0, w(a, b), w(b, a)});
        if (std::abs(w(a, b) - w(b, a)) > tol)
          fail(ErrorCode::io, path.string() + ": asymmetric weights for edge " +
                                  std::to_string(a) + "," + std::to_string(b));
      }
      const double v = std::max(w(a, b), w(b, a));
      w(a, b) = v;
      w(b, a) = v;
    }
  }
  return Graph(std::move(w));
}

void save_graph_csv(const fs::path& path, const Graph& g) {
  std::ostringstream os;
  os << "nodes=" << g.node_count() << "\n";
  const Matrix& w = g.weights();
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0.0) os << i << "," << j << "," << fmt_double(w(i, j)) << "\n";
  write_text_file(path, os.str());
}

ObservedSignalSet load_signals_csv(const fs::path& path) {
  const auto rows = read_table(path);
  const auto n = static_cast<Index>(rows.size());
  const auto k = static_cast<Index>(rows.front().size());
  ObservedSignalSet obs;
  obs.values.resize(n, k);
  obs.observed.resize(n, k);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < k; ++c) {
      const auto& v = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      obs.observed(r, c) = v.has_value();
      obs.values(r, c) = v.value_or(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return obs;
}

void save_signals_csv(const fs::path& path, const ObservedSignalSet& obs) {
  std::ostringstream os;
  for (Index r = 0; r < obs.node_count(); ++r) {
    for (Index c = 0; c < obs.signal_count(); ++c) {
      if (c) os << ',';
      os << (obs.observed(r, c) ? fmt_double(obs.values(r, c)) : std::string("NaN"));
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

Matrix load_matrix_csv(const fs::path& path) {
  const auto rows = read_table(path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      const auto& v = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (!v) parse_error(path, static_cast<std::size_t>(r) + 1, "missing value in dense matrix");
      m(r, c) = *v;
    }
  return m;
}

void save_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ostringstream os;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << fmt_double(m(r, c));
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<GraphInput> Dataset::inputs() const {
  std::vector<GraphInput> out;
  for (const auto& g : graphs) out.push_back(g.input);
  return out;
}

DatasetGraph load_dataset(const fs::path& graph_path, const fs::path& signals_path) {
  Graph g = load_graph_csv(graph_path);
  ObservedSignalSet obs = load_signals_csv(signals_path);
  if (obs.node_count() != g.node_count())
    fail(ErrorCode::io, "shape mismatch: graph has " + std::to_string(g.node_count()) +
                            " nodes, signal file has " + std::to_string(obs.node_count()) +
                            " rows");
  for (Index i = 0; i < obs.signal_count(); ++i)
    if (obs.observed.col(i).count() == 0)
      fail(ErrorCode::io,
           signals_path.string() + ": signal " + std::to_string(i) + " is all-missing");
  return {{std::move(g), std::move(obs)}, std::nullopt};
}

Dataset load_dataset_dir(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "dataset.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, (dir / "dataset.json").string() + ": " + e.what());
  }
  Dataset data;
  try {
    for (const auto& entry : manifest.at("graphs")) {
      DatasetGraph g = load_dataset(dir / entry.at("graph").get<std::string>(),
                                    dir / entry.at("signals").get<std::string>());
      if (entry.contains("truth")) {
        g.truth = load_matrix_csv(dir / entry["truth"].get<std::string>());
        if (g.truth->rows() != g.input.signals.node_count() ||
            g.truth->cols() != g.input.signals.signal_count())
          fail(ErrorCode::io, "truth matrix shape differs from the signal file");
      }
      data.graphs.push_back(std::move(g));
    }
    if (manifest.contains("psi_true")) data.psi_true = psi_from_json(manifest["psi_true"].dump());
  } catch (const json::exception& e) {
    fail(ErrorCode::io, (dir / "dataset.json").string() + ": " + e.what());
  }
  if (data.graphs.empty()) fail(ErrorCode::io, "dataset lists no graphs");
  return data;
}

void save_dataset_dir(const fs::path& dir, const Dataset& data) {
  json manifest;
  manifest["graphs"] = json::array();
  for (std::size_t m = 0; m < data.graphs.size(); ++m) {
    const auto& g = data.graphs[m];
    const std::string suffix = std::to_string(m) + ".csv";
    json entry = {{"graph", "graph_" + suffix}, {"signals", "signals_" + suffix}};
    save_graph_csv(dir / ("graph_" + suffix), g.input.graph);
    save_signals_csv(dir / ("signals_" + suffix), g.input.signals);
    if (g.truth) {
      entry["truth"] = "truth_" + suffix;
      save_matrix_csv(dir / ("truth_" + suffix), *g.truth);
    }
    manifest["graphs"].push_back(entry);
  }
  if (data.psi_true) manifest["psi_true"] = json::parse(psi_to_json(*data.psi_true));
  write_text_file(dir / "dataset.json", manifest.dump(2) + "\n");
}

Dataset dataset_from_synthetic(const SyntheticData& data) {
  Dataset out;
  out.psi_true = data.psi;
  for (const auto& g : data.graphs)
    out.graphs.push_back({{g.graph, g.observed_signals()}, g.clean});
  return out;
}

void save_descent_trace_csv(const fs::path& path, const std::vector<DescentStep>& trace) {
  std::ostringstream os;
  os << "iter,f,grad_norm,step\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << i << ',' << fmt_double(trace[i].f) << ',' << fmt_double(trace[i].grad_norm) << ','
       << fmt_double(trace[i].step) << '\n';
  write_text_file(path, os.str());
}

void save_checkpoint(const fs::path& dir, const SgklModel& model) {
  json j;
  j["psi"] = json::parse(psi_to_json(model.psi));
  j["config"] = learner_config_to_json(model.config);
  j["seed"] = model.config.seed;
  j["outer_iterations"] = model.outer_iterations;
  j["converged"] = model.converged;
  j["trace"] = json::array();
  for (const auto& t : model.trace)
    j["trace"].push_back({{"outer", t.outer}, {"stage", t.stage}, {"objective", t.objective},
                          {"kernel_objective", t.kernel_objective}});
  j["graphs"] = json::array();
  for (std::size_t m = 0; m < model.graphs.size(); ++m) {
    const std::string file = "coefficients_" + std::to_string(m) + ".csv";
    save_matrix_csv(dir / file, model.graphs[m].x);
    j["graphs"].push_back({{"coefficients", file}, {"gamma", model.graphs[m].signal_graph.gamma}});
  }
  write_text_file(dir / "model.json", j.dump(2) + "\n");
  save_descent_trace_csv(dir / "descent_trace.csv", model.descent_trace);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  Checkpoint cp;
  try {
    const json j = json::parse(read_text_file(dir / "model.json"));
    cp.config = learner_config_from_json(j.at("config"));
    cp.psi = psi_from_json(j.at("psi").dump());
    cp.outer_iterations = j.value("outer_iterations", 0);
    cp.converged = j.value("converged", false);
    for (const auto& t : j.at("trace"))
      cp.trace.push_back({t.at("outer").get<int>(), t.at("stage").get<std::string>(),
                          t.at("objective").get<double>(), t.at("kernel_objective").get<double>()});
    for (const auto& g : j.at("graphs")) {
      cp.coefficients.push_back(load_matrix_csv(dir / g.at("coefficients").get<std::string>()));
      cp.gammas.push_back(g.at("gamma").get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::io, (dir / "model.json").string() + ": " + e.what());
  }
  return cp;
}

SgklModel restore_model(const Checkpoint& cp, const std::vector<GraphInput>& data) {
  require(cp.coefficients.size() == data.size(), "checkpoint and dataset graph counts differ");
  SgklModel model;
  model.config = cp.config;
  model.psi = cp.psi;
  model.trace = cp.trace;
  model.outer_iterations = cp.outer_iterations;
  model.converged = cp.converged;
  for (std::size_t m = 0; m < data.size(); ++m) {
    SgklConfig cfg = cp.config;
    cfg.gamma = cp.gammas[m];
    GraphState g = prepare_graph(data[m], cfg);
    require(cp.coefficients[m].rows() == cp.psi.kernel_count() * g.dec->size() &&
                cp.coefficients[m].cols() == g.obs.signal_count(),
            "checkpoint coefficient shape differs from the dataset");
    g.dict = std::make_shared<const Dictionary>(g.dec, model.psi);
    g.x = cp.coefficients[m];
    g.duals = Matrix::Zero(g.x.rows(), g.x.cols());
    model.graphs.push_back(std::move(g));
  }
  return model;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  fail(ErrorCode::config, "format must be csv or json, got '" + name + "'");
}

namespace {

constexpr const char* kReportHeader =
    "kind,parameter,value,regime,signals,delta_psi,seed,graph,count,nmse,nmse_std,baseline_nmse,"
    "objective_initial,objective_final,outer_iterations,config_hash,runtime_s";

json run_to_json(const RunRecord& r, bool with_timing) {
  json j = {{"parameter", r.parameter},
            {"value", r.value},
            {"regime", r.regime},
            {"signals", r.signals},
            {"delta_psi", r.delta_psi},
            {"seed", r.seed},
            {"graph", r.graph},
            {"nmse", r.nmse},
            {"baseline_nmse", r.baseline_nmse},
            {"objective_initial", r.objective_initial},
            {"objective_final", r.objective_final},
            {"outer_iterations", r.outer_iterations},
            {"config_hash", r.config_hash}};
  if (with_timing) j["runtime_s"] = r.runtime_s;
  return j;
}

RunRecord run_from_json(const json& j) {
  RunRecord r;
  r.parameter = j.at("parameter").get<std::string>();
  r.value = j.at("value").get<double>();
  r.regime = j.at("regime").get<std::string>();
  r.signals = j.at("signals").get<double>();
  r.delta_psi = j.at("delta_psi").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.graph = j.at("graph").get<Index>();
  r.nmse = j.at("nmse").get<double>();
  r.baseline_nmse = j.at("baseline_nmse").get<double>();
  r.objective_initial = j.at("objective_initial").get<double>();
  r.objective_final = j.at("objective_final").get<double>();
  r.outer_iterations = j.at("outer_iterations").get<int>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.runtime_s = j.value("runtime_s", 0.0);
  return r;
}

}  // namespace

std::string report_to_string(const ExperimentReport& report, ReportFormat format,
                             bool with_timing) {
  const auto aggregates = report.aggregates();
  if (format == ReportFormat::json) {
    json j;
    j["runs"] = json::array();
    for (const auto& r : report.runs) j["runs"].push_back(run_to_json(r, with_timing));
    j["aggregates"] = json::array();
    for (const auto& a : aggregates)
      j["aggregates"].push_back({{"parameter", a.parameter},
                                 {"value", a.value},
                                 {"regime", a.regime},
                                 {"signals", a.signals},
                                 {"delta_psi", a.delta_psi},
                                 {"graph", a.graph},
                                 {"count", a.count},
                                 {"nmse_mean", a.nmse_mean},
                                 {"nmse_std", a.nmse_std},
                                 {"baseline_mean", a.baseline_mean}});
    j["thresholds"] = json::array();
    for (const auto& t : report.thresholds)
      j["thresholds"].push_back({{"delta_psi", t.delta_psi}, {"threshold_k", t.threshold_k}});
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  os << kReportHeader << '\n';
  for (const auto& r : report.runs)
    os << "run," << r.parameter << ',' << fmt_double(r.value) << ',' << r.regime << ','
       << fmt_double(r.signals) << ',' << fmt_double(r.delta_psi) << ',' << r.seed << ','
       << r.graph << ",1," << fmt_double(r.nmse) << ",," << fmt_double(r.baseline_nmse) << ','
       << fmt_double(r.objective_initial) << ',' << fmt_double(r.objective_final) << ','
       << r.outer_iterations << ',' << r.config_hash << ','
       << (with_timing ? fmt_double(r.runtime_s) : std::string()) << '\n';
  for (const auto& a : aggregates)
    os << "aggregate," << a.parameter << ',' << fmt_double(a.value) << ',' << a.regime << ','
       << fmt_double(a.signals) << ',' << fmt_double(a.delta_psi) << ",," << a.graph << ','
       << a.count << ',' << fmt_double(a.nmse_mean) << ',' << fmt_double(a.nmse_std) << ','
       << fmt_double(a.baseline_mean) << ",,,,,\n";
  for (const auto& t : report.thresholds)
    os << "threshold,K," << fmt_double(t.threshold_k) << ",,," << fmt_double(t.delta_psi)
       << ",,,,,,,,,,,\n";
  return os.str();
}

ExperimentReport report_from_string(const std::string& text, ReportFormat format) {
  ExperimentReport report;
  if (format == ReportFormat::json) {
    try {
      const json j = json::parse(text);
      for (const auto& r : j.at("runs")) report.runs.push_back(run_from_json(r));
      for (const auto& t : j.at("thresholds"))
        report.thresholds.push_back(
            {t.at("delta_psi").get<double>(), t.at("threshold_k").get<double>()});
    } catch (const json::exception& e) {
      fail(ErrorCode::io, std::string("bad report json: ") + e.what());
    }
    return report;
  }

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const fs::path label("report.csv");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kReportHeader) parse_error(label, lineno, "unexpected report header");
      continue;
    }
    if (trim(line).empty()) continue;
    const auto c = split(line);
    if (c.size() != 17) parse_error(label, lineno, "expected 17 columns");
    if (c[0] == "run") {
      RunRecord r;
      r.parameter = c[1];
      r.value = parse_number(label, lineno, c[2]);
      r.regime = c[3];
      r.signals = parse_number(label, lineno, c[4]);
      r.delta_psi = parse_number(label, lineno, c[5]);
      r.seed = std::stoull(c[6]);
      r.graph = static_cast<Index>(parse_number(label, lineno, c[7]));
      r.nmse = parse_number(label, lineno, c[9]);
      r.baseline_nmse = parse_number(label, lineno, c[11]);
      r.objective_initial = parse_number(label, lineno, c[12]);
      r.objective_final = parse_number(label, lineno, c[13]);
      r.outer_iterations = static_cast<int>(parse_number(label, lineno, c[14]));
      r.config_hash = c[15];
      r.runtime_s = c[16].empty() ? 0.0 : parse_number(label, lineno, c[16]);
      report.runs.push_back(std::move(r));
    } else if (c[0] == "threshold") {
      report.thresholds.push_back(
          {parse_number(label, lineno, c[5]), parse_number(label, lineno, c[2])});
    } else if (c[0] != "aggregate") {
      parse_error(label, lineno, "unknown row kind '" + c[0] + "'");
    }
  }
  return report;
}

void write_report(const fs::path& path, const ExperimentReport& report, ReportFormat format,
                  bool with_timing) {
  write_text_file(path, report_to_string(report, format, with_timing));
}

ExperimentReport read_report(const fs::path& path, ReportFormat format) {
  return report_from_string(read_text_file(path), format);
}

}  // namespace sgkl
