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
#include "sgkl/experiments.hpp"
#include "sgkl/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace sgkl;

namespace {

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    std::random_device rd;
    dir = fs::temp_directory_path() /
          ("sgkl_io_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

SyntheticSetup tiny_setup() {
  SyntheticSetup s;
  s.nodes = {12, 14};
  s.signals = {5, 6};
  s.knn = 3;
  s.kernels = 2;
  s.sparsity = 3;
  s.snr_db = 10.0;
  return s;
}

void check_error(const std::function<void()>& f, ErrorCode code, const std::string& needle) {
  try {
    f();
    FAIL("expected an error containing " << needle);
  } catch (const Error& e) {
    CHECK(e.code() == code);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_CASE("dataset directory round trip is bit-identical") {
  Scratch tmp;
  const Dataset data = dataset_from_synthetic(generate_synthetic(tiny_setup()));
  save_dataset_dir(tmp.dir, data);
  const Dataset back = load_dataset_dir(tmp.dir);
  REQUIRE(back.graphs.size() == 2);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& a = data.graphs[m];
    const auto& b = back.graphs[m];
    CHECK(a.input.graph.weights() == b.input.graph.weights());
    CHECK((a.input.signals.observed == b.input.signals.observed).all());
    CHECK(a.input.signals.masked_values() == b.input.signals.masked_values());
    REQUIRE(b.truth);
    CHECK(*a.truth == *b.truth);
  }
  REQUIRE(back.psi_true);
  CHECK(back.psi_true->flat() == data.psi_true->flat());
}

TEST_CASE("signal csv: empty cells and NaN mark missing entries") {
  Scratch tmp;
  write_text_file(tmp / "s.csv", "1.5,,3\nNaN,2,-1e-3\n0,0.25,7\n");
  const auto obs = load_signals_csv(tmp / "s.csv");
  CHECK(obs.node_count() == 3);
  CHECK(obs.signal_count() == 3);
  CHECK_FALSE(obs.observed(0, 1));
  CHECK_FALSE(obs.observed(1, 0));
  CHECK(obs.observed(2, 2));
  CHECK(obs.values(1, 2) == -1e-3);
  save_signals_csv(tmp / "t.csv", obs);
  const auto back = load_signals_csv(tmp / "t.csv");
  CHECK((back.observed == obs.observed).all());
  CHECK(back.masked_values() == obs.masked_values());
}

TEST_CASE("signal csv: malformed rows name the line") {
  Scratch tmp;
  write_text_file(tmp / "s.csv", "1,2\n3,abc\n");
  check_error([&] { load_signals_csv(tmp / "s.csv"); }, ErrorCode::io, "line 2");
  write_text_file(tmp / "r.csv", "1,2\n3\n");
  check_error([&] { load_signals_csv(tmp / "r.csv"); }, ErrorCode::io, "line 2");
  check_error([&] { load_signals_csv(tmp / "missing.csv"); }, ErrorCode::io, "cannot open");
}

TEST_CASE("graph csv: mirroring, symmetric conflicts, bad rows") {
  Scratch tmp;
  write_text_file(tmp / "g.csv", "nodes=3\n0,1,0.5\n1,2,2\n2,1,2\n");
  const Graph g = load_graph_csv(tmp / "g.csv");
  CHECK(g.weights()(1, 0) == 0.5);
  CHECK(g.weights()(2, 1) == 2.0);
  save_graph_csv(tmp / "h.csv", g);
  CHECK(load_graph_csv(tmp / "h.csv").weights() == g.weights());

  write_text_file(tmp / "a.csv", "nodes=3\n0,1,0.5\n1,0,0.7\n1,2,1\n");
  check_error([&] { load_graph_csv(tmp / "a.csv"); }, ErrorCode::io, "asymmetric weights");
  write_text_file(tmp / "b.csv", "nodes=3\n0,1,0.5\n1,5,1\n");
  check_error([&] { load_graph_csv(tmp / "b.csv"); }, ErrorCode::io, "line 3");
  write_text_file(tmp / "c.csv", "nodes=3\n0,1,0.5\n1,1,1\n");
  check_error([&] { load_graph_csv(tmp / "c.csv"); }, ErrorCode::io, "line 3");
  write_text_file(tmp / "d.csv", "3\n0,1,1\n");
  check_error([&] { load_graph_csv(tmp / "d.csv"); }, ErrorCode::io, "line 1");
}

TEST_CASE("load_dataset: shape mismatch and all-missing signals") {
  Scratch tmp;
  write_text_file(tmp / "g.csv", "nodes=3\n0,1,1\n1,2,1\n");
  write_text_file(tmp / "s.csv", "1,2\n3,4\n");
  check_error([&] { load_dataset(tmp / "g.csv", tmp / "s.csv"); }, ErrorCode::io, "shape mismatch");
  write_text_file(tmp / "t.csv", "1,\n2,\n3,NaN\n");
  check_error([&] { load_dataset(tmp / "g.csv", tmp / "t.csv"); }, ErrorCode::io,
              "signal 1 is all-missing");
  write_text_file(tmp / "u.csv", "1,4\n2,\n3,6\n");
  const auto d = load_dataset(tmp / "g.csv", tmp / "u.csv");
  CHECK(d.input.signals.observed.count() == 5);
}

TEST_CASE("checkpoint round trip and restore") {
  Scratch tmp;
  const auto synth = generate_synthetic(tiny_setup());
  SgklConfig cfg;
  cfg.kernels = 2;
  cfg.outer_max_iters = 2;
  const SgklModel m = fit(synth.inputs(), cfg);
  save_checkpoint(tmp.dir, m);
  CHECK(fs::exists(tmp / "model.json"));
  CHECK(fs::exists(tmp / "coefficients_1.csv"));
  CHECK(read_text_file(tmp / "descent_trace.csv").rfind("iter,f,grad_norm,step\n", 0) == 0);

  const Checkpoint cp = load_checkpoint(tmp.dir);
  CHECK(cp.psi.flat() == m.psi.flat());
  CHECK(cp.coefficients[0] == m.graphs[0].x);
  CHECK(cp.trace.size() == m.trace.size());
  CHECK(cp.gammas[1] == m.graphs[1].signal_graph.gamma);
  CHECK(cp.outer_iterations == m.outer_iterations);
  const SgklModel r = restore_model(cp, synth.inputs());
  CHECK(reconstruct(r, 1) == reconstruct(m, 1));
  CHECK(total_objective(r) == doctest::Approx(total_objective(m)).epsilon(1e-14));
  CHECK_THROWS(restore_model(cp, {synth.inputs()[0]}));
}

TEST_CASE("config: round trip, partial files, unknown keys") {
  ExperimentConfig c;
  c.learner.eta_c = 12.5;
  c.learner.gamma = 0.75;
  c.learner.descent.precondition = false;
  c.learner.admm.adaptive_rho = false;
  c.synthetic.snr_db = 6.0;
  c.synthetic.psi = KernelParamVector::nominal(4, 0.3);
  c.synthetic.coefficient_scale = 2.0;
  const auto j = experiment_config_to_json(c);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(experiment_config_to_json(back) == j);
  CHECK_FALSE(back.learner.admm.adaptive_rho);
  CHECK(config_hash(back) == config_hash(c));

  const auto partial = parse_experiment_config(R"({"learner": {"eta_x": 7, "admm": {"rho": 2}}})");
  CHECK(partial.learner.eta_x == 7.0);
  CHECK(partial.learner.admm.rho == 2.0);
  CHECK(partial.learner.eta_w == SgklConfig{}.eta_w);
  CHECK(partial.synthetic.nodes == SyntheticSetup{}.nodes);

  check_error([] { parse_experiment_config(R"({"learner": {"etax": 1}})"); }, ErrorCode::config,
              "unknown key 'etax'");
  check_error([] { parse_experiment_config("{"); }, ErrorCode::config, "not valid JSON");
  check_error([] { parse_experiment_config(R"({"learner": {"kernels": 0}})"); },
              ErrorCode::config, "kernel");
  check_error([] { parse_experiment_config(R"({"learner": {"eta_x": "big"}})"); },
              ErrorCode::config, "learner");
}

TEST_CASE("report: empty, counts, determinism, format round trip") {
  Scratch tmp;
  ExperimentReport empty;
  const std::string header = report_to_string(empty, ReportFormat::csv);
  CHECK(std::count(header.begin(), header.end(), '\n') == 1);
  CHECK(header.rfind("kind,parameter,value,", 0) == 0);

  ExperimentReport r;
  for (std::uint64_t seed : {3u, 4u}) {
    RunRecord rec;
    rec.parameter = "snr";
    rec.value = 15.0;
    rec.seed = seed;
    rec.nmse = 0.1 * static_cast<double>(seed);
    rec.baseline_nmse = 0.9;
    rec.objective_initial = 10.0;
    rec.objective_final = 5.0;
    rec.outer_iterations = 7;
    rec.config_hash = "abc";
    rec.runtime_s = 1.25;
    r.runs.push_back(rec);
  }
  r.thresholds.push_back({0.1, 20.0});
  const std::string csv = report_to_string(r, ReportFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 + 1 + 1);
  CHECK(csv.find("aggregate,snr,15") != std::string::npos);
  CHECK(csv.find("1.25") == std::string::npos);
  CHECK(report_to_string(r, ReportFormat::csv, true).find("1.25") != std::string::npos);

  for (ReportFormat f : {ReportFormat::csv, ReportFormat::json}) {
    const auto path = tmp / (f == ReportFormat::csv ? "r.csv" : "r.json");
    write_report(path, r, f);
    ExperimentReport back = read_report(path, f);
    for (auto& run : back.runs) run.runtime_s = 1.25;
    CHECK(back.runs == r.runs);
    CHECK(back.thresholds == r.thresholds);
    CHECK(report_to_string(back, f) == report_to_string(r, f));
  }
  // csv -> json -> csv
  const auto via = report_from_string(
      report_to_string(report_from_string(csv, ReportFormat::csv), ReportFormat::json),
      ReportFormat::json);
  CHECK(report_to_string(via, ReportFormat::csv) == csv);

  CHECK(parse_report_format("json") == ReportFormat::json);
  check_error([] { parse_report_format("xml"); }, ErrorCode::config, "csv or json");
  check_error([&] { write_report("/proc/nonexistent/x.csv", r, ReportFormat::csv); },
              ErrorCode::io, "");
}
