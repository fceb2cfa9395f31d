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

// Command-line front end. Talks to the library only through sgkl.h.

#include <sgkl/sgkl.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Failure {
  sgkl_status status;
  std::string message;
};

void check(sgkl_status status) {
  if (status != SGKL_OK) throw Failure{status, sgkl_last_error()};
}

int exit_code(sgkl_status status) {
  switch (status) {
    case SGKL_OK:
      return 0;
    case SGKL_ERR_CONFIG:
    case SGKL_ERR_INVALID:
      return 2;
    case SGKL_ERR_NUMERICAL:
      return 3;
    default:
      return 1;
  }
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Dataset = Handle<sgkl_dataset, sgkl_dataset_free>;
using Model = Handle<sgkl_model, sgkl_model_free>;
using Report = Handle<sgkl_report, sgkl_report_free>;

struct Shared {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned jobs = 1;
  std::string format = "csv";
  bool timing = false;

  std::optional<std::string> config_text() const {
    if (config_path.empty()) return std::nullopt;
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw Failure{SGKL_ERR_CONFIG, "cannot read config " + config_path};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
};

const char* c_str_or_null(const std::optional<std::string>& s) {
  return s ? s->c_str() : nullptr;
}

const std::uint64_t* seed_ptr(const Shared& s) { return s.seed ? &*s.seed : nullptr; }

void add_shared(CLI::App* app, Shared& s, bool with_format) {
  app->add_option("--config", s.config_path, "JSON config with learner and synthetic sections")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", s.seed, "seed for data generation and initialization");
  app->add_option("--out", s.out, "output directory");
  app->add_option("--jobs", s.jobs, "parallel grid cells")->check(CLI::PositiveNumber);
  if (with_format) {
    app->add_option("--format", s.format, "report format")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--timing", s.timing, "include wall-clock runtimes in reports");
  }
}

void load_data(Dataset& data, const std::string& dir, const std::string& graph,
               const std::string& signals) {
  if (!dir.empty()) {
    check(sgkl_dataset_load_dir(dir.c_str(), data.out()));
  } else if (!graph.empty() && !signals.empty()) {
    check(sgkl_dataset_load_files(graph.c_str(), signals.c_str(), data.out()));
  } else {
    throw Failure{SGKL_ERR_CONFIG, "give --data DIR or both --graph and --signals"};
  }
}

void print_nmse(const sgkl_model* model, const sgkl_dataset* data) {
  size_t graphs = 0;
  check(sgkl_dataset_graph_count(data, &graphs));
  for (size_t m = 0; m < graphs; ++m) {
    int has_truth = 0;
    check(sgkl_dataset_has_truth(data, m, &has_truth));
    if (!has_truth) continue;
    double nmse = 0.0, baseline = 0.0;
    check(sgkl_model_nmse(model, data, m, &nmse, &baseline));
    std::printf("graph %zu: nmse %.6g (mean fill %.6g)\n", m, nmse, baseline);
  }
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void emit_report(const Report& report, const Shared& s, const std::string& stem) {
  fs::create_directories(s.out);
  const fs::path path = fs::path(s.out) / (stem + "." + s.format);
  check(sgkl_report_write(report.get(), path.string().c_str(), s.format.c_str(), s.timing));
  std::printf("wrote %s\n", path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph kernel learning: fit, reconstruct and run experiments"};
  app.require_subcommand(1);

  Shared gen_s, fit_s, rec_s, inf_s, sweep_s, jvi_s, rep_s;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset directory");
  add_shared(gen, gen_s, false);

  std::string data_dir, graph_csv, signals_csv, resume_dir;
  auto* fit = app.add_subcommand("fit", "learn kernels and coefficients, save a checkpoint");
  add_shared(fit, fit_s, false);
  fit->add_option("--data", data_dir, "dataset directory");
  fit->add_option("--graph", graph_csv, "graph CSV (single graph input)");
  fit->add_option("--signals", signals_csv, "signal CSV (single graph input)");
  fit->add_option("--resume", resume_dir, "checkpoint directory to continue from");

  std::string model_dir;
  auto* rec = app.add_subcommand("reconstruct", "fill missing entries of the training signals");
  add_shared(rec, rec_s, false);
  rec->add_option("--data", data_dir, "dataset directory");
  rec->add_option("--graph", graph_csv, "graph CSV");
  rec->add_option("--signals", signals_csv, "signal CSV");
  rec->add_option("--model", model_dir, "checkpoint directory")->required();

  std::string test_csv;
  std::size_t graph_index = 0;
  auto* inf = app.add_subcommand("infer", "code new signals under learned kernels");
  add_shared(inf, inf_s, false);
  inf->add_option("--data", data_dir, "dataset directory the model was fitted on");
  inf->add_option("--graph", graph_csv, "graph CSV");
  inf->add_option("--signals", signals_csv, "training signal CSV");
  inf->add_option("--model", model_dir, "checkpoint directory")->required();
  inf->add_option("--test", test_csv, "CSV of new signals, NaN or empty for missing")
      ->required()
      ->check(CLI::ExistingFile);
  inf->add_option("--graph-index", graph_index, "graph the new signals live on");

  std::string parameter;
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over one parameter");
  add_shared(sweep, sweep_s, true);
  sweep->add_option("--param", parameter, "snr, J, eta_s, eta_x, eta_w, eta_y or eta_c")
      ->required();
  sweep->add_option("--grid", grid, "grid values")->required()->delimiter(',');
  sweep->add_option("--seeds", seeds, "run seeds")->delimiter(',');

  std::vector<double> deltas{0.0, 0.05, 0.1, 0.2};
  std::vector<std::size_t> ks{5, 10, 20, 40, 80};
  auto* jvi = app.add_subcommand("joint-vs-individual", "threshold study over data size");
  add_shared(jvi, jvi_s, true);
  jvi->add_option("--deltas", deltas, "spectrum discrepancy grid")->delimiter(',');
  jvi->add_option("--ks", ks, "signals per graph")->delimiter(',');
  jvi->add_option("--seeds", seeds, "run seeds")->delimiter(',');

  std::string report_in, report_in_format = "csv";
  auto* rep = app.add_subcommand("report", "print or convert a saved report");
  add_shared(rep, rep_s, true);
  rep->add_option("--in", report_in, "report file")->required()->check(CLI::ExistingFile);
  rep->add_option("--in-format", report_in_format, "format of --in")
      ->check(CLI::IsMember({"csv", "json"}));
  bool to_stdout = false;
  rep->add_flag("--stdout", to_stdout, "print instead of writing into --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto cfg = gen_s.config_text();
      Dataset data;
      check(sgkl_dataset_generate(c_str_or_null(cfg), seed_ptr(gen_s), data.out()));
      check(sgkl_dataset_save_dir(data.get(), gen_s.out.c_str()));
      std::printf("wrote %s\n", (fs::path(gen_s.out) / "dataset.json").string().c_str());
    } else if (*fit) {
      const auto cfg = fit_s.config_text();
      Dataset data;
      load_data(data, data_dir, graph_csv, signals_csv);
      Model resume;
      if (!resume_dir.empty()) check(sgkl_model_load(resume_dir.c_str(), data.get(), resume.out()));
      fs::create_directories(fit_s.out);
      Model model;
      check(sgkl_fit(data.get(), c_str_or_null(cfg), seed_ptr(fit_s), resume.get(),
                     fit_s.out.c_str(), model.out()));
      check(sgkl_model_save(model.get(), fit_s.out.c_str()));
      int outer = 0, converged = 0;
      double objective = 0.0;
      check(sgkl_model_summary(model.get(), &outer, &converged, &objective));
      std::printf("outer iterations %d, converged %s, objective %.10g\n", outer,
                  converged ? "yes" : "no", objective);
      print_nmse(model.get(), data.get());
    } else if (*rec) {
      Dataset data;
      load_data(data, data_dir, graph_csv, signals_csv);
      Model model;
      check(sgkl_model_load(model_dir.c_str(), data.get(), model.out()));
      size_t graphs = 0;
      check(sgkl_dataset_graph_count(data.get(), &graphs));
      fs::create_directories(rec_s.out);
      for (size_t m = 0; m < graphs; ++m) {
        const fs::path path =
            fs::path(rec_s.out) / ("reconstruction_" + std::to_string(m) + ".csv");
        check(sgkl_model_reconstruct_csv(model.get(), m, path.string().c_str()));
        std::printf("wrote %s\n", path.string().c_str());
      }
      print_nmse(model.get(), data.get());
    } else if (*inf) {
      Dataset data;
      load_data(data, data_dir, graph_csv, signals_csv);
      Model model;
      check(sgkl_model_load(model_dir.c_str(), data.get(), model.out()));
      fs::create_directories(inf_s.out);
      const fs::path path = fs::path(inf_s.out) / "inferred.csv";
      check(sgkl_infer_csv(model.get(), graph_index, test_csv.c_str(), path.string().c_str()));
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*sweep) {
      const auto cfg = sweep_s.config_text();
      if (sweep_s.seed) seeds = {*sweep_s.seed};
      Report report;
      check(sgkl_run_sweep(c_str_or_null(cfg), parameter.c_str(), grid.data(), grid.size(),
                           seeds.data(), seeds.size(), sweep_s.jobs, report.out()));
      emit_report(report, sweep_s, "sweep_" + parameter);
    } else if (*jvi) {
      const auto cfg = jvi_s.config_text();
      if (jvi_s.seed) seeds = {*jvi_s.seed};
      Report report;
      check(sgkl_run_joint_vs_individual(c_str_or_null(cfg), deltas.data(), deltas.size(),
                                         ks.data(), ks.size(), seeds.data(), seeds.size(),
                                         jvi_s.jobs, report.out()));
      emit_report(report, jvi_s, "joint_vs_individual");
      size_t count = 0;
      check(sgkl_report_threshold_count(report.get(), &count));
      for (size_t i = 0; i < count; ++i) {
        double delta = 0.0, k = 0.0;
        check(sgkl_report_threshold(report.get(), i, &delta, &k));
        std::printf("delta_psi %g: threshold K %g\n", delta, k);
      }
    } else if (*rep) {
      Report report;
      check(sgkl_report_load(report_in.c_str(), report_in_format.c_str(), report.out()));
      if (to_stdout) {
        size_t needed = 0;
        check(sgkl_report_render(report.get(), rep_s.format.c_str(), rep_s.timing, nullptr, 0,
                                 &needed));
        std::string text(needed, '\0');
        check(sgkl_report_render(report.get(), rep_s.format.c_str(), rep_s.timing, text.data(),
                                 text.size(), nullptr));
        text.resize(needed - 1);
        std::cout << text;
      } else {
        emit_report(report, rep_s, fs::path(report_in).stem().string());
      }
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
