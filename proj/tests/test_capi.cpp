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

// Exercises the shared library through its C interface only.

#include "sgkl/sgkl.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* kTiny = R"({
  "learner": {"kernels": 2, "outer_max_iters": 3},
  "synthetic": {"nodes": [16, 18], "signals": [6, 7], "knn": 4, "kernels": 2,
                "sparsity": 4, "snr_db": 15}
})";

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("sgkl_capi_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sgkl_dataset* tiny_dataset(uint64_t seed = 0) {
  sgkl_dataset* d = nullptr;
  REQUIRE(sgkl_dataset_generate(kTiny, &seed, &d) == SGKL_OK);
  return d;
}

}  // namespace

TEST_CASE("version and config validation") {
  CHECK(std::string(sgkl_version()).size() > 0);
  CHECK(sgkl_config_validate(kTiny) == SGKL_OK);
  CHECK(std::string(sgkl_last_error()).empty());
  CHECK(sgkl_config_validate("{\"learner\": {\"nope\": 1}}") == SGKL_ERR_CONFIG);
  CHECK(std::string(sgkl_last_error()).find("unknown key 'nope'") != std::string::npos);
  CHECK(sgkl_config_validate("[") == SGKL_ERR_CONFIG);
  CHECK(sgkl_config_validate(nullptr) == SGKL_ERR_INVALID);
}

TEST_CASE("dataset: generate, inspect, save, load") {
  Scratch tmp;
  sgkl_dataset* d = tiny_dataset();
  size_t count = 0, nodes = 0, signals = 0;
  double frac = 0.0;
  CHECK(sgkl_dataset_graph_count(d, &count) == SGKL_OK);
  CHECK(count == 2);
  CHECK(sgkl_dataset_shape(d, 1, &nodes, &signals, &frac) == SGKL_OK);
  CHECK(nodes == 18);
  CHECK(signals == 7);
  CHECK(frac == doctest::Approx(0.8).epsilon(0.03));
  int truth = 0;
  CHECK(sgkl_dataset_has_truth(d, 0, &truth) == SGKL_OK);
  CHECK(truth == 1);

  std::vector<double> values(18 * 7);
  CHECK(sgkl_dataset_signals(d, 1, values.data(), values.size()) == SGKL_OK);
  size_t missing = 0;
  for (double v : values) missing += std::isnan(v) ? 1 : 0;
  CHECK(missing == 7 * 4);  // round(0.2 * 18) hidden per signal
  CHECK(sgkl_dataset_signals(d, 1, values.data(), 3) == SGKL_ERR_INVALID);
  CHECK(sgkl_dataset_shape(d, 5, &nodes, &signals, &frac) == SGKL_ERR_INVALID);

  CHECK(sgkl_dataset_save_dir(d, tmp.dir.string().c_str()) == SGKL_OK);
  sgkl_dataset* back = nullptr;
  CHECK(sgkl_dataset_load_dir(tmp.dir.string().c_str(), &back) == SGKL_OK);
  std::vector<double> again(values.size());
  CHECK(sgkl_dataset_signals(back, 1, again.data(), again.size()) == SGKL_OK);
  for (size_t i = 0; i < values.size(); ++i)
    CHECK((values[i] == again[i] || (std::isnan(values[i]) && std::isnan(again[i]))));

  sgkl_dataset* files = nullptr;
  CHECK(sgkl_dataset_load_files((tmp / "graph_0.csv").c_str(), (tmp / "signals_0.csv").c_str(),
                                &files) == SGKL_OK);
  CHECK(sgkl_dataset_has_truth(files, 0, &truth) == SGKL_OK);
  CHECK(truth == 0);

  sgkl_dataset* none = nullptr;
  CHECK(sgkl_dataset_load_dir((tmp / "absent").c_str(), &none) == SGKL_ERR_IO);
  CHECK(none == nullptr);
  sgkl_dataset_free(files);
  sgkl_dataset_free(back);
  sgkl_dataset_free(d);
  sgkl_dataset_free(nullptr);
}

TEST_CASE("model: fit, query, save, load, reconstruct, infer") {
  Scratch tmp;
  sgkl_dataset* d = tiny_dataset();
  sgkl_model* m = nullptr;
  const uint64_t seed = 4;
  REQUIRE(sgkl_fit(d, kTiny, &seed, nullptr, nullptr, &m) == SGKL_OK);

  size_t kernels = 0;
  CHECK(sgkl_model_kernel_count(m, &kernels) == SGKL_OK);
  CHECK(kernels == 2);
  double mu[2], s[2];
  CHECK(sgkl_model_psi(m, mu, s) == SGKL_OK);
  CHECK(s[0] > 0.0);
  int outer = 0, converged = 0;
  double objective = 0.0;
  CHECK(sgkl_model_summary(m, &outer, &converged, &objective) == SGKL_OK);
  CHECK(outer >= 1);
  CHECK(objective > 0.0);
  size_t len = 0;
  CHECK(sgkl_model_trace_length(m, &len) == SGKL_OK);
  std::vector<double> trace(len);
  CHECK(sgkl_model_trace(m, trace.data(), len) == SGKL_OK);
  CHECK(trace.back() == objective);
  for (size_t t = 1; t < len; ++t) CHECK(trace[t] <= trace[t - 1] * (1.0 + 1e-9));

  double nmse = -1.0, base = -1.0;
  CHECK(sgkl_model_nmse(m, d, 0, &nmse, &base) == SGKL_OK);
  CHECK(nmse >= 0.0);
  CHECK(base > 0.0);

  std::vector<double> recon(16 * 6);
  CHECK(sgkl_model_reconstruct(m, 0, recon.data(), recon.size()) == SGKL_OK);
  CHECK(sgkl_model_reconstruct_csv(m, 0, (tmp / "r.csv").c_str()) == SGKL_OK);
  CHECK(!slurp(tmp / "r.csv").empty());

  CHECK(sgkl_model_save(m, (tmp / "model").c_str()) == SGKL_OK);
  sgkl_model* loaded = nullptr;
  CHECK(sgkl_model_load((tmp / "model").c_str(), d, &loaded) == SGKL_OK);
  std::vector<double> recon2(recon.size());
  CHECK(sgkl_model_reconstruct(loaded, 0, recon2.data(), recon2.size()) == SGKL_OK);
  CHECK(recon == recon2);

  // resume from the loaded model
  sgkl_model* resumed = nullptr;
  CHECK(sgkl_fit(d, kTiny, &seed, loaded, nullptr, &resumed) == SGKL_OK);
  double obj2 = 0.0;
  CHECK(sgkl_model_summary(resumed, &outer, &converged, &obj2) == SGKL_OK);
  CHECK(obj2 <= objective * (1.0 + 1e-9));

  // inductive inference on new signals, NaN = missing
  std::vector<double> test(16 * 2, 0.0);
  test[3] = std::nan("");
  std::vector<double> out(test.size());
  CHECK(sgkl_infer(m, 0, test.data(), 16, 2, out.data()) == SGKL_OK);
  CHECK(sgkl_infer(m, 0, test.data(), 15, 2, out.data()) == SGKL_ERR_INVALID);
  CHECK(std::string(sgkl_last_error()).find("node-count mismatch") != std::string::npos);

  {
    std::ofstream f(tmp / "test.csv");
    for (int n = 0; n < 16; ++n) f << (n == 2 ? "NaN" : "0.5") << "," << n * 0.1 << "\n";
  }
  CHECK(sgkl_infer_csv(m, 0, (tmp / "test.csv").c_str(), (tmp / "o.csv").c_str()) == SGKL_OK);
  const std::string inferred = slurp(tmp / "o.csv");
  CHECK(std::count(inferred.begin(), inferred.end(), '\n') == 16);
  std::ofstream(tmp / "short.csv") << "1\n2\n";
  CHECK(sgkl_infer_csv(m, 0, (tmp / "short.csv").c_str(), (tmp / "o.csv").c_str()) ==
        SGKL_ERR_INVALID);
  CHECK(sgkl_infer_csv(m, 0, (tmp / "absent.csv").c_str(), (tmp / "o.csv").c_str()) ==
        SGKL_ERR_IO);

  sgkl_model_free(resumed);
  sgkl_model_free(loaded);
  sgkl_model_free(m);
  sgkl_model_free(nullptr);
  sgkl_dataset_free(d);
}

TEST_CASE("fit: numerical failure writes a diagnostic dump") {
  Scratch tmp;
  sgkl_dataset* d = tiny_dataset();
  sgkl_model* m = nullptr;
  const char* bad = R"({"learner": {"kernels": 2, "eta_w": 1e308}})";
  CHECK(sgkl_fit(d, bad, nullptr, nullptr, tmp.dir.string().c_str(), &m) == SGKL_ERR_NUMERICAL);
  CHECK(m == nullptr);
  const std::string msg = sgkl_last_error();
  CHECK(msg.find("diagnostic.json") != std::string::npos);
  CHECK(fs::exists(tmp.dir / "diagnostic.json"));
  CHECK(slurp(tmp / "diagnostic.json").find("\"eta_w\"") != std::string::npos);
  sgkl_dataset_free(d);
}

TEST_CASE("reports: sweep, render, write, load") {
  Scratch tmp;
  sgkl_report* r = nullptr;
  const double grid[] = {100.0, 1000.0};
  const uint64_t seeds[] = {0, 1};
  REQUIRE(sgkl_run_sweep(kTiny, "eta_x", grid, 2, seeds, 2, 1, &r) == SGKL_OK);
  size_t runs = 0;
  CHECK(sgkl_report_run_count(r, &runs) == SGKL_OK);
  CHECK(runs == 8);
  double value = 0, nmse = 0, base = 0;
  uint64_t seed = 9;
  CHECK(sgkl_report_run(r, 2, &value, &nmse, &base, &seed) == SGKL_OK);
  CHECK(value == 100.0);
  CHECK(seed == 1);
  CHECK(sgkl_report_run(r, 8, &value, &nmse, &base, &seed) == SGKL_ERR_INVALID);

  size_t needed = 0;
  CHECK(sgkl_report_render(r, "csv", 0, nullptr, 0, &needed) == SGKL_OK);
  std::string buf(needed, '\0');
  CHECK(sgkl_report_render(r, "csv", 0, buf.data(), buf.size(), &needed) == SGKL_OK);
  buf.resize(needed - 1);
  CHECK(buf.rfind("kind,parameter,value", 0) == 0);
  CHECK(sgkl_report_render(r, "yaml", 0, nullptr, 0, &needed) == SGKL_ERR_CONFIG);

  CHECK(sgkl_report_write(r, (tmp / "r.json").c_str(), "json", 0) == SGKL_OK);
  sgkl_report* back = nullptr;
  CHECK(sgkl_report_load((tmp / "r.json").c_str(), "json", &back) == SGKL_OK);
  size_t n2 = 0;
  CHECK(sgkl_report_render(back, "csv", 0, nullptr, 0, &n2) == SGKL_OK);
  std::string buf2(n2, '\0');
  CHECK(sgkl_report_render(back, "csv", 0, buf2.data(), buf2.size(), &n2) == SGKL_OK);
  buf2.resize(n2 - 1);
  CHECK(buf2 == buf);

  sgkl_report* bad = nullptr;
  CHECK(sgkl_run_sweep(kTiny, "bogus", grid, 2, seeds, 2, 1, &bad) == SGKL_ERR_CONFIG);
  CHECK(bad == nullptr);
  sgkl_report_free(back);
  sgkl_report_free(r);

  sgkl_report* jv = nullptr;
  const double deltas[] = {0.0, 0.3};
  const size_t ks[] = {3, 6};
  REQUIRE(sgkl_run_joint_vs_individual(kTiny, deltas, 2, ks, 2, seeds, 1, 1, &jv) == SGKL_OK);
  size_t thresholds = 0;
  CHECK(sgkl_report_threshold_count(jv, &thresholds) == SGKL_OK);
  CHECK(thresholds == 2);
  double delta = -1.0, k = -1.0;
  CHECK(sgkl_report_threshold(jv, 1, &delta, &k) == SGKL_OK);
  CHECK(delta == 0.3);
  CHECK((k == 0.0 || k == 3.0 || k == 6.0));
  sgkl_report_free(jv);
  sgkl_report_free(nullptr);
}

TEST_CASE("null arguments are rejected, not dereferenced") {
  CHECK(sgkl_dataset_graph_count(nullptr, nullptr) == SGKL_ERR_INVALID);
  CHECK(sgkl_fit(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr) == SGKL_ERR_INVALID);
  CHECK(sgkl_model_psi(nullptr, nullptr, nullptr) == SGKL_ERR_INVALID);
  CHECK(sgkl_report_run_count(nullptr, nullptr) == SGKL_ERR_INVALID);
  CHECK(std::string(sgkl_last_error()).find("NULL") != std::string::npos);
}
