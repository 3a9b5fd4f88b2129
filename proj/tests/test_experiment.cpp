// Copyright 2026 The depd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "depd/experiment.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace depd;
namespace fs = std::filesystem;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = testing::temp_path("experiment") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string small_config(const fs::path& dir, const std::string& algorithm, int iterations = 300) {
  return R"({
  "topology": {"kind": "random", "nodes": 6, "edges": 9, "seed": 2},
  "data": {"kind": "logistic", "dim": 5, "samples_per_node": 20, "seed": 3, "normalize_rows": true},
  "loss": {"type": "logistic", "tau": 0.01},
  "run": {"algorithm": ")" + algorithm + R"(", "iterations": )" + std::to_string(iterations) +
         R"(, "epochs": 4, "seed": 1},
  "output": {"path": ")" + (dir / "trace.csv").string() + R"(", "reference_path": ")" +
         (dir / "reference.json").string() + R"(", "stride": 5}
})";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path path = dir / "config.json";
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace

TEST_CASE("configuration parsing") {
  ExperimentConfig c = parse_config(R"({
    "topology": {"kind": "edges", "nodes": 3, "edges": [[0, 1], [1, 2]]},
    "data": {"kind": "least_squares", "dim": 4, "samples_per_node": 7, "noise_std": 0.5},
    "loss": {"type": "least_squares"},
    "regularizer": {"type": "l1", "weight": 0.25},
    "run": {"algorithm": "svrg", "eta": [0.1, 0.2, 0.3], "rho": 0.9, "m1": 8, "max_epoch_len": 64,
            "early_stop_threshold": 1e-6, "max_iterations": 500, "sigma": [1, 2, 3], "threads": 2},
    "reference": {"tol": 1e-8, "method": "primal_dual"},
    "output": {"stride": 10},
    "sweep": {"seeds": [4, 5], "budgets": [100, 200]}
  })");
  CHECK(c.topology.kind == "edges");
  CHECK(c.topology.edge_pairs.size() == 2);
  CHECK(c.data.kind == SynthKind::kGaussianLeastSquares);
  CHECK(c.data.samples_per_node == 7);
  CHECK(c.data.synth.noise_std == 0.5);
  CHECK(c.loss.type == LossType::kLeastSquares);
  CHECK(c.regularizer.type == RegularizerType::kL1);
  CHECK(c.regularizer.weight == 0.25);
  CHECK(c.run.algorithm == EstimatorKind::kSvrgPlusPlus);
  CHECK(c.run.eta == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(c.run.rho == 0.9);
  CHECK(c.run.early_stop_threshold == 1e-6);
  CHECK(c.run.max_iterations == 500);
  CHECK(c.run.sigma.size() == 3);
  CHECK(!c.sigma_from_reference);
  CHECK(c.run.threads == 2);
  CHECK(c.reference.options.tol == 1e-8);
  CHECK(c.reference.options.method == ReferenceMethod::kPrimalDual);
  CHECK(c.output.stride == 10);
  CHECK(c.sweep.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.sweep.budgets == std::vector<std::int64_t>{100, 200});

  ExperimentConfig defaults = parse_config("{}");
  CHECK(defaults.run.algorithm == EstimatorKind::kSaga);
  CHECK(defaults.run.eta.empty());
  CHECK(defaults.topology.nodes == 10);
}

TEST_CASE("configuration errors") {
  for (const char* text : {
           "{", "[]", R"({"bogus": {}})", R"({"run": {"algorithm": "adam"}})",
           R"({"run": {"iterations": "many"}})", R"({"run": {"eta": "fast"}})",
           R"({"topology": {"kind": "star"}})", R"({"topology": {"edges": "x"}})",
           R"({"data": {"kind": "poisson"}})", R"({"data": {"source": "s3"}})",
           R"({"loss": {"type": "hinge"}})", R"({"regularizer": {"type": "tv"}})",
           R"({"reference": {"method": "magic"}})", R"({"output": {"stride": 0}})",
           R"({"sweep": {"seeds": []}})", R"({"sweep": {"algorithms": ["saga", "nope"]}})",
           R"({"run": {"rho": 0.5, "extra": 1}})", R"({"run": 3})"}) {
    CAPTURE(text);
    CHECK(code_of([&] { parse_config(text); }) == ErrorCode::kConfigError);
  }
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kIoError);
}

TEST_CASE("relative input paths resolve against the config directory") {
  fs::path dir = scratch_dir("paths");
  std::ofstream(dir / "graph.txt") << "0 1\n1 2\n2 0\n";
  std::ofstream(dir / "data.svm") << "+1 1:0.5 2:1\n-1 2:1.0\n+1 1:2\n-1 1:-1 2:0.5\n+1 2:3\n-1 1:1\n";
  fs::path cfg = write_config(dir, R"({
    "topology": {"kind": "edge_list", "path": "graph.txt"},
    "data": {"source": "libsvm", "path": "data.svm"}
  })");
  Experiment e = build_experiment(load_config(cfg));
  CHECK(e.topology.num_nodes() == 3);
  CHECK(e.problems.size() == 3);
  CHECK(e.problems[0].dim() == 2);
  int total = 0;
  for (const auto& p : e.problems) total += p.num_components();
  CHECK(total == 6);
}

TEST_CASE("run command output is deterministic and converges") {
  fs::path dir = scratch_dir("run");
  fs::path cfg = write_config(dir, small_config(dir, "saga", 1500));
  fs::path first = cmd_run(cfg);
  const std::string a = slurp(first);
  fs::rename(first, dir / "first.csv");
  fs::path second = cmd_run(cfg);
  CHECK(second == first);
  CHECK(slurp(second) == a);
  CommandOverrides threads;
  threads.threads = 3;
  CHECK(slurp(cmd_run(cfg, threads)) == a);

  Trace trace = read_trace_csv(first);
  REQUIRE(trace.rows.size() == 1500 / 5 + 1);
  CHECK(trace.rows.back().bregman_gap < trace.rows.front().bregman_gap);
  CHECK(a.substr(0, a.find('\n')) == kTraceHeader);

  CommandOverrides other;
  other.seed = 9;
  other.out = dir / "seed9.csv";
  CHECK(cmd_run(cfg, other) == dir / "seed9.csv");
  CHECK(slurp(dir / "seed9.csv") != a);
}

TEST_CASE("every algorithm runs from a config") {
  fs::path dir = scratch_dir("algorithms");
  for (const char* name : {"full", "sgd", "saga", "svrg", "lsvrg", "sega", "asvr"}) {
    CAPTURE(name);
    fs::path cfg = write_config(dir, small_config(dir, name, 200));
    Trace trace = read_trace_csv(cmd_run(cfg));
    REQUIRE(trace.rows.size() >= 2);
    const bool epochs = std::string(name) == "svrg" || std::string(name) == "asvr";
    CHECK((trace.rows.back().epoch > 0) == epochs);
    for (const TraceRow& r : trace.rows) CHECK(r.bregman_gap >= 0.0);
  }
}

TEST_CASE("reference files round trip") {
  fs::path dir = scratch_dir("reference");
  fs::path cfg = write_config(dir, small_config(dir, "saga"));
  fs::path path = cmd_reference(cfg);
  ReferenceSolution loaded = load_reference(path);
  ExperimentConfig config = load_config(cfg);
  Experiment e = build_experiment(config);
  ReferenceSolution computed = compute_reference(e.problems, e.topology, config.reference.options);
  CHECK(loaded.x_star == computed.x_star);
  CHECK(loaded.v_star.size() == computed.v_star.size());
  for (std::size_t i = 0; i < loaded.v_star.size(); ++i) {
    CHECK(loaded.v_star[i] == computed.v_star[i]);
    for (std::size_t s = 0; s < loaded.lambda_star[i].size(); ++s) {
      CHECK(loaded.lambda_star[i][s] == computed.lambda_star[i][s]);
    }
  }
  CHECK(loaded.kkt_residual == computed.kkt_residual);
  CHECK(loaded.iterations == computed.iterations);

  save_reference(dir / "again.json", loaded);
  CHECK(slurp(dir / "again.json") == slurp(path));

  // A saved reference drives the run to the same trace as a computed one.
  const std::string plain = slurp(cmd_run(cfg));
  std::string text = small_config(dir, "saga");
  text.insert(text.rfind('}'), R"(, "reference": {"path": "reference.json"})");
  fs::path with_ref = write_config(dir, text);
  CHECK(slurp(cmd_run(with_ref)) == plain);

  std::ofstream(dir / "reference.json") << R"({"format": "other"})";
  CHECK(code_of([&] { load_reference(dir / "reference.json"); }) == ErrorCode::kParseError);
  ReferenceSolution wrong = computed;
  wrong.lambda_star.pop_back();
  wrong.v_star.pop_back();
  save_reference(dir / "reference.json", wrong);
  CHECK(code_of([&] { cmd_run(with_ref); }) == ErrorCode::kConfigMismatch);
}

TEST_CASE("sweeps emit one trace per seed and a median summary") {
  fs::path dir = scratch_dir("sweep");
  std::string text = small_config(dir, "saga", 400);
  text.insert(text.rfind('}'), R"(, "sweep": {"budgets": [500, 1000, 100000]})");
  fs::path cfg = write_config(dir, text);
  SweepResult result = cmd_sweep(cfg);
  REQUIRE(result.traces.size() == 5);
  for (std::uint64_t s = 1; s <= 5; ++s) CHECK(fs::exists(dir / ("trace_seed" + std::to_string(s) + ".csv")));
  REQUIRE(fs::exists(dir / "summary.csv"));
  REQUIRE(result.summary.size() == 3);

  std::vector<Trace> traces;
  for (const auto& p : result.traces) traces.push_back(read_trace_csv(p));
  for (const SweepSummaryRow& row : result.summary) {
    std::vector<double> gaps;
    for (const Trace& t : traces) gaps.push_back(gap_at_budget(t, row.budget));
    std::sort(gaps.begin(), gaps.end());
    CHECK(row.median_gap == gaps[2]);
    CHECK(row.runs == 5);
  }
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("algorithm,budget,median_bregman_gap,runs\n", 0) == 0);
  CHECK(summary.find("saga,1000,") != std::string::npos);

  std::string multi = small_config(dir, "saga", 100);
  multi.insert(multi.rfind('}'), R"(, "sweep": {"seeds": [1, 2], "algorithms": ["saga", "lsvrg"]})");
  SweepResult two = cmd_sweep(write_config(dir, multi));
  CHECK(two.traces.size() == 4);
  CHECK(fs::exists(dir / "trace_lsvrg_seed2.csv"));
  CHECK(two.summary.size() == 2);

  CommandOverrides one;
  one.seed = 7;
  CHECK(cmd_sweep(write_config(dir, text), one).traces.size() == 1);
}

TEST_CASE("budget lookup and medians") {
  Trace t;
  for (int i = 0; i < 5; ++i) {
    TraceRow r;
    r.oracle_calls = 100 * i;
    r.sketched_calls = i;
    r.bregman_gap = 1.0 / (i + 1);
    t.rows.push_back(r);
  }
  CHECK(gap_at_budget(t, 0) == 1.0);
  CHECK(gap_at_budget(t, 201) == 1.0 / 2);
  CHECK(gap_at_budget(t, 202) == 1.0 / 3);
  CHECK(gap_at_budget(t, 1 << 20) == 1.0 / 5);
  CHECK(std::isnan(gap_at_budget(t, -1)));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({nan, 5.0, 1.0}) == 3.0);
  CHECK(std::isnan(median({nan})));
}

TEST_CASE("number formatting and CSV round trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.123456789, 5e-324, 1.0 / 3.0}) {
    const std::string s = format_double(v);
    double parsed = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), parsed);
    CHECK(parsed == v);
  }
  CHECK(format_double(0.1) == "0.1");

  Trace t;
  for (int i = 0; i < 4; ++i) {
    TraceRow r;
    r.iteration = i;
    r.epoch = i % 2 == 0 ? -1 : i;
    r.oracle_calls = 10 * i;
    r.sketched_calls = i;
    r.comm_rounds = i;
    r.bregman_gap = 1.0 / (3.0 + i);
    r.consensus_residual = std::sqrt(2.0) * i;
    r.objective = -std::exp(1.0) * i;
    t.rows.push_back(r);
  }
  fs::path path = scratch_dir("csv") / "t.csv";
  write_trace_csv(path, t);
  Trace back = read_trace_csv(path);
  REQUIRE(back.rows.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.rows[i].iteration == t.rows[i].iteration);
    CHECK(back.rows[i].epoch == t.rows[i].epoch);
    CHECK(back.rows[i].oracle_calls == t.rows[i].oracle_calls);
    CHECK(back.rows[i].sketched_calls == t.rows[i].sketched_calls);
    CHECK(back.rows[i].comm_rounds == t.rows[i].comm_rounds);
    CHECK(back.rows[i].bregman_gap == t.rows[i].bregman_gap);
    CHECK(back.rows[i].consensus_residual == t.rows[i].consensus_residual);
    CHECK(back.rows[i].objective == t.rows[i].objective);
  }
  std::ofstream(path) << "wrong header\n";
  CHECK(code_of([&] { read_trace_csv(path); }) == ErrorCode::kParseError);
  std::ofstream(path) << kTraceHeader << "\n1,2,3\n";
  CHECK(code_of([&] { read_trace_csv(path); }) == ErrorCode::kParseError);
}
