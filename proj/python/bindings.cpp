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


#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depd/common.hpp"
#include "depd/engine.hpp"
#include "depd/estimators.hpp"
#include "depd/experiment.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

depd::CommandOverrides overrides(std::optional<std::uint64_t> seed, std::optional<fs::path> out,
                                 std::optional<int> threads) {
  depd::CommandOverrides o;
  o.seed = seed;
  o.out = std::move(out);
  o.threads = threads;
  return o;
}

py::dict trace_to_dict(const depd::Trace& trace) {
  const std::size_t n = trace.rows.size();
  py::array_t<std::int64_t> iter(n), epoch(n), oracle(n), sketched(n), comm(n);
  py::array_t<double> gap(n), consensus(n), objective(n), mean_gap(n);
  auto it = iter.mutable_unchecked<1>();
  auto ep = epoch.mutable_unchecked<1>();
  auto oc = oracle.mutable_unchecked<1>();
  auto sc = sketched.mutable_unchecked<1>();
  auto cr = comm.mutable_unchecked<1>();
  auto g = gap.mutable_unchecked<1>();
  auto c = consensus.mutable_unchecked<1>();
  auto o = objective.mutable_unchecked<1>();
  auto m = mean_gap.mutable_unchecked<1>();
  for (std::size_t r = 0; r < n; ++r) {
    const depd::TraceRow& row = trace.rows[r];
    it(r) = row.iteration;
    ep(r) = row.epoch;
    oc(r) = row.oracle_calls;
    sc(r) = row.sketched_calls;
    cr(r) = row.comm_rounds;
    g(r) = row.bregman_gap;
    c(r) = row.consensus_residual;
    o(r) = row.objective;
    m(r) = row.mean_gap;
  }
  py::dict d;
  d["iter"] = iter;
  d["epoch"] = epoch;
  d["oracle_calls"] = oracle;
  d["sketched_calls"] = sketched;
  d["comm_rounds"] = comm;
  d["bregman_gap"] = gap;
  d["consensus_residual"] = consensus;
  d["objective"] = objective;
  d["mean_gap"] = mean_gap;
  py::list epochs;
  for (const depd::EpochRow& e : trace.epochs) {
    py::dict row;
    row["epoch"] = e.epoch;
    row["iteration"] = e.iteration;
    row["oracle_calls"] = e.oracle_calls;
    row["epoch_length"] = e.epoch_length;
    row["beta"] = e.beta;
    row["snapshot_gap"] = e.snapshot_gap;
    epochs.append(row);
  }
  d["epochs"] = epochs;
  return d;
}

py::dict reference_to_dict(const depd::ReferenceSolution& ref) {
  py::dict d;
  d["x_star"] = ref.x_star;
  d["lambda_star"] = ref.lambda_star;
  d["v_star"] = ref.v_star;
  d["kkt_residual"] = ref.kkt_residual;
  d["iterations"] = ref.iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decentralized stochastic primal-dual simulator";

  py::register_exception<depd::Error>(m, "DepdError", PyExc_RuntimeError);

  m.def("run", [](const fs::path& config, std::optional<std::uint64_t> seed, std::optional<fs::path> out,
                  std::optional<int> threads) { return depd::cmd_run(config, overrides(seed, out, threads)); },
        py::arg("config"), py::kw_only(), py::arg("seed") = py::none(), py::arg("out") = py::none(),
        py::arg("threads") = py::none(), "Run the configured algorithm and write its CSV trace. Returns the path.");

  m.def("reference",
        [](const fs::path& config, std::optional<fs::path> out) {
          return depd::cmd_reference(config, overrides(std::nullopt, out, std::nullopt));
        },
        py::arg("config"), py::kw_only(), py::arg("out") = py::none(),
        "Compute and save the reference solution. Returns the path.");

  m.def("sweep",
        [](const fs::path& config, std::optional<std::uint64_t> seed, std::optional<fs::path> out,
           std::optional<int> threads) {
          depd::SweepResult result = depd::cmd_sweep(config, overrides(seed, out, threads));
          py::list summary;
          for (const auto& row : result.summary) {
            py::dict r;
            r["algorithm"] = row.algorithm;
            r["budget"] = row.budget;
            r["median_gap"] = row.median_gap;
            r["runs"] = row.runs;
            summary.append(r);
          }
          py::dict d;
          d["traces"] = result.traces;
          d["summary"] = summary;
          return d;
        },
        py::arg("config"), py::kw_only(), py::arg("seed") = py::none(), py::arg("out") = py::none(),
        py::arg("threads") = py::none(), "Run every configured seed and algorithm and summarize.");

  m.def("simulate",
        [](const std::string& config_json, const fs::path& base_dir) {
          const depd::ExperimentConfig config = depd::parse_config(config_json, base_dir);
          const depd::Experiment experiment = depd::build_experiment(config);
          const depd::ReferenceSolution ref = depd::obtain_reference(config, experiment);
          depd::RunSummary summary;
          depd::Trace trace;
          {
            py::gil_scoped_release release;
            trace = depd::run_experiment(config, experiment, ref, &summary);
          }
          py::dict d = trace_to_dict(trace);
          d["x"] = summary.x;
          d["eta"] = summary.eta;
          d["x_star"] = ref.x_star;
          return d;
        },
        py::arg("config_json"), py::arg("base_dir") = fs::path{},
        "Run a configuration given as JSON text and return the trace columns without writing files.");

  m.def("compute_reference",
        [](const std::string& config_json, const fs::path& base_dir) {
          const depd::ExperimentConfig config = depd::parse_config(config_json, base_dir);
          const depd::Experiment experiment = depd::build_experiment(config);
          return reference_to_dict(depd::obtain_reference(config, experiment));
        },
        py::arg("config_json"), py::arg("base_dir") = fs::path{},
        "Reference saddle point of a configuration given as JSON text.");

  m.def("load_reference", [](const fs::path& path) { return reference_to_dict(depd::load_reference(path)); },
        py::arg("path"));
  m.def("read_trace", [](const fs::path& path) { return trace_to_dict(depd::read_trace_csv(path)); },
        py::arg("path"));
  m.def("next_beta", &depd::next_beta, py::arg("beta"));
  m.def("estimators", [] {
    std::vector<std::string> names;
    for (auto kind : {depd::EstimatorKind::kFull, depd::EstimatorKind::kSgd, depd::EstimatorKind::kSaga,
                      depd::EstimatorKind::kSvrgPlusPlus, depd::EstimatorKind::kLooplessSvrg,
                      depd::EstimatorKind::kSega, depd::EstimatorKind::kAsvrInner}) {
      names.emplace_back(depd::to_string(kind));
    }
    return names;
  });
}
