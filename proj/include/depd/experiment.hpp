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

#ifndef DEPD_EXPERIMENT_HPP
#define DEPD_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depd/engine.hpp"
#include "depd/graph.hpp"
#include "depd/metrics.hpp"
#include "depd/problem.hpp"

namespace depd {

struct TopologySpec {
  std::string kind = "random";  // random | ring | complete | edges | edge_list
  int nodes = 10;
  int edges = 20;
  std::uint64_t seed = 1;
  std::vector<std::pair<int, int>> edge_pairs;
  std::string path;
};

struct DataSpec {
  std::string source = "synthetic";  // synthetic | libsvm
  SynthKind kind = SynthKind::kSeparableLogistic;
  int dim = 20;
  int samples_per_node = 100;
  std::uint64_t seed = 1;
  SynthOptions synth;
  std::string path;
  LabelMode label_mode = LabelMode::kBinary;
  std::uint64_t partition_seed = 1;
};

struct RegularizerSpec {
  RegularizerType type = RegularizerType::kZero;
  double weight = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  Regularizer build(int dim) const;
};

struct ReferenceSpec {
  ReferenceOptions options;
  /// Load a saved reference instead of computing one.
  std::string path;
};

struct OutputSpec {
  std::string path = "trace.csv";
  std::string reference_path = "reference.json";
  std::int64_t stride = 1;
};

struct SweepSpec {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Optional list of algorithm names; empty sweeps only run.algorithm.
  std::vector<std::string> algorithms;
  /// Budgets in cumulative gradient evaluations (oracle plus sketched calls, network total).
  std::vector<std::int64_t> budgets;
  std::string summary_path = "summary.csv";
};

struct ExperimentConfig {
  TopologySpec topology;
  DataSpec data;
  LossKind loss = LossKind::logistic();
  RegularizerSpec regularizer;
  RunConfig run;
  /// Estimate sigma_i at the reference for the SGD default step.
  bool sigma_from_reference = true;
  ReferenceSpec reference;
  OutputSpec output;
  SweepSpec sweep;
  /// Directory that relative paths in the config resolve against.
  std::filesystem::path base_dir;
};

/// Parses a JSON document. Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct Experiment {
  Topology topology;
  std::vector<LocalProblem> problems;
};

Experiment build_experiment(const ExperimentConfig& config);

/// The configured reference: loaded from reference.path if set, else computed.
ReferenceSolution obtain_reference(const ExperimentConfig& config, const Experiment& experiment);

/// Runs config.run on the experiment and records the trace.
Trace run_experiment(const ExperimentConfig& config, const Experiment& experiment,
                     const ReferenceSolution& ref, RunSummary* summary = nullptr);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

inline constexpr const char* kTraceHeader =
    "iter,epoch,oracle_calls,sketched_calls,comm_rounds,bregman_gap,consensus_residual,objective";

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(const std::filesystem::path& path);

inline constexpr int kReferenceFormatVersion = 1;

void save_reference(const std::filesystem::path& path, const ReferenceSolution& ref);
ReferenceSolution load_reference(const std::filesystem::path& path);

/// Gap of the last row whose cumulative oracle plus sketched calls do not exceed budget;
/// NaN if no row qualifies.
double gap_at_budget(const Trace& trace, std::int64_t budget);

struct SweepSummaryRow {
  std::string algorithm;
  std::int64_t budget = 0;
  double median_gap = 0.0;
  int runs = 0;
};

struct SweepResult {
  std::vector<std::filesystem::path> traces;
  std::vector<SweepSummaryRow> summary;
};

double median(std::vector<double> values);

/// Trace files named <stem>[_<algorithm>]_seed<s>.csv next to output.path plus a
/// summary CSV of median gaps at each budget.
SweepResult run_sweep(const ExperimentConfig& config, const Experiment& experiment,
                      const ReferenceSolution& ref);

struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
};

/// Subcommand bodies shared by the CLI and the Python module. Each returns the
/// path(s) written.
std::filesystem::path cmd_run(const std::filesystem::path& config_path,
                              const CommandOverrides& overrides = {});
std::filesystem::path cmd_reference(const std::filesystem::path& config_path,
                                    const CommandOverrides& overrides = {});
SweepResult cmd_sweep(const std::filesystem::path& config_path,
                      const CommandOverrides& overrides = {});

}  // namespace depd

#endif  // DEPD_EXPERIMENT_HPP
