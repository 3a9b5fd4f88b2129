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

#ifndef DEPD_METRICS_HPP
#define DEPD_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "depd/common.hpp"
#include "depd/engine.hpp"
#include "depd/graph.hpp"
#include "depd/problem.hpp"

namespace depd {

enum class ReferenceMethod {
  kAuto,        // Newton when every h_i is smooth, primal-dual otherwise
  kNewton,      // aggregate Newton solve plus a Laplacian dual certificate
  kPrimalDual,  // exact-gradient primal-dual run to tolerance
};

struct ReferenceOptions {
  double tol = 1e-9;
  std::int64_t max_iters = 200000;
  ReferenceMethod method = ReferenceMethod::kAuto;
  /// Penalty and step for the primal-dual path (step defaults to 1/(2 L_i)).
  double rho = 1.0;
  std::optional<double> eta;
  /// Residuals are checked every this many primal-dual rounds.
  int check_every = 50;
};

struct KktResiduals {
  double stationarity = 0.0;
  double dual_antisymmetry = 0.0;
  double consensus = 0.0;

  double max() const;
};

/// A saddle point (x*, lambda*) with per-node subgradient certificates v*_i.
struct ReferenceSolution {
  Vector x_star;
  /// lambda*_ij by node i and neighbor slot; exactly antisymmetric.
  std::vector<std::vector<Vector>> lambda_star;
  std::vector<Vector> v_star;
  double kkt_residual = 0.0;
  std::int64_t iterations = 0;
};

ReferenceSolution compute_reference(std::span<const LocalProblem> problems,
                                    const Topology& topology, const ReferenceOptions& options = {});

/// Residuals of a reference treated as a network state with all copies equal to x*.
KktResiduals reference_residuals(const ReferenceSolution& ref,
                                 std::span<const LocalProblem> problems, const Topology& topology);

/// max_i ||v_i + grad f_i(x_i) + sum_j lambda_ji||, max over edges of ||lambda_ij + lambda_ji||
/// and of ||x_i - x_j||. v_i is the state's certificate, or grad h_i(x_i) when absent.
KktResiduals kkt_residuals(std::span<const NodeState> states,
                           std::span<const LocalProblem> problems, const Topology& topology);

/// D_{f_i + h_i}(x, x*) with the reference's certificate v*_i.
double node_bregman_gap(const Vector& x, const LocalProblem& problem, const ReferenceSolution& ref,
                        int node);

/// Per-node f_i(x*) + h_i(x*) and grad f_i(x*) + v*_i, cached for repeated gap evaluation.
struct GapAnchor {
  Vector x_star;
  std::vector<double> value;
  std::vector<Vector> slope;
};

GapAnchor make_gap_anchor(std::span<const LocalProblem> problems, const ReferenceSolution& ref);

/// sum_i D_{f_i + h_i}(x_i, x*). Values in [-1e-10, 0) are reported as 0; anything
/// more negative throws NegativeGap.
double bregman_gap(std::span<const Vector> x, std::span<const LocalProblem> problems,
                   const ReferenceSolution& ref);
double bregman_gap(std::span<const Vector> x, std::span<const LocalProblem> problems,
                   const GapAnchor& anchor);

/// max over edges of ||x_i - x_j||.
double consensus_residual(std::span<const Vector> x, const Topology& topology);

/// (1/2 rho) sum_i sum_{j in N_i} ||rho (x_i - x*) - (lambda_ij - lambda*_ij)||^2.
double psi(std::span<const NodeState> states, const ReferenceSolution& ref, double rho);

/// |(Psi(next) - Psi(prev)) + 2 sum_ij <x_i(next) - x*, lambda_ij(next) - lambda*_ij>|.
double psi_identity_residual(std::span<const NodeState> prev, std::span<const NodeState> next,
                             const ReferenceSolution& ref, double rho);

/// (1/K) sum_k ||grad f(x*, xi_k) - grad f(x*)||^2.
double sigma_at_reference(const LocalProblem& problem, const Vector& x_star);

/// The three quantities whose maximum bounds W_1 at a given state.
struct InitialDistance {
  double primal = 0.0;    // max_i ||x_i - x*||^2
  double dual = 0.0;      // max_ij ||lambda_ij - lambda*_ij||^2
  double bregman = 0.0;   // max_i D_{f_i + h_i}(x_i, x*)

  double max() const;
};

InitialDistance initial_distance(std::span<const NodeState> states,
                                 std::span<const LocalProblem> problems,
                                 const ReferenceSolution& ref);

struct TraceRow {
  std::int64_t iteration = 0;
  int epoch = -1;
  std::int64_t oracle_calls = 0;
  std::int64_t sketched_calls = 0;
  std::int64_t comm_rounds = 0;
  double bregman_gap = 0.0;
  double consensus_residual = 0.0;
  double objective = 0.0;
  /// Running mean of the gap over every iterate so far (row 0 included),
  /// the averaged quantity that the rate bounds control. Not serialized.
  double mean_gap = 0.0;
};

/// Per-epoch record of the snapshot points of the epoch runners.
struct EpochRow {
  int epoch = 0;
  std::int64_t iteration = 0;
  std::int64_t oracle_calls = 0;
  std::int64_t epoch_length = 0;
  double beta = 1.0;
  double snapshot_gap = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
  std::vector<EpochRow> epochs;
};

/// Observer that stores a row on every stride-th round (row 0 always). The gap
/// itself is evaluated every round to keep the running mean exact.
class TraceRecorder {
 public:
  TraceRecorder(std::span<const LocalProblem> problems, const Topology& topology,
                const ReferenceSolution& ref, std::int64_t stride = 1);

  Observer observer();
  const Trace& trace() const { return trace_; }
  Trace take() { return std::move(trace_); }

 private:
  std::span<const LocalProblem> problems_;
  const Topology& topology_;
  GapAnchor anchor_;
  std::int64_t stride_;
  double gap_sum_ = 0.0;
  std::int64_t gap_count_ = 0;
  Trace trace_;
};

}  // namespace depd

#endif  // DEPD_METRICS_HPP
