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

#ifndef DEPD_ENGINE_HPP
#define DEPD_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "depd/common.hpp"
#include "depd/estimators.hpp"
#include "depd/graph.hpp"
#include "depd/problem.hpp"

namespace depd {

/// Primal iterate x_i, the duals lambda_ij owned by node i (indexed by the
/// position of j in N_i) and the subgradient v_i of h_i certified by the
/// last proximal step.
struct NodeState {
  Vector x;
  std::vector<Vector> duals;
  Vector subgradient;
};

/// What node i received from neighbor j at the start of a round: x_j and
/// lambda_ji. Views into the previous-round snapshot; nullptr marks a
/// message that never arrived.
struct NeighborMessage {
  const Vector* x = nullptr;
  const Vector* lambda = nullptr;
};

struct RoundInbox {
  std::vector<NeighborMessage> messages;  // by neighbor slot
};

/// Inbox of node i built from the previous-round states of every node.
RoundInbox gather_inbox(const Topology& topology, std::span<const NodeState> states, int i);

/// Extra per-node state of the accelerated runner. The fast sequence y_i and
/// its duals live in a NodeState (its `x` field holds y_i) because the dual
/// update couples neighbors through y.
struct AsvrNodeState {
  Vector x;
  Vector snapshot_x;
  Vector snapshot_y;
  Vector epoch_sum_x;
};

/// (1/eta + rho * degree)^-1.
double gamma(double eta, double rho, int degree);

/// One primal-dual round at a node, in closed form:
///   x+ = prox_{gamma h}((gamma/eta)(x - eta g) + gamma sum_j (rho x_j - lambda_ji))
///   lambda_ij+ = -lambda_ji + rho (x_j - x+)
NodeState pd_step(const NodeState& node, const RoundInbox& inbox, const Vector& g, double eta,
                  double rho, const Regularizer& reg);

/// The same round written as a proximal step that consumes the new duals,
///   x+ = prox_{eta h}(x - eta g + eta sum_j lambda_ij+),
/// with lambda_ij+ from the dual update. The implicit equation in x+ is solved
/// per coordinate by bisection (all supported regularizers are separable).
NodeState pd_step_implicit(const NodeState& node, const RoundInbox& inbox, const Vector& g,
                           double eta, double rho, const Regularizer& reg);

struct StepSizeInputs {
  double smoothness = 0.0;
  int num_components = 1;
  int dim = 1;
  std::optional<double> sigma;
  std::int64_t horizon = 1;
  double w1_hint = 1.0;
};

/// Step size from the complexity analysis of each variant.
double default_stepsize(EstimatorKind kind, const StepSizeInputs& in);

struct RunConfig {
  EstimatorKind algorithm = EstimatorKind::kSaga;
  double rho = 0.5;
  /// Empty: per-node default_stepsize; one value: shared; V values: per node.
  std::vector<double> eta;
  /// Rounds for the flat runner.
  std::int64_t iterations = 1000;
  /// Epochs for the SVRG++ and accelerated runners.
  int epochs = 10;
  /// Initial epoch length; 0 picks max_i K_i.
  std::int64_t m1 = 0;
  std::int64_t max_epoch_len = 1000;
  double beta1 = 0.5;
  /// Constant oracle-call probability for the accelerated runner (default p_s = beta_s).
  std::optional<double> asvr_p;
  std::optional<double> early_stop_threshold;
  /// Hard cap on total rounds for the epoch runners.
  std::optional<std::int64_t> max_iterations;
  std::uint64_t seed = 1;
  double w1_hint = 1.0;
  /// Per-node sigma_i for the SGD default step.
  std::vector<double> sigma;
  int threads = 0;
  /// Initial primal point shared by all nodes (default zero).
  std::optional<Vector> x_init;
};

/// Everything an observer may look at after a round.
struct IterationView {
  std::int64_t iteration = 0;
  int epoch = -1;  // -1 for runners without epochs
  std::int64_t oracle_calls = 0;
  std::int64_t sketched_calls = 0;
  std::int64_t comm_rounds = 0;
  /// Iterates x_i whose optimality is being tracked.
  const std::vector<Vector>* x = nullptr;
  /// Primal-dual states coupled by the dual update (y for the accelerated runner).
  std::span<const NodeState> nodes;
};

struct EpochView {
  int epoch = 0;
  std::int64_t iteration = 0;
  std::int64_t oracle_calls = 0;
  std::int64_t epoch_length = 0;
  double beta = 1.0;
  /// Snapshot points x~^{s+1} produced by the epoch.
  const std::vector<Vector>* snapshots = nullptr;
};

struct Observer {
  std::function<void(const IterationView&)> on_iteration;
  std::function<void(const EpochView&)> on_epoch_end;
};

struct RunSummary {
  std::vector<NodeState> nodes;
  std::vector<Vector> x;
  std::vector<Vector> snapshots;
  std::int64_t iterations = 0;
  std::int64_t oracle_calls = 0;
  std::int64_t sketched_calls = 0;
  std::int64_t comm_rounds = 0;
  std::vector<std::int64_t> epoch_lengths;
  std::vector<double> betas;
  std::vector<double> eta;
};

/// Resolved per-node step sizes for a configuration.
std::vector<double> resolve_step_sizes(const RunConfig& config,
                                       std::span<const LocalProblem> problems);

/// beta_{s+1} = (sqrt(beta^4 + 4 beta^2) - beta^2) / 2.
double next_beta(double beta);

/// Synchronous rounds with Full, Sgd, Saga, LooplessSvrg or Sega estimators.
RunSummary run_flat(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer = {});

/// Epoch loop with doubling epoch lengths and averaged snapshots.
RunSummary run_svrg(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer = {});

/// Accelerated epoch runner with negative momentum beta_s.
RunSummary run_asvr(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer = {});

/// Dispatches on config.algorithm.
RunSummary run(std::span<const LocalProblem> problems, const Topology& topology,
               const RunConfig& config, const Observer& observer = {});

}  // namespace depd

#endif  // DEPD_ENGINE_HPP
