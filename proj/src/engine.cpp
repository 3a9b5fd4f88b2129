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

#include "depd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "depd/parallel.hpp"
#include "depd/rng.hpp"

namespace depd {

RoundInbox gather_inbox(const Topology& topology, std::span<const NodeState> states, int i) {
  RoundInbox inbox;
  auto nbrs = topology.neighbors(i);
  inbox.messages.resize(nbrs.size());
  for (std::size_t s = 0; s < nbrs.size(); ++s) {
    const NodeState& from = states[nbrs[s]];
    inbox.messages[s].x = &from.x;
    inbox.messages[s].lambda = &from.duals[topology.reverse_slot(i, static_cast<int>(s))];
  }
  return inbox;
}

double gamma(double eta, double rho, int degree) { return 1.0 / (1.0 / eta + rho * degree); }

namespace {

void check_inbox(const NodeState& node, const RoundInbox& inbox) {
  if (inbox.messages.size() != node.duals.size()) {
    throw Error(ErrorCode::kMissingNeighborMessage,
                "inbox has " + std::to_string(inbox.messages.size()) + " messages for " +
                    std::to_string(node.duals.size()) + " neighbors");
  }
  for (std::size_t s = 0; s < inbox.messages.size(); ++s) {
    if (inbox.messages[s].x == nullptr || inbox.messages[s].lambda == nullptr) {
      throw Error(ErrorCode::kMissingNeighborMessage, "neighbor slot " + std::to_string(s));
    }
  }
}

// sum_j (rho x_j - lambda_ji)
Vector neighbor_pull(const RoundInbox& inbox, double rho, Eigen::Index dim) {
  Vector pull = Vector::Zero(dim);
  for (const auto& msg : inbox.messages) pull += rho * *msg.x - *msg.lambda;
  return pull;
}

void update_duals(NodeState& out, const RoundInbox& inbox, double rho) {
  out.duals.resize(inbox.messages.size());
  for (std::size_t s = 0; s < inbox.messages.size(); ++s) {
    out.duals[s] = -*inbox.messages[s].lambda + rho * (*inbox.messages[s].x - out.x);
  }
}

}  // namespace

NodeState pd_step(const NodeState& node, const RoundInbox& inbox, const Vector& g, double eta,
                  double rho, const Regularizer& reg) {
  check_inbox(node, inbox);
  if (g.size() != node.x.size()) throw Error(ErrorCode::kDimensionMismatch, "gradient dimension");
  const double step = gamma(eta, rho, static_cast<int>(inbox.messages.size()));
  Vector z = (step / eta) * (node.x - eta * g) + step * neighbor_pull(inbox, rho, node.x.size());
  NodeState out;
  out.x = prox(reg, z, step);
  out.subgradient = (z - out.x) / step;
  update_duals(out, inbox, rho);
  return out;
}

NodeState pd_step_implicit(const NodeState& node, const RoundInbox& inbox, const Vector& g,
                           double eta, double rho, const Regularizer& reg) {
  check_inbox(node, inbox);
  if (g.size() != node.x.size()) throw Error(ErrorCode::kDimensionMismatch, "gradient dimension");
  const double coupling = eta * rho * static_cast<double>(inbox.messages.size());
  const Vector base = node.x - eta * g + eta * neighbor_pull(inbox, rho, node.x.size());

  NodeState out;
  out.x.resize(node.x.size());
  out.subgradient.resize(node.x.size());
  for (Eigen::Index j = 0; j < node.x.size(); ++j) {
    const int jj = static_cast<int>(j);
    // residual(u) = u - prox(base_j - coupling u) has slope >= 1.
    auto residual = [&](double u) {
      return u - reg.prox_coordinate(jj, base[j] - coupling * u, eta);
    };
    double width = 1.0 + std::abs(base[j]);
    double lo = -width;
    double hi = width;
    while (residual(lo) > 0.0) lo -= (width *= 2.0);
    while (residual(hi) < 0.0) hi += (width *= 2.0);
    for (int it = 0; it < 4000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (residual(mid) > 0.0 ? hi : lo) = mid;
    }
    const double root = std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
    out.x[j] = root;
    const double prox_input = base[j] - coupling * root;
    out.subgradient[j] = (prox_input - reg.prox_coordinate(jj, prox_input, eta)) / eta;
  }
  update_duals(out, inbox, rho);
  return out;
}

double default_stepsize(EstimatorKind kind, const StepSizeInputs& in) {
  const double L = in.smoothness;
  const double K = in.num_components;
  if (!(L > 0.0) || !(K > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "step size needs positive L and K");
  }
  switch (kind) {
    case EstimatorKind::kFull: return 1.0 / (2.0 * L);
    case EstimatorKind::kSgd: {
      if (!in.sigma) throw Error(ErrorCode::kMissingSigma, "SGD step needs sigma_i");
      const double cap = 1.0 / (4.0 * L);
      if (*in.sigma <= 0.0) return cap;
      const double eta = std::sqrt(in.w1_hint) /
                         (*in.sigma * std::sqrt(static_cast<double>(std::max<std::int64_t>(1, in.horizon))));
      return std::min(eta, cap);
    }
    case EstimatorKind::kSaga: return 1.0 / (2.0 * std::sqrt(L * std::max(K, 16.0 * L)));
    case EstimatorKind::kSvrgPlusPlus: return 1.0 / (6.0 * L);
    case EstimatorKind::kLooplessSvrg: return 1.0 / std::sqrt(2.0 * L * std::max(K, 32.0 * L));
    case EstimatorKind::kSega: return 1.0 / (8.0 * in.dim * L);
    case EstimatorKind::kAsvrInner: return 2.0 / (5.0 * L);
  }
  return 1.0 / L;
}

std::vector<double> resolve_step_sizes(const RunConfig& config,
                                       std::span<const LocalProblem> problems) {
  const std::size_t V = problems.size();
  std::vector<double> eta(V);
  if (config.eta.size() == 1) {
    std::fill(eta.begin(), eta.end(), config.eta.front());
  } else if (config.eta.size() == V) {
    eta = config.eta;
  } else if (config.eta.empty()) {
    for (std::size_t i = 0; i < V; ++i) {
      StepSizeInputs in;
      in.smoothness = problems[i].smoothness();
      in.num_components = problems[i].num_components();
      in.dim = problems[i].dim();
      if (i < config.sigma.size()) in.sigma = config.sigma[i];
      in.horizon = config.iterations;
      in.w1_hint = config.w1_hint;
      eta[i] = default_stepsize(config.algorithm, in);
    }
  } else {
    throw Error(ErrorCode::kConfigMismatch, "eta must have 0, 1 or V entries");
  }
  for (double e : eta) {
    if (!(e > 0.0)) throw Error(ErrorCode::kConfigMismatch, "eta must be positive");
  }
  return eta;
}

double next_beta(double beta) {
  const double b2 = beta * beta;
  return (std::sqrt(b2 * b2 + 4.0 * b2) - b2) / 2.0;
}

namespace {

void validate(std::span<const LocalProblem> problems, const Topology& topology,
              const RunConfig& config) {
  if (static_cast<int>(problems.size()) != topology.num_nodes()) {
    throw Error(ErrorCode::kConfigMismatch,
                std::to_string(problems.size()) + " problems for " +
                    std::to_string(topology.num_nodes()) + " nodes");
  }
  const int n = problems.front().dim();
  for (const auto& p : problems) {
    if (p.dim() != n) throw Error(ErrorCode::kConfigMismatch, "problems differ in dimension");
  }
  if (!(config.rho > 0.0)) throw Error(ErrorCode::kConfigMismatch, "rho must be positive");
  if (config.x_init && config.x_init->size() != n) {
    throw Error(ErrorCode::kConfigMismatch, "x_init dimension");
  }
}

Vector initial_point(std::span<const LocalProblem> problems, const RunConfig& config) {
  return config.x_init.value_or(Vector::Zero(problems.front().dim()));
}

std::vector<NodeState> initial_states(std::span<const LocalProblem> problems,
                                      const Topology& topology, const RunConfig& config) {
  const Vector x0 = initial_point(problems, config);
  std::vector<NodeState> states(topology.num_nodes());
  for (int i = 0; i < topology.num_nodes(); ++i) {
    states[i].x = x0;
    states[i].duals.assign(topology.degree(i), Vector::Zero(x0.size()));
    const auto& reg = problems[i].regularizer();
    states[i].subgradient = reg.is_smooth() ? reg.gradient(x0) : Vector::Zero(x0.size());
  }
  return states;
}

std::int64_t initial_epoch_length(std::span<const LocalProblem> problems, const RunConfig& config) {
  if (config.m1 > 0) return config.m1;
  int K = 0;
  for (const auto& p : problems) K = std::max(K, p.num_components());
  return K;
}

std::vector<Rng> node_streams(int V, std::uint64_t seed, Stream stream) {
  std::vector<Rng> out;
  out.reserve(V);
  for (int i = 0; i < V; ++i) out.emplace_back(seed, static_cast<std::uint64_t>(i), stream);
  return out;
}

std::int64_t total(const std::vector<std::int64_t>& per_node) {
  return std::accumulate(per_node.begin(), per_node.end(), std::int64_t{0});
}

double network_objective(std::span<const LocalProblem> problems, std::span<const NodeState> states) {
  double sum = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) sum += problems[i].objective(states[i].x);
  return sum;
}

void collect_x(std::span<const NodeState> states, std::vector<Vector>& xs) {
  xs.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) xs[i] = states[i].x;
}

}  // namespace

RunSummary run_flat(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer) {
  const EstimatorKind kind = config.algorithm;
  switch (kind) {
    case EstimatorKind::kFull:
    case EstimatorKind::kSgd:
    case EstimatorKind::kSaga:
    case EstimatorKind::kLooplessSvrg:
    case EstimatorKind::kSega:
      break;
    default:
      throw Error(ErrorCode::kConfigMismatch,
                  "run_flat does not drive '" + std::string(to_string(kind)) + "'");
  }
  validate(problems, topology, config);
  if (config.iterations < 1) throw Error(ErrorCode::kConfigMismatch, "iterations must be >= 1");

  const int V = topology.num_nodes();
  RunSummary summary;
  summary.eta = resolve_step_sizes(config, problems);
  std::vector<NodeState> cur = initial_states(problems, topology, config);
  std::vector<NodeState> next(V);

  std::vector<EstimatorState> est(V);
  for (int i = 0; i < V; ++i) {
    if (kind == EstimatorKind::kSaga) {
      est[i] = saga_init(problems[i], cur[i].x, &summary.oracle_calls);
    } else if (kind == EstimatorKind::kLooplessSvrg) {
      est[i] = snapshot_init(problems[i], cur[i].x, &summary.oracle_calls);
    } else if (kind == EstimatorKind::kSega) {
      est[i] = sega_init(problems[i]);
    }
  }
  std::vector<Rng> rngs = node_streams(V, config.seed, Stream::kEstimator);
  std::vector<Rng> refresh_rngs = node_streams(V, config.seed, Stream::kRefresh);
  std::vector<std::int64_t> calls(V, 0);
  std::vector<std::int64_t> sketched(V, 0);

  std::vector<Vector> xs;
  auto emit = [&](std::int64_t t) {
    if (!observer.on_iteration) return;
    collect_x(cur, xs);
    observer.on_iteration({t, -1, summary.oracle_calls, summary.sketched_calls,
                           summary.comm_rounds, &xs, cur});
  };
  emit(0);

  WorkerPool pool(resolve_thread_count(config.threads));
  auto node_round = [&](int i) {
    const LocalProblem& problem = problems[i];
    GradientSample sample;
    switch (kind) {
      case EstimatorKind::kFull: sample = full_estimate(problem, cur[i].x); break;
      case EstimatorKind::kSgd: sample = sgd_estimate(problem, cur[i].x, rngs[i]); break;
      case EstimatorKind::kSaga:
        sample = saga_estimate(problem, std::get<SagaState>(est[i]), cur[i].x, rngs[i]);
        break;
      case EstimatorKind::kLooplessSvrg:
        sample = lsvrg_estimate(problem, std::get<SnapshotState>(est[i]), cur[i].x, rngs[i]);
        break;
      case EstimatorKind::kSega:
        sample = sega_estimate(problem, std::get<SegaState>(est[i]), cur[i].x, rngs[i]);
        break;
      default: break;
    }
    next[i] = pd_step(cur[i], gather_inbox(topology, cur, i), sample.g, summary.eta[i],
                      config.rho, problem.regularizer());
    calls[i] = sample.oracle_calls;
    sketched[i] = sample.sketched_calls;
    if (kind == EstimatorKind::kLooplessSvrg) {
      calls[i] += lsvrg_maybe_refresh(problem, std::get<SnapshotState>(est[i]), cur[i].x,
                                      refresh_rngs[i]);
    }
  };

  for (std::int64_t t = 1; t <= config.iterations; ++t) {
    pool.run(V, node_round);
    std::swap(cur, next);
    summary.oracle_calls += total(calls);
    summary.sketched_calls += total(sketched);
    ++summary.comm_rounds;
    summary.iterations = t;
    emit(t);
  }

  collect_x(cur, summary.x);
  summary.nodes = std::move(cur);
  return summary;
}

RunSummary run_svrg(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer) {
  if (config.algorithm != EstimatorKind::kSvrgPlusPlus) {
    throw Error(ErrorCode::kConfigMismatch, "run_svrg requires the svrg algorithm");
  }
  validate(problems, topology, config);
  if (config.epochs < 1) throw Error(ErrorCode::kConfigMismatch, "epochs must be >= 1");

  const int V = topology.num_nodes();
  RunSummary summary;
  summary.eta = resolve_step_sizes(config, problems);
  std::vector<NodeState> cur = initial_states(problems, topology, config);
  std::vector<NodeState> next(V);
  std::vector<SnapshotState> snaps(V);
  std::vector<Vector> epoch_sum(V);
  std::vector<Rng> rngs = node_streams(V, config.seed, Stream::kEstimator);
  std::vector<std::int64_t> calls(V, 0);
  std::vector<Vector> snapshot_x(V);
  for (int i = 0; i < V; ++i) snapshot_x[i] = cur[i].x;

  int epoch = 0;
  std::vector<Vector> xs;
  auto emit = [&](std::int64_t t) {
    if (!observer.on_iteration) return;
    collect_x(cur, xs);
    observer.on_iteration({t, epoch, summary.oracle_calls, summary.sketched_calls,
                           summary.comm_rounds, &xs, cur});
  };

  WorkerPool pool(resolve_thread_count(config.threads));
  auto node_round = [&](int i) {
    GradientSample sample = svrg_estimate(problems[i], snaps[i], cur[i].x, rngs[i]);
    next[i] = pd_step(cur[i], gather_inbox(topology, cur, i), sample.g, summary.eta[i],
                      config.rho, problems[i].regularizer());
    calls[i] = sample.oracle_calls;
    ++snaps[i].inner_counter;
    epoch_sum[i] += next[i].x;
  };

  std::int64_t m = initial_epoch_length(problems, config);
  bool budget_left = true;
  for (epoch = 1; epoch <= config.epochs && budget_left; ++epoch) {
    // Full gradient at the epoch's anchor x~^s.
    for (int i = 0; i < V; ++i) {
      summary.oracle_calls += svrg_snapshot(problems[i], snaps[i], snapshot_x[i]);
      epoch_sum[i] = Vector::Zero(cur[i].x.size());
    }
    if (epoch == 1) emit(0);

    std::int64_t steps = 0;
    double last_objective = config.early_stop_threshold
                                ? network_objective(problems, cur)
                                : 0.0;
    while (steps < m) {
      if (config.max_iterations && summary.iterations >= *config.max_iterations) {
        budget_left = false;
        break;
      }
      pool.run(V, node_round);
      std::swap(cur, next);
      summary.oracle_calls += total(calls);
      ++summary.comm_rounds;
      ++summary.iterations;
      ++steps;
      emit(summary.iterations);
      if (config.early_stop_threshold) {
        const double objective = network_objective(problems, cur);
        const bool stalled = std::abs(last_objective - objective) < *config.early_stop_threshold;
        last_objective = objective;
        if (stalled) break;
      }
    }
    if (steps == 0) break;
    for (int i = 0; i < V; ++i) snapshot_x[i] = epoch_sum[i] / static_cast<double>(steps);
    summary.epoch_lengths.push_back(steps);
    if (observer.on_epoch_end) {
      observer.on_epoch_end({epoch, summary.iterations, summary.oracle_calls, steps, 1.0,
                             &snapshot_x});
    }
    m = std::min(2 * m, config.max_epoch_len);
  }

  collect_x(cur, summary.x);
  summary.nodes = std::move(cur);
  summary.snapshots = std::move(snapshot_x);
  return summary;
}

RunSummary run_asvr(std::span<const LocalProblem> problems, const Topology& topology,
                    const RunConfig& config, const Observer& observer) {
  if (config.algorithm != EstimatorKind::kAsvrInner) {
    throw Error(ErrorCode::kConfigMismatch, "run_asvr requires the asvr algorithm");
  }
  validate(problems, topology, config);
  if (config.epochs < 1) throw Error(ErrorCode::kConfigMismatch, "epochs must be >= 1");
  if (!(config.beta1 > 0.0 && config.beta1 <= 1.0)) {
    throw Error(ErrorCode::kConfigMismatch, "beta1 must lie in (0, 1]");
  }
  if (config.asvr_p && !(*config.asvr_p > 0.0 && *config.asvr_p <= 1.0)) {
    throw Error(ErrorCode::kInvalidProbability, "asvr p must lie in (0, 1]");
  }

  const int V = topology.num_nodes();
  RunSummary summary;
  summary.eta = resolve_step_sizes(config, problems);
  std::vector<NodeState> cur = initial_states(problems, topology, config);  // y and duals
  std::vector<NodeState> next(V);
  std::vector<AsvrNodeState> aux(V);
  std::vector<SnapshotState> snaps(V);
  std::vector<Rng> rngs = node_streams(V, config.seed, Stream::kEstimator);
  std::vector<std::int64_t> calls(V, 0);
  for (int i = 0; i < V; ++i) {
    aux[i].x = cur[i].x;
    aux[i].snapshot_x = cur[i].x;
    aux[i].snapshot_y = cur[i].x;
    aux[i].epoch_sum_x = Vector::Zero(cur[i].x.size());
  }

  int epoch = 0;
  double beta = config.beta1;
  double p = beta;
  std::vector<Vector> xs(V);
  auto emit = [&](std::int64_t t) {
    if (!observer.on_iteration) return;
    for (int i = 0; i < V; ++i) xs[i] = aux[i].x;
    observer.on_iteration({t, epoch, summary.oracle_calls, summary.sketched_calls,
                           summary.comm_rounds, &xs, cur});
  };

  WorkerPool pool(resolve_thread_count(config.threads));
  auto node_round = [&](int i) {
    GradientSample sample = asvr_estimate(problems[i], snaps[i], aux[i].x, p, rngs[i]);
    next[i] = pd_step(cur[i], gather_inbox(topology, cur, i), sample.g, summary.eta[i],
                      config.rho, problems[i].regularizer());
    aux[i].x = (1.0 - beta) * aux[i].snapshot_x + beta * next[i].x;
    aux[i].epoch_sum_x += aux[i].x;
    calls[i] = sample.oracle_calls;
  };

  const std::int64_t m1 = initial_epoch_length(problems, config);
  std::vector<Vector> snapshot_x(V);
  bool budget_left = true;
  for (epoch = 1; epoch <= config.epochs && budget_left; ++epoch) {
    p = config.asvr_p.value_or(beta);
    const std::int64_t m = std::min<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(static_cast<double>(m1) / beta - 1e-9)),
        config.max_epoch_len);
    for (int i = 0; i < V; ++i) {
      if (epoch == 1) {
        snaps[i] = snapshot_init(problems[i], aux[i].snapshot_x, &summary.oracle_calls);
      } else {
        summary.oracle_calls += svrg_snapshot(problems[i], snaps[i], aux[i].snapshot_x);
      }
      aux[i].x = (1.0 - beta) * aux[i].snapshot_x + beta * aux[i].snapshot_y;
      cur[i].x = aux[i].snapshot_y;
      aux[i].epoch_sum_x.setZero();
    }
    if (epoch == 1) emit(0);

    std::int64_t steps = 0;
    while (steps < m) {
      if (config.max_iterations && summary.iterations >= *config.max_iterations) {
        budget_left = false;
        break;
      }
      pool.run(V, node_round);
      std::swap(cur, next);
      summary.oracle_calls += total(calls);
      ++summary.comm_rounds;
      ++summary.iterations;
      ++steps;
      emit(summary.iterations);
    }
    if (steps == 0) break;
    for (int i = 0; i < V; ++i) {
      aux[i].snapshot_x = aux[i].epoch_sum_x / static_cast<double>(steps);
      aux[i].snapshot_y = cur[i].x;
      snapshot_x[i] = aux[i].snapshot_x;
    }
    summary.epoch_lengths.push_back(steps);
    summary.betas.push_back(beta);
    if (observer.on_epoch_end) {
      observer.on_epoch_end({epoch, summary.iterations, summary.oracle_calls, steps, beta,
                             &snapshot_x});
    }
    beta = next_beta(beta);
  }

  summary.x.resize(V);
  for (int i = 0; i < V; ++i) summary.x[i] = aux[i].x;
  summary.nodes = std::move(cur);
  summary.snapshots = std::move(snapshot_x);
  return summary;
}

RunSummary run(std::span<const LocalProblem> problems, const Topology& topology,
               const RunConfig& config, const Observer& observer) {
  switch (config.algorithm) {
    case EstimatorKind::kSvrgPlusPlus: return run_svrg(problems, topology, config, observer);
    case EstimatorKind::kAsvrInner: return run_asvr(problems, topology, config, observer);
    default: return run_flat(problems, topology, config, observer);
  }
}

}  // namespace depd
