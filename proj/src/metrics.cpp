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

#include "depd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace depd {

double KktResiduals::max() const {
  return std::max({stationarity, dual_antisymmetry, consensus});
}

double InitialDistance::max() const { return std::max({primal, dual, bregman}); }

namespace {

void check_problems(std::span<const LocalProblem> problems, const Topology& topology) {
  if (problems.empty() || static_cast<int>(problems.size()) != topology.num_nodes()) {
    throw Error(ErrorCode::kConfigMismatch, "one problem per node required");
  }
  for (const auto& p : problems) {
    if (p.dim() != problems.front().dim()) {
      throw Error(ErrorCode::kConfigMismatch, "problems differ in dimension");
    }
  }
}

bool all_smooth(std::span<const LocalProblem> problems) {
  return std::all_of(problems.begin(), problems.end(),
                     [](const LocalProblem& p) { return p.regularizer().is_smooth(); });
}

double network_objective(std::span<const LocalProblem> problems, const Vector& x) {
  double sum = 0.0;
  for (const auto& p : problems) sum += p.objective(x);
  return sum;
}

// Minimizes sum_i f_i + h_i with damped Newton steps.
Vector newton_minimize(std::span<const LocalProblem> problems, std::int64_t max_iters,
                       std::int64_t* iterations) {
  const int n = problems.front().dim();
  Vector x = Vector::Zero(n);
  double value = network_objective(problems, x);
  const std::int64_t limit = std::min<std::int64_t>(max_iters, 200);
  for (std::int64_t it = 0; it < limit; ++it) {
    *iterations = it + 1;
    Vector g = Vector::Zero(n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : problems) {
      g += p.full_grad(x) + p.regularizer().gradient(x);
      H += p.hessian(x);
      H.diagonal() += p.regularizer().hessian_diagonal(x);
    }
    Vector step = H.completeOrthogonalDecomposition().solve(-g);
    if (!step.allFinite()) break;
    const double slope = g.dot(step);
    double t = 1.0;
    Vector trial = x + step;
    double trial_value = network_objective(problems, trial);
    while (trial_value > value + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = x + t * step;
      trial_value = network_objective(problems, trial);
    }
    const double moved = (trial - x).norm();
    if (trial_value <= value) {
      x = std::move(trial);
      value = trial_value;
    }
    if (moved <= 1e-15 * (1.0 + x.norm()) || t <= 1e-12) break;
  }
  return x;
}

// Antisymmetric duals with sum_j lambda_ji = b_i, from node potentials u solving
// the grounded Laplacian system; lambda_ij = u_j - u_i.
std::vector<std::vector<Vector>> laplacian_duals(const Topology& topology,
                                                 const std::vector<Vector>& b) {
  const int V = topology.num_nodes();
  const int n = static_cast<int>(b.front().size());
  std::vector<std::vector<Vector>> lambda(V);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(V, n);
  if (V > 1) {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(V - 1, V - 1);
    Eigen::MatrixXd rhs(V - 1, n);
    for (int i = 1; i < V; ++i) {
      lap(i - 1, i - 1) = topology.degree(i);
      for (int j : topology.neighbors(i)) {
        if (j > 0) lap(i - 1, j - 1) -= 1.0;
      }
      rhs.row(i - 1) = b[i].transpose();
    }
    U.bottomRows(V - 1) = lap.ldlt().solve(rhs);
  }
  for (int i = 0; i < V; ++i) {
    auto nbrs = topology.neighbors(i);
    lambda[i].resize(nbrs.size());
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      lambda[i][s] = (U.row(nbrs[s]) - U.row(i)).transpose();
    }
  }
  return lambda;
}

ReferenceSolution newton_reference(std::span<const LocalProblem> problems,
                                   const Topology& topology, const ReferenceOptions& options) {
  ReferenceSolution ref;
  ref.x_star = newton_minimize(problems, options.max_iters, &ref.iterations);
  std::vector<Vector> b(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    ref.v_star.push_back(problems[i].regularizer().gradient(ref.x_star));
    b[i] = -problems[i].full_grad(ref.x_star) - ref.v_star.back();
  }
  ref.lambda_star = laplacian_duals(topology, b);
  return ref;
}

ReferenceSolution reference_from_states(std::span<const NodeState> states,
                                        std::span<const LocalProblem> problems,
                                        const Topology& topology) {
  const int V = topology.num_nodes();
  ReferenceSolution ref;
  ref.x_star = Vector::Zero(states.front().x.size());
  for (const auto& s : states) ref.x_star += s.x;
  ref.x_star /= V;
  for (int i = 0; i < V; ++i) {
    const auto& reg = problems[i].regularizer();
    ref.v_star.push_back(reg.is_smooth() ? reg.gradient(ref.x_star) : states[i].subgradient);
  }
  ref.lambda_star.resize(V);
  for (int i = 0; i < V; ++i) {
    ref.lambda_star[i].resize(topology.degree(i));
    for (int s = 0; s < topology.degree(i); ++s) {
      const int j = topology.neighbors(i)[s];
      const Vector& reverse = states[j].duals[topology.reverse_slot(i, s)];
      ref.lambda_star[i][s] = 0.5 * (states[i].duals[s] - reverse);
    }
  }
  return ref;
}

ReferenceSolution primal_dual_reference(std::span<const LocalProblem> problems,
                                        const Topology& topology,
                                        const ReferenceOptions& options) {
  const int V = topology.num_nodes();
  const int n = problems.front().dim();
  std::vector<double> eta(V);
  for (int i = 0; i < V; ++i) eta[i] = options.eta.value_or(1.0 / (2.0 * problems[i].smoothness()));
  std::vector<NodeState> cur(V);
  for (int i = 0; i < V; ++i) {
    cur[i].x = Vector::Zero(n);
    cur[i].duals.assign(topology.degree(i), Vector::Zero(n));
    cur[i].subgradient = Vector::Zero(n);
  }
  std::vector<NodeState> next(V);
  std::vector<NodeState> prev = cur;
  std::vector<NodeState> avg(V);
  const int every = std::max(1, options.check_every);
  double last = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 1; t <= options.max_iters; ++t) {
    for (int i = 0; i < V; ++i) {
      next[i] = pd_step(cur[i], gather_inbox(topology, cur, i), problems[i].full_grad(cur[i].x),
                        eta[i], options.rho, problems[i].regularizer());
    }
    std::swap(prev, cur);
    std::swap(cur, next);
    if (t % every == 0 || t == options.max_iters) {
      // With a nonsmooth h the duals and certificates may settle into a
      // period-two cycle while x converges; the two-round mean is stationary.
      for (int i = 0; i < V; ++i) {
        avg[i].x = 0.5 * (cur[i].x + prev[i].x);
        avg[i].subgradient = 0.5 * (cur[i].subgradient + prev[i].subgradient);
        avg[i].duals.resize(cur[i].duals.size());
        for (std::size_t s = 0; s < cur[i].duals.size(); ++s) {
          avg[i].duals[s] = 0.5 * (cur[i].duals[s] + prev[i].duals[s]);
        }
      }
      ReferenceSolution ref = reference_from_states(avg, problems, topology);
      const KktResiduals state_res = kkt_residuals(avg, problems, topology);
      last = std::max(state_res.max(), reference_residuals(ref, problems, topology).max());
      if (last <= options.tol) {
        ref.iterations = t;
        return ref;
      }
    }
  }
  throw Error(ErrorCode::kNotConverged,
              "KKT residual " + std::to_string(last) + " after " +
                  std::to_string(options.max_iters) + " rounds");
}

}  // namespace

ReferenceSolution compute_reference(std::span<const LocalProblem> problems,
                                    const Topology& topology, const ReferenceOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  check_problems(problems, topology);
  ReferenceMethod method = options.method;
  if (method == ReferenceMethod::kAuto) {
    method = all_smooth(problems) ? ReferenceMethod::kNewton : ReferenceMethod::kPrimalDual;
  }
  if (method == ReferenceMethod::kNewton && !all_smooth(problems)) {
    throw Error(ErrorCode::kConfigMismatch, "Newton reference needs smooth regularizers");
  }
  ReferenceSolution ref = method == ReferenceMethod::kNewton
                              ? newton_reference(problems, topology, options)
                              : primal_dual_reference(problems, topology, options);
  ref.kkt_residual = reference_residuals(ref, problems, topology).max();
  if (!(ref.kkt_residual <= options.tol)) {
    throw Error(ErrorCode::kNotConverged,
                "reference KKT residual " + std::to_string(ref.kkt_residual));
  }
  return ref;
}

KktResiduals reference_residuals(const ReferenceSolution& ref,
                                 std::span<const LocalProblem> problems, const Topology& topology) {
  const int V = topology.num_nodes();
  if (static_cast<int>(ref.lambda_star.size()) != V || static_cast<int>(ref.v_star.size()) != V) {
    throw Error(ErrorCode::kMissingDualCertificate, "reference does not cover every node");
  }
  std::vector<NodeState> states(V);
  for (int i = 0; i < V; ++i) {
    states[i].x = ref.x_star;
    states[i].duals = ref.lambda_star[i];
    states[i].subgradient = ref.v_star[i];
  }
  return kkt_residuals(states, problems, topology);
}

KktResiduals kkt_residuals(std::span<const NodeState> states,
                           std::span<const LocalProblem> problems, const Topology& topology) {
  KktResiduals res;
  const int V = topology.num_nodes();
  for (int i = 0; i < V; ++i) {
    const auto& reg = problems[i].regularizer();
    Vector r = problems[i].full_grad(states[i].x);
    if (states[i].subgradient.size() == r.size()) {
      r += states[i].subgradient;
    } else if (reg.is_smooth()) {
      r += reg.gradient(states[i].x);
    } else {
      throw Error(ErrorCode::kMissingDualCertificate, "node " + std::to_string(i) + " lacks v_i");
    }
    auto nbrs = topology.neighbors(i);
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      r += states[nbrs[s]].duals[topology.reverse_slot(i, static_cast<int>(s))];
    }
    res.stationarity = std::max(res.stationarity, r.norm());
  }
  for (const Edge& e : topology.edges()) {
    const int s = topology.slot_of(e.u, e.v);
    const Vector& uv = states[e.u].duals[s];
    const Vector& vu = states[e.v].duals[topology.reverse_slot(e.u, s)];
    res.dual_antisymmetry = std::max(res.dual_antisymmetry, (uv + vu).norm());
    res.consensus = std::max(res.consensus, (states[e.u].x - states[e.v].x).norm());
  }
  return res;
}

double node_bregman_gap(const Vector& x, const LocalProblem& problem, const ReferenceSolution& ref,
                        int node) {
  const Vector& xs = ref.x_star;
  const Vector slope = problem.full_grad(xs) + ref.v_star.at(node);
  return problem.objective(x) - problem.objective(xs) - slope.dot(x - xs);
}

GapAnchor make_gap_anchor(std::span<const LocalProblem> problems, const ReferenceSolution& ref) {
  if (ref.v_star.size() != problems.size()) {
    throw Error(ErrorCode::kMissingDualCertificate, "reference lacks v* for some node");
  }
  GapAnchor anchor;
  anchor.x_star = ref.x_star;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    anchor.value.push_back(problems[i].objective(ref.x_star));
    anchor.slope.push_back(problems[i].full_grad(ref.x_star) + ref.v_star[i]);
  }
  return anchor;
}

double bregman_gap(std::span<const Vector> x, std::span<const LocalProblem> problems,
                   const GapAnchor& anchor) {
  if (x.size() != problems.size() || anchor.slope.size() != problems.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one iterate per node required");
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    gap += problems[i].objective(x[i]) - anchor.value[i] - anchor.slope[i].dot(x[i] - anchor.x_star);
  }
  if (gap < 0.0) {
    if (gap < -1e-10) throw Error(ErrorCode::kNegativeGap, "Bregman gap " + std::to_string(gap));
    gap = 0.0;
  }
  return gap;
}

double bregman_gap(std::span<const Vector> x, std::span<const LocalProblem> problems,
                   const ReferenceSolution& ref) {
  return bregman_gap(x, problems, make_gap_anchor(problems, ref));
}

double consensus_residual(std::span<const Vector> x, const Topology& topology) {
  double worst = 0.0;
  for (const Edge& e : topology.edges()) worst = std::max(worst, (x[e.u] - x[e.v]).norm());
  return worst;
}

namespace {

void check_certificate(std::span<const NodeState> states, const ReferenceSolution& ref) {
  if (ref.lambda_star.size() != states.size()) {
    throw Error(ErrorCode::kMissingDualCertificate, "reference has no lambda* for every node");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (ref.lambda_star[i].size() != states[i].duals.size()) {
      throw Error(ErrorCode::kMissingDualCertificate,
                  "lambda* does not match the duals of node " + std::to_string(i));
    }
  }
}

}  // namespace

double psi(std::span<const NodeState> states, const ReferenceSolution& ref, double rho) {
  check_certificate(states, ref);
  double sum = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector dx = rho * (states[i].x - ref.x_star);
    for (std::size_t s = 0; s < states[i].duals.size(); ++s) {
      sum += (dx - (states[i].duals[s] - ref.lambda_star[i][s])).squaredNorm();
    }
  }
  return sum / (2.0 * rho);
}

double psi_identity_residual(std::span<const NodeState> prev, std::span<const NodeState> next,
                             const ReferenceSolution& ref, double rho) {
  check_certificate(next, ref);
  double inner = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const Vector dx = next[i].x - ref.x_star;
    for (std::size_t s = 0; s < next[i].duals.size(); ++s) {
      inner += dx.dot(next[i].duals[s] - ref.lambda_star[i][s]);
    }
  }
  return std::abs(psi(next, ref, rho) - psi(prev, ref, rho) + 2.0 * inner);
}

double sigma_at_reference(const LocalProblem& problem, const Vector& x_star) {
  const Vector mean = problem.full_grad(x_star);
  double sum = 0.0;
  for (int k = 0; k < problem.num_components(); ++k) {
    sum += (problem.component_grad(x_star, k) - mean).squaredNorm();
  }
  return sum / problem.num_components();
}

InitialDistance initial_distance(std::span<const NodeState> states,
                                 std::span<const LocalProblem> problems,
                                 const ReferenceSolution& ref) {
  check_certificate(states, ref);
  InitialDistance d;
  for (std::size_t i = 0; i < states.size(); ++i) {
    d.primal = std::max(d.primal, (states[i].x - ref.x_star).squaredNorm());
    for (std::size_t s = 0; s < states[i].duals.size(); ++s) {
      d.dual = std::max(d.dual, (states[i].duals[s] - ref.lambda_star[i][s]).squaredNorm());
    }
    d.bregman = std::max(
        d.bregman, node_bregman_gap(states[i].x, problems[i], ref, static_cast<int>(i)));
  }
  return d;
}

TraceRecorder::TraceRecorder(std::span<const LocalProblem> problems, const Topology& topology,
                             const ReferenceSolution& ref, std::int64_t stride)
    : problems_(problems),
      topology_(topology),
      anchor_(make_gap_anchor(problems, ref)),
      stride_(std::max<std::int64_t>(1, stride)) {}

Observer TraceRecorder::observer() {
  Observer obs;
  obs.on_iteration = [this](const IterationView& view) {
    const double gap = bregman_gap(*view.x, problems_, anchor_);
    gap_sum_ += gap;
    ++gap_count_;
    if (view.iteration % stride_ != 0) return;
    TraceRow row;
    row.iteration = view.iteration;
    row.epoch = view.epoch;
    row.oracle_calls = view.oracle_calls;
    row.sketched_calls = view.sketched_calls;
    row.comm_rounds = view.comm_rounds;
    row.bregman_gap = gap;
    row.mean_gap = gap_sum_ / static_cast<double>(gap_count_);
    row.consensus_residual = consensus_residual(*view.x, topology_);
    double objective = 0.0;
    for (std::size_t i = 0; i < problems_.size(); ++i) objective += problems_[i].objective((*view.x)[i]);
    row.objective = objective;
    trace_.rows.push_back(row);
  };
  obs.on_epoch_end = [this](const EpochView& view) {
    EpochRow row;
    row.epoch = view.epoch;
    row.iteration = view.iteration;
    row.oracle_calls = view.oracle_calls;
    row.epoch_length = view.epoch_length;
    row.beta = view.beta;
    row.snapshot_gap = bregman_gap(*view.snapshots, problems_, anchor_);
    trace_.epochs.push_back(row);
  };
  return obs;
}

}  // namespace depd
