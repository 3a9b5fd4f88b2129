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

#include "depd/estimators.hpp"

#include <string>

namespace depd {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kFull: return "full";
    case EstimatorKind::kSgd: return "sgd";
    case EstimatorKind::kSaga: return "saga";
    case EstimatorKind::kSvrgPlusPlus: return "svrg";
    case EstimatorKind::kLooplessSvrg: return "lsvrg";
    case EstimatorKind::kSega: return "sega";
    case EstimatorKind::kAsvrInner: return "asvr";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(std::string_view name) {
  for (auto kind : {EstimatorKind::kFull, EstimatorKind::kSgd, EstimatorKind::kSaga,
                    EstimatorKind::kSvrgPlusPlus, EstimatorKind::kLooplessSvrg,
                    EstimatorKind::kSega, EstimatorKind::kAsvrInner}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::kConfigError, "unknown algorithm '" + std::string(name) + "'");
}

GradientSample full_estimate(const LocalProblem& problem, const Vector& x) {
  return {problem.full_grad(x), problem.num_components(), 0};
}

GradientSample sgd_estimate(const LocalProblem& problem, const Vector& x, Rng& rng) {
  const int k = static_cast<int>(rng.uniform_index(problem.num_components()));
  return {problem.component_grad(x, k), 1, 0};
}

SagaState saga_init(const LocalProblem& problem, const Vector& x_init,
                    std::int64_t* oracle_calls) {
  SagaState state;
  const int K = problem.num_components();
  state.table.reserve(K);
  state.table_mean = Vector::Zero(problem.dim());
  for (int k = 0; k < K; ++k) {
    state.table.push_back(problem.component_grad(x_init, k));
    state.table_mean += state.table.back();
  }
  state.table_mean /= K;
  if (oracle_calls) *oracle_calls += K;
  return state;
}

Vector saga_gradient_for(const LocalProblem& problem, const SagaState& state, const Vector& x,
                         int k) {
  Vector g = state.table_mean - state.table[k];
  problem.add_component_grad(x, k, 1.0, g);
  return g;
}

GradientSample saga_estimate(const LocalProblem& problem, SagaState& state, const Vector& x,
                             Rng& rng) {
  const int K = problem.num_components();
  const int k = static_cast<int>(rng.uniform_index(K));
  Vector fresh = problem.component_grad(x, k);
  Vector g = fresh - state.table[k] + state.table_mean;
  state.table_mean += (fresh - state.table[k]) / K;
  state.table[k] = std::move(fresh);
  return {std::move(g), 1, 0};
}

SnapshotState snapshot_init(const LocalProblem& problem, const Vector& x,
                            std::int64_t* oracle_calls) {
  SnapshotState state;
  state.snapshot_x = x;
  state.snapshot_full_grad = problem.full_grad(x);
  if (oracle_calls) *oracle_calls += problem.num_components();
  return state;
}

Vector svrg_gradient_for(const LocalProblem& problem, const SnapshotState& state,
                         const Vector& x, int k) {
  // Difference first so that x == snapshot_x returns the cached gradient exactly.
  Vector g = problem.component_grad(x, k) - problem.component_grad(state.snapshot_x, k);
  g += state.snapshot_full_grad;
  return g;
}

GradientSample svrg_estimate(const LocalProblem& problem, const SnapshotState& state,
                             const Vector& x, Rng& rng) {
  const int k = static_cast<int>(rng.uniform_index(problem.num_components()));
  return {svrg_gradient_for(problem, state, x, k), 2, 0};
}

std::int64_t svrg_snapshot(const LocalProblem& problem, SnapshotState& state,
                           const Vector& new_snapshot_x) {
  state.snapshot_x = new_snapshot_x;
  state.snapshot_full_grad = problem.full_grad(new_snapshot_x);
  ++state.epoch_index;
  state.inner_counter = 0;
  return problem.num_components();
}

GradientSample lsvrg_estimate(const LocalProblem& problem, const SnapshotState& state,
                              const Vector& x, Rng& rng) {
  return svrg_estimate(problem, state, x, rng);
}

std::int64_t lsvrg_maybe_refresh(const LocalProblem& problem, SnapshotState& state,
                                 const Vector& x, Rng& rng) {
  ++state.inner_counter;
  if (!rng.bernoulli(1.0 / problem.num_components())) return 0;
  state.snapshot_x = x;
  state.snapshot_full_grad = problem.full_grad(x);
  return problem.num_components();
}

SegaState sega_init(const LocalProblem& problem) { return {Vector::Zero(problem.dim())}; }

double averaged_gradient_coordinate(const LocalProblem& problem, const Vector& x, int j) {
  double sum = 0.0;
  for (int k = 0; k < problem.num_components(); ++k) {
    sum += problem.component_grad_coordinate(x, k, j);
  }
  return sum / problem.num_components();
}

Vector sega_gradient_for(const SegaState& state, const Vector& x_grad_coordinates, int j) {
  Vector g = state.h;
  const double n = static_cast<double>(state.h.size());
  g[j] = state.h[j] + n * (x_grad_coordinates[j] - state.h[j]);
  return g;
}

GradientSample sega_estimate(const LocalProblem& problem, SegaState& state, const Vector& x,
                             Rng& rng) {
  const int n = problem.dim();
  if (state.h.size() != n) throw Error(ErrorCode::kDimensionMismatch, "SEGA memory dimension");
  const int j = static_cast<int>(rng.uniform_index(n));
  const double c = averaged_gradient_coordinate(problem, x, j);
  Vector g = state.h;
  g[j] = state.h[j] + n * (c - state.h[j]);
  state.h[j] = c;
  return {std::move(g), 0, 1};
}

Vector asvr_gradient_for(const LocalProblem& problem, const SnapshotState& state,
                         const Vector& x, double p, bool called, int k) {
  if (!called) return state.snapshot_full_grad;
  Vector g = (problem.component_grad(x, k) - problem.component_grad(state.snapshot_x, k)) / p;
  g += state.snapshot_full_grad;
  return g;
}

GradientSample asvr_estimate(const LocalProblem& problem, const SnapshotState& snapshot,
                             const Vector& x, double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidProbability, "p_s = " + std::to_string(p));
  }
  const bool called = rng.bernoulli(p);
  if (!called) return {snapshot.snapshot_full_grad, 0, 0};
  const int k = static_cast<int>(rng.uniform_index(problem.num_components()));
  return {asvr_gradient_for(problem, snapshot, x, p, true, k), 2, 0};
}

namespace {

template <typename State>
const State& state_as(const EstimatorSnapshot& est) {
  if (est.state == nullptr || !std::holds_alternative<State>(*est.state)) {
    throw Error(ErrorCode::kInvalidArgument,
                "estimator state does not match kind " + std::string(to_string(est.kind)));
  }
  return std::get<State>(*est.state);
}

// Calls visit(probability, g) once per outcome of the estimator's randomness.
template <typename Visit>
void enumerate_outcomes(const EstimatorSnapshot& est, const LocalProblem& problem,
                        const Vector& x, Visit&& visit) {
  const int K = problem.num_components();
  const int n = problem.dim();
  if (K > kMaxEnumeratedComponents || n > kMaxEnumeratedDim) {
    throw Error(ErrorCode::kEnumerationTooLarge,
                "K = " + std::to_string(K) + ", n = " + std::to_string(n));
  }
  const double uniform = 1.0 / K;
  switch (est.kind) {
    case EstimatorKind::kFull:
      visit(1.0, problem.full_grad(x));
      return;
    case EstimatorKind::kSgd:
      for (int k = 0; k < K; ++k) visit(uniform, problem.component_grad(x, k));
      return;
    case EstimatorKind::kSaga: {
      const auto& state = state_as<SagaState>(est);
      for (int k = 0; k < K; ++k) visit(uniform, saga_gradient_for(problem, state, x, k));
      return;
    }
    case EstimatorKind::kSvrgPlusPlus:
    case EstimatorKind::kLooplessSvrg: {
      const auto& state = state_as<SnapshotState>(est);
      for (int k = 0; k < K; ++k) visit(uniform, svrg_gradient_for(problem, state, x, k));
      return;
    }
    case EstimatorKind::kSega: {
      const auto& state = state_as<SegaState>(est);
      Vector coords(n);
      for (int j = 0; j < n; ++j) coords[j] = averaged_gradient_coordinate(problem, x, j);
      for (int j = 0; j < n; ++j) visit(1.0 / n, sega_gradient_for(state, coords, j));
      return;
    }
    case EstimatorKind::kAsvrInner: {
      const auto& state = state_as<SnapshotState>(est);
      if (!(est.p > 0.0 && est.p <= 1.0)) {
        throw Error(ErrorCode::kInvalidProbability, "p_s = " + std::to_string(est.p));
      }
      if (est.p < 1.0) visit(1.0 - est.p, asvr_gradient_for(problem, state, x, est.p, false, 0));
      for (int k = 0; k < K; ++k) {
        visit(est.p * uniform, asvr_gradient_for(problem, state, x, est.p, true, k));
      }
      return;
    }
  }
}

}  // namespace

Vector exact_expectation(const EstimatorSnapshot& est, const LocalProblem& problem,
                         const Vector& x) {
  Vector mean = Vector::Zero(problem.dim());
  enumerate_outcomes(est, problem, x, [&](double prob, const Vector& g) { mean += prob * g; });
  return mean;
}

double exact_second_moment(const EstimatorSnapshot& est, const LocalProblem& problem,
                           const Vector& x, const Vector& ref_point) {
  const Vector center = problem.full_grad(ref_point);
  double moment = 0.0;
  enumerate_outcomes(est, problem, x, [&](double prob, const Vector& g) {
    moment += prob * (g - center).squaredNorm();
  });
  return moment;
}

SecondMomentConstants second_moment_constants(EstimatorKind kind, double smoothness,
                                              int num_components, int dim) {
  const double L = smoothness;
  const double K = num_components;
  const double n = dim;
  switch (kind) {
    case EstimatorKind::kFull: return {L, 0.0, 0.0, 1.0};
    case EstimatorKind::kSgd: return {2 * L, 0.0, 0.0, 1.0};
    case EstimatorKind::kSaga: return {2 * L, 2.0, L / K, 1.0 / K};
    case EstimatorKind::kSvrgPlusPlus: return {2 * L, 2.0, 0.0, 0.0};
    case EstimatorKind::kLooplessSvrg: return {2 * L, 2 * L, 1.0 / K, 1.0 / K};
    case EstimatorKind::kSega: return {2 * n * L, 2 * n, L / n, 1.0 / n};
    case EstimatorKind::kAsvrInner: return {};  // analysed outside this framework
  }
  return {};
}

}  // namespace depd
