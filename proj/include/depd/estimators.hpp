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

#ifndef DEPD_ESTIMATORS_HPP
#define DEPD_ESTIMATORS_HPP

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "depd/common.hpp"
#include "depd/problem.hpp"
#include "depd/rng.hpp"

namespace depd {

enum class EstimatorKind {
  kFull,
  kSgd,
  kSaga,
  kSvrgPlusPlus,
  kLooplessSvrg,
  kSega,
  kAsvrInner,
};

std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(std::string_view name);

/// One stochastic gradient g_i^t together with what it cost.
struct GradientSample {
  Vector g;
  std::int64_t oracle_calls = 0;
  std::int64_t sketched_calls = 0;
};

/// SAGA memory: the last gradient seen for every component, plus their mean.
struct SagaState {
  std::vector<Vector> table;
  Vector table_mean;
};

/// Anchor point and its cached full gradient (SVRG++, loopless SVRG, ASVR).
struct SnapshotState {
  Vector snapshot_x;
  Vector snapshot_full_grad;
  int epoch_index = 0;
  std::int64_t inner_counter = 0;
};

struct SegaState {
  Vector h;
};

using EstimatorState = std::variant<std::monostate, SagaState, SnapshotState, SegaState>;

GradientSample full_estimate(const LocalProblem& problem, const Vector& x);

GradientSample sgd_estimate(const LocalProblem& problem, const Vector& x, Rng& rng);

/// Fills the table at x_init. Costs K oracle calls, reported through `oracle_calls`.
SagaState saga_init(const LocalProblem& problem, const Vector& x_init,
                    std::int64_t* oracle_calls = nullptr);
GradientSample saga_estimate(const LocalProblem& problem, SagaState& state, const Vector& x,
                             Rng& rng);

/// Snapshot at x with its full gradient (K oracle calls).
SnapshotState snapshot_init(const LocalProblem& problem, const Vector& x,
                            std::int64_t* oracle_calls = nullptr);
GradientSample svrg_estimate(const LocalProblem& problem, const SnapshotState& state,
                             const Vector& x, Rng& rng);
/// Moves the anchor to `new_snapshot_x`, recomputes its full gradient and
/// advances the epoch index. Returns the oracle charge (K).
std::int64_t svrg_snapshot(const LocalProblem& problem, SnapshotState& state,
                           const Vector& new_snapshot_x);

GradientSample lsvrg_estimate(const LocalProblem& problem, const SnapshotState& state,
                              const Vector& x, Rng& rng);
/// With probability 1/K moves the anchor to x. Returns the oracle charge
/// (K on refresh, else 0).
std::int64_t lsvrg_maybe_refresh(const LocalProblem& problem, SnapshotState& state,
                                 const Vector& x, Rng& rng);

SegaState sega_init(const LocalProblem& problem);
/// Updates `state.h` at the drawn coordinate; one sketched call.
GradientSample sega_estimate(const LocalProblem& problem, SegaState& state, const Vector& x,
                             Rng& rng);

/// Accelerated inner estimator: with probability p an importance-weighted
/// two-point correction, otherwise the cached snapshot gradient.
GradientSample asvr_estimate(const LocalProblem& problem, const SnapshotState& snapshot,
                             const Vector& x, double p, Rng& rng);

// Deterministic estimator outputs for a fixed draw; the samplers above and
// the exact-enumeration routines below share these.
Vector saga_gradient_for(const LocalProblem& problem, const SagaState& state, const Vector& x,
                         int k);
Vector svrg_gradient_for(const LocalProblem& problem, const SnapshotState& state,
                         const Vector& x, int k);
Vector sega_gradient_for(const SegaState& state, const Vector& x_grad_coordinates, int j);
Vector asvr_gradient_for(const LocalProblem& problem, const SnapshotState& state,
                         const Vector& x, double p, bool called, int k);

/// Averaged coordinate [grad f_i(x)]_j as one sketched oracle call.
double averaged_gradient_coordinate(const LocalProblem& problem, const Vector& x, int j);

/// What an exact enumeration needs to know about the estimator.
struct EstimatorSnapshot {
  EstimatorKind kind = EstimatorKind::kSgd;
  const EstimatorState* state = nullptr;
  double p = 1.0;  // ASVR call probability
};

inline constexpr int kMaxEnumeratedComponents = 32;
inline constexpr int kMaxEnumeratedDim = 16;

/// E[g] over the estimator's finite randomness, by enumeration.
Vector exact_expectation(const EstimatorSnapshot& est, const LocalProblem& problem,
                         const Vector& x);
/// E ||g - grad f_i(ref_point)||^2 by enumeration.
double exact_second_moment(const EstimatorSnapshot& est, const LocalProblem& problem,
                           const Vector& x, const Vector& ref_point);

/// Constants (A, B, C, varrho) of the second-moment bound and memory recursion
/// for each estimator, reported for diagnostics only.
struct SecondMomentConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double varrho = 0.0;
};
SecondMomentConstants second_moment_constants(EstimatorKind kind, double smoothness,
                                              int num_components, int dim);

}  // namespace depd

#endif  // DEPD_ESTIMATORS_HPP
