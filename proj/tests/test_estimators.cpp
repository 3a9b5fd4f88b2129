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


#include <cmath>
#include <set>

#include "depd/estimators.hpp"
#include "depd/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace depd;
using depd::testing::bregman_f;
using depd::testing::random_vector;

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

LocalProblem small_problem(Rng& rng, int trial, int K, int n) {
  if (trial % 2 == 0) return testing::random_logistic(rng, K, n, 0.05);
  return testing::random_least_squares(rng, K, n);
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// A SAGA table reached by a few random updates away from the initial point.
SagaState reached_saga(const LocalProblem& p, Rng& rng) {
  SagaState s = saga_init(p, random_vector(rng, p.dim()));
  for (int step = 0; step < 5; ++step) saga_estimate(p, s, random_vector(rng, p.dim()), rng);
  return s;
}

}  // namespace

TEST_CASE("estimator names round trip") {
  for (auto kind : {EstimatorKind::kFull, EstimatorKind::kSgd, EstimatorKind::kSaga,
                    EstimatorKind::kSvrgPlusPlus, EstimatorKind::kLooplessSvrg, EstimatorKind::kSega,
                    EstimatorKind::kAsvrInner}) {
    CHECK(estimator_kind_from_string(to_string(kind)) == kind);
  }
  CHECK(code_of([] { estimator_kind_from_string("adam"); }) == ErrorCode::kConfigError);
}

TEST_CASE("full and SGD estimates") {
  Rng data(31, 0, Stream::kData);
  Rng rng(1);
  LocalProblem p = testing::random_logistic(data, 4, 3);
  Vector x = random_vector(data, 3);
  GradientSample full = full_estimate(p, x);
  CHECK(full.g == p.full_grad(x));
  CHECK(full.oracle_calls == 4);
  CHECK(full.sketched_calls == 0);

  LocalProblem one = testing::random_logistic(data, 1, 3);
  for (int t = 0; t < 10; ++t) CHECK((sgd_estimate(one, x, rng).g - one.full_grad(x)).norm() <= 1e-15);

  std::int64_t calls = 0;
  for (int t = 0; t < 250; ++t) {
    GradientSample s = sgd_estimate(p, x, rng);
    calls += s.oracle_calls;
    CHECK(s.sketched_calls == 0);
  }
  CHECK(calls == 250);
  EstimatorSnapshot est{EstimatorKind::kSgd};
  CHECK(max_abs(exact_expectation(est, p, x) - p.full_grad(x)) <= 1e-12);
}

TEST_CASE("SGD second moment obeys the variance bound") {
  Rng data(32, 0, Stream::kData);
  EstimatorSnapshot est{EstimatorKind::kSgd};
  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem p = small_problem(data, trial, 5, 3);
    Vector x = random_vector(data, 3), star = random_vector(data, 3);
    double sigma2 = 0.0;
    for (int k = 0; k < 5; ++k) sigma2 += (p.component_grad(star, k) - p.full_grad(star)).squaredNorm() / 5;
    const double moment = exact_second_moment(est, p, x, star);
    CHECK(moment <= 4 * p.smoothness() * bregman_f(p, x, star) + 2 * sigma2 + 1e-12);
  }
}

TEST_CASE("SAGA initialisation and cancellation") {
  Rng data(33, 0, Stream::kData);
  Rng rng(2);
  LocalProblem p = testing::random_logistic(data, 6, 3, 0.1);
  Vector x0 = random_vector(data, 3);
  std::int64_t charge = 0;
  SagaState s = saga_init(p, x0, &charge);
  CHECK(charge == 6);
  CHECK(max_abs(s.table_mean - p.full_grad(x0)) <= 1e-14);
  for (int t = 0; t < 20; ++t) {
    SagaState fresh = s;
    GradientSample g = saga_estimate(p, fresh, x0, rng);
    CHECK(max_abs(g.g - p.full_grad(x0)) <= 1e-14);
    CHECK(g.oracle_calls == 1);
  }
}

TEST_CASE("SAGA is unbiased and its table mean does not drift") {
  Rng data(34, 0, Stream::kData);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem p = small_problem(data, trial, 3, 4);
    SagaState s = reached_saga(p, rng);
    EstimatorState state = s;
    Vector x = random_vector(data, 4);
    CHECK(max_abs(exact_expectation({EstimatorKind::kSaga, &state}, p, x) - p.full_grad(x)) <= 1e-12);
  }
  LocalProblem p = testing::random_logistic(data, 8, 3);
  SagaState s = saga_init(p, Vector::Zero(3));
  for (int t = 0; t < 10000; ++t) saga_estimate(p, s, random_vector(rng, 3), rng);
  Vector mean = Vector::Zero(3);
  for (const Vector& row : s.table) mean += row;
  mean /= 8.0;
  CHECK(max_abs(mean - s.table_mean) <= 1e-8);
}

TEST_CASE("SAGA second moment and memory recursion") {
  Rng data(35, 0, Stream::kData);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 4;
    LocalProblem p = small_problem(data, trial, K, 3);
    SagaState s = reached_saga(p, rng);
    EstimatorState state = s;
    Vector x = random_vector(data, 3), star = random_vector(data, 3);
    const double L = p.smoothness();
    auto phi = [&](const SagaState& st) {
      double sum = 0.0;
      for (int k = 0; k < K; ++k) sum += (st.table[k] - p.component_grad(star, k)).squaredNorm();
      return sum / K;
    };
    const double moment = exact_second_moment({EstimatorKind::kSaga, &state}, p, x, star);
    CHECK(moment <= 4 * L * bregman_f(p, x, star) + 2 * phi(s) + 1e-12);

    // Exact expectation of the memory term over the drawn component.
    double next = 0.0;
    for (int k = 0; k < K; ++k) {
      SagaState after = s;
      after.table[k] = p.component_grad(x, k);
      next += phi(after) / K;
    }
    double fresh = 0.0;
    for (int k = 0; k < K; ++k) fresh += (p.component_grad(x, k) - p.component_grad(star, k)).squaredNorm();
    fresh /= K;
    CHECK(next == doctest::Approx((1.0 - 1.0 / K) * phi(s) + fresh / K).epsilon(1e-12));
    CHECK(next <= (1.0 - 1.0 / K) * phi(s) + 2 * L * bregman_f(p, x, star) / K + 1e-12);
  }
}

TEST_CASE("SVRG estimates and snapshots") {
  Rng data(36, 0, Stream::kData);
  Rng rng(5);
  LocalProblem p = testing::random_logistic(data, 5, 3, 0.2);
  Vector anchor = random_vector(data, 3);
  std::int64_t charge = 0;
  SnapshotState s = snapshot_init(p, anchor, &charge);
  CHECK(charge == 5);
  for (int t = 0; t < 10; ++t) {
    GradientSample g = svrg_estimate(p, s, anchor, rng);
    CHECK(g.g == s.snapshot_full_grad);
    CHECK(g.oracle_calls == 2);
  }
  Vector moved = random_vector(data, 3);
  const int epoch = s.epoch_index;
  CHECK(svrg_snapshot(p, s, moved) == 5);
  CHECK(s.snapshot_x == moved);
  CHECK(s.snapshot_full_grad == p.full_grad(moved));
  CHECK(s.epoch_index == epoch + 1);
}

TEST_CASE("SVRG is unbiased and obeys its second moment bound") {
  Rng data(37, 0, Stream::kData);
  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem p = small_problem(data, trial, 3, 4);
    Vector anchor = random_vector(data, 4), x = random_vector(data, 4), star = random_vector(data, 4);
    EstimatorState state = snapshot_init(p, anchor);
    for (auto kind : {EstimatorKind::kSvrgPlusPlus, EstimatorKind::kLooplessSvrg}) {
      EstimatorSnapshot est{kind, &state};
      CHECK(max_abs(exact_expectation(est, p, x) - p.full_grad(x)) <= 1e-12);
      const double L = p.smoothness();
      CHECK(exact_second_moment(est, p, x, star) <=
            4 * L * bregman_f(p, x, star) + 4 * L * bregman_f(p, anchor, star) + 1e-12);
    }
  }
}

TEST_CASE("loopless SVRG refresh frequency") {
  Rng data(38, 0, Stream::kData);
  LocalProblem p = testing::random_logistic(data, 10, 2);
  SnapshotState s = snapshot_init(p, Vector::Zero(2));
  Rng rng(6, 0, Stream::kRefresh);
  int refreshes = 0;
  const int trials = 100000;
  Vector x = Vector::Constant(2, 0.5);
  for (int t = 0; t < trials; ++t) {
    const std::int64_t charge = lsvrg_maybe_refresh(p, s, x, rng);
    CHECK((charge == 0 || charge == 10));
    if (charge > 0) ++refreshes;
  }
  CHECK(std::abs(static_cast<double>(refreshes) / trials - 0.1) <= 0.01);
  CHECK(s.snapshot_x == x);
  CHECK(s.snapshot_full_grad == p.full_grad(x));

  LocalProblem one = testing::random_logistic(data, 1, 2);
  SnapshotState single = snapshot_init(one, Vector::Zero(2));
  for (int t = 0; t < 20; ++t) {
    Vector y = random_vector(data, 2);
    GradientSample g = lsvrg_estimate(one, single, y, rng);
    CHECK(max_abs(g.g - one.full_grad(y)) <= 1e-14);
    CHECK(lsvrg_maybe_refresh(one, single, y, rng) == 1);
    CHECK(single.snapshot_x == y);
  }
}

TEST_CASE("loopless SVRG anchor recursion in expectation") {
  Rng data(39, 0, Stream::kData);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 5;
    LocalProblem p = small_problem(data, trial, K, 3);
    Vector anchor = random_vector(data, 3), x = random_vector(data, 3), star = random_vector(data, 3);
    SnapshotState s = snapshot_init(p, anchor);
    SnapshotState refreshed = s;
    svrg_snapshot(p, refreshed, x);
    const double expected =
        (1.0 - 1.0 / K) * bregman_f(p, s.snapshot_x, star) + bregman_f(p, refreshed.snapshot_x, star) / K;
    CHECK(expected == doctest::Approx((1.0 - 1.0 / K) * bregman_f(p, anchor, star) +
                                      bregman_f(p, x, star) / K).epsilon(1e-14));
  }
}

TEST_CASE("SEGA estimates") {
  Rng data(40, 0, Stream::kData);
  Rng rng(7);
  LocalProblem p = testing::random_least_squares(data, 6, 3);
  Vector x = random_vector(data, 3);
  SegaState s = sega_init(p);
  CHECK(s.h == Vector::Zero(3));

  SegaState exact{p.full_grad(x)};
  for (int t = 0; t < 20; ++t) {
    SegaState copy = exact;
    GradientSample g = sega_estimate(p, copy, x, rng);
    CHECK(max_abs(g.g - p.full_grad(x)) <= 1e-14);
    CHECK(g.oracle_calls == 0);
    CHECK(g.sketched_calls == 1);
  }

  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem q = small_problem(data, trial, 4, 3);
    EstimatorState state = SegaState{random_vector(data, 3)};
    Vector y = random_vector(data, 3);
    CHECK(max_abs(exact_expectation({EstimatorKind::kSega, &state}, q, y) - q.full_grad(y)) <= 1e-12);
  }

  std::set<int> seen;
  SegaState fill = sega_init(p);
  while (seen.size() < 3) {
    Vector before = fill.h;
    sega_estimate(p, fill, x, rng);
    for (int j = 0; j < 3; ++j) {
      if (fill.h[j] != before[j]) seen.insert(j);
    }
  }
  CHECK(max_abs(fill.h - p.full_grad(x)) <= 1e-14);
}

TEST_CASE("ASVR inner estimator") {
  Rng data(41, 0, Stream::kData);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem p = small_problem(data, trial, 3, 4);
    Vector anchor = random_vector(data, 4), x = random_vector(data, 4);
    EstimatorState state = snapshot_init(p, anchor);
    const auto& snap = std::get<SnapshotState>(state);
    for (int k = 0; k < 3; ++k) {
      CHECK(max_abs(asvr_gradient_for(p, snap, x, 1.0, true, k) - svrg_gradient_for(p, snap, x, k)) <= 1e-14);
    }
    EstimatorSnapshot svrg{EstimatorKind::kSvrgPlusPlus, &state};
    EstimatorSnapshot full_p{EstimatorKind::kAsvrInner, &state, 1.0};
    CHECK(exact_second_moment(full_p, p, x, anchor) ==
          doctest::Approx(exact_second_moment(svrg, p, x, anchor)).epsilon(1e-12));
    for (double prob : {0.1, 0.3, 0.75, 1.0}) {
      EstimatorSnapshot est{EstimatorKind::kAsvrInner, &state, prob};
      CHECK(max_abs(exact_expectation(est, p, x) - p.full_grad(x)) <= 1e-12);
      const double variance = exact_second_moment(est, p, x, x);
      CHECK(variance <= 2 * p.smoothness() / prob * bregman_f(p, anchor, x) + 1e-12);
    }
  }

  LocalProblem p = testing::random_logistic(data, 4, 2);
  SnapshotState snap = snapshot_init(p, Vector::Zero(2));
  int calls = 0;
  for (int t = 0; t < 2000; ++t) {
    GradientSample g = asvr_estimate(p, snap, Vector::Ones(2), 0.25, rng);
    CHECK((g.oracle_calls == 0 || g.oracle_calls == 2));
    if (g.oracle_calls == 0) CHECK(g.g == snap.snapshot_full_grad);
    calls += g.oracle_calls > 0;
  }
  CHECK(std::abs(calls / 2000.0 - 0.25) <= 0.04);
  CHECK(code_of([&] { asvr_estimate(p, snap, Vector::Ones(2), 0.0, rng); }) == ErrorCode::kInvalidProbability);
  CHECK(code_of([&] { asvr_estimate(p, snap, Vector::Ones(2), 1.5, rng); }) == ErrorCode::kInvalidProbability);
}

TEST_CASE("enumeration guard") {
  Rng data(42, 0, Stream::kData);
  LocalProblem wide = testing::random_logistic(data, 33, 2);
  CHECK(code_of([&] { exact_expectation({EstimatorKind::kSgd}, wide, Vector::Zero(2)); }) ==
        ErrorCode::kEnumerationTooLarge);
  LocalProblem ok = testing::random_logistic(data, 32, 2);
  CHECK(max_abs(exact_expectation({EstimatorKind::kSgd}, ok, Vector::Zero(2)) - ok.full_grad(Vector::Zero(2))) <= 1e-12);
  LocalProblem tall = testing::random_logistic(data, 3, 17);
  CHECK(code_of([&] { exact_expectation({EstimatorKind::kSgd}, tall, Vector::Zero(17)); }) ==
        ErrorCode::kEnumerationTooLarge);
  CHECK(code_of([&] { exact_expectation({EstimatorKind::kSaga}, ok, Vector::Zero(2)); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("every estimator is unbiased on reachable states") {
  Rng data(43, 0, Stream::kData);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    LocalProblem p = small_problem(data, trial, 4, 3);
    Vector x = random_vector(data, 3);
    std::vector<std::pair<EstimatorKind, EstimatorState>> cases;
    cases.push_back({EstimatorKind::kFull, std::monostate{}});
    cases.push_back({EstimatorKind::kSgd, std::monostate{}});
    cases.push_back({EstimatorKind::kSaga, reached_saga(p, rng)});
    cases.push_back({EstimatorKind::kSvrgPlusPlus, snapshot_init(p, random_vector(data, 3))});
    cases.push_back({EstimatorKind::kLooplessSvrg, snapshot_init(p, random_vector(data, 3))});
    cases.push_back({EstimatorKind::kSega, SegaState{random_vector(data, 3)}});
    cases.push_back({EstimatorKind::kAsvrInner, snapshot_init(p, random_vector(data, 3))});
    for (const auto& [kind, state] : cases) {
      EstimatorSnapshot est{kind, &state, 0.4};
      CHECK(max_abs(exact_expectation(est, p, x) - p.full_grad(x)) <= 1e-12);
    }
  }
}
