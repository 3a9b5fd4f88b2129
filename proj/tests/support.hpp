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

#ifndef DEPD_TESTS_SUPPORT_HPP
#define DEPD_TESTS_SUPPORT_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "depd/common.hpp"
#include "depd/problem.hpp"
#include "depd/rng.hpp"

namespace depd::testing {

inline Vector random_vector(Rng& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = scale * rng.normal();
  return v;
}

/// f(x) = 0.5 ||x - a||^2 written as a least-squares finite sum with n components.
inline LocalProblem quadratic_problem(const Vector& a, Regularizer reg = Regularizer::zero()) {
  const int n = static_cast<int>(a.size());
  Dataset d;
  d.features = FeatureMatrix::Identity(n, n) * std::sqrt(static_cast<double>(n));
  d.labels = a * std::sqrt(static_cast<double>(n));
  return LocalProblem(std::move(d), LossKind::least_squares(), std::move(reg));
}

inline Dataset random_dataset(Rng& rng, int K, int n, bool binary) {
  Dataset d;
  d.features.resize(K, n);
  d.labels.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < n; ++j) d.features(k, j) = rng.normal();
    d.labels[k] = binary ? (rng.bernoulli(0.5) ? 1.0 : -1.0) : rng.normal();
  }
  return d;
}

inline LocalProblem random_logistic(Rng& rng, int K, int n, double tau = 0.0,
                                    Regularizer reg = Regularizer::zero()) {
  return LocalProblem(random_dataset(rng, K, n, true), LossKind::logistic_l2(tau), std::move(reg));
}

inline LocalProblem random_least_squares(Rng& rng, int K, int n,
                                         Regularizer reg = Regularizer::zero()) {
  return LocalProblem(random_dataset(rng, K, n, false), LossKind::least_squares(), std::move(reg));
}

/// D_f(x, y) for the smooth part of a local problem.
inline double bregman_f(const LocalProblem& p, const Vector& x, const Vector& y) {
  return p.value(x) - p.value(y) - p.full_grad(y).dot(x - y);
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "depd_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto path = temp_path(name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace depd::testing

#endif  // DEPD_TESTS_SUPPORT_HPP
