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

#ifndef DEPD_PROBLEM_HPP
#define DEPD_PROBLEM_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "depd/common.hpp"

namespace depd {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// K samples of dimension n, one row per sample. Labels are in {-1, +1} for
/// classification and arbitrary reals for regression.
struct Dataset {
  FeatureMatrix features;
  Vector labels;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

enum class LossType { kLogistic, kLeastSquares };

/// Per-sample smooth loss. `tau` adds (tau/2)||x||^2 to every component.
struct LossKind {
  LossType type = LossType::kLogistic;
  double tau = 0.0;

  static LossKind logistic() { return {LossType::kLogistic, 0.0}; }
  static LossKind logistic_l2(double tau) { return {LossType::kLogistic, tau}; }
  static LossKind least_squares() { return {LossType::kLeastSquares, 0.0}; }
};

enum class RegularizerType { kZero, kSquaredL2, kL1, kBox };

/// Separable, prox-friendly regularizer h_i.
struct Regularizer {
  RegularizerType type = RegularizerType::kZero;
  double weight = 0.0;
  Vector lo;
  Vector hi;

  static Regularizer zero() { return {}; }
  static Regularizer squared_l2(double weight);
  static Regularizer l1(double weight);
  static Regularizer box(Vector lo, Vector hi);

  /// h(x); +inf outside the box for kBox.
  double value(const Vector& x) const;
  bool is_smooth() const {
    return type == RegularizerType::kZero || type == RegularizerType::kSquaredL2;
  }
  /// Gradient of a smooth regularizer.
  Vector gradient(const Vector& x) const;
  /// Diagonal of the Hessian of a smooth regularizer.
  Vector hessian_diagonal(const Vector& x) const;
  double prox_coordinate(int j, double y, double step) const;
};

/// argmin_x h(x) + ||y - x||^2 / (2 step).
Vector prox(const Regularizer& reg, const Vector& y, double step);

struct SmoothnessConstants {
  double max = 0.0;
  std::vector<double> per_component;
};

/// Logistic: ||d_k||^2/4 + tau; least squares: ||d_k||^2 + tau.
SmoothnessConstants smoothness_constants(const Dataset& data, const LossKind& loss);

/// f_i(x) = (1/K) sum_k f(x; d_k, c_k), plus a regularizer h_i. Immutable.
class LocalProblem {
 public:
  LocalProblem(Dataset data, LossKind loss, Regularizer reg,
               std::optional<double> smoothness_override = std::nullopt);

  int num_components() const { return data_.num_samples(); }
  int dim() const { return data_.dim(); }

  double component_value(const Vector& x, int k) const;
  Vector component_grad(const Vector& x, int k) const;
  /// out += scale * grad f(x; xi_k).
  void add_component_grad(const Vector& x, int k, double scale, Vector& out) const;
  double component_grad_coordinate(const Vector& x, int k, int j) const;

  /// f_i(x), the component average.
  double value(const Vector& x) const;
  Vector full_grad(const Vector& x) const;
  /// Hessian of f_i at x (component average).
  Eigen::MatrixXd hessian(const Vector& x) const;
  /// f_i(x) + h_i(x).
  double objective(const Vector& x) const { return value(x) + reg_.value(x); }

  double smoothness() const { return smoothness_; }
  std::span<const double> component_smoothness() const { return component_smoothness_; }

  const Dataset& data() const { return data_; }
  const LossKind& loss() const { return loss_; }
  const Regularizer& regularizer() const { return reg_; }

 private:
  void check_point(const Vector& x) const;
  void check_component(int k) const;
  /// Derivative of the data term w.r.t. the inner product d_k . x.
  double link_derivative(const Vector& x, int k) const;

  Dataset data_;
  LossKind loss_;
  Regularizer reg_;
  double smoothness_ = 0.0;
  std::vector<double> component_smoothness_;
};

enum class LabelMode { kBinary, kReal };

/// Sparse `label idx:val ...` text with 1-based indices, densified. Binary mode
/// maps {+1, 1} to +1 and {-1, 0} to -1 and rejects anything else.
Dataset load_libsvm(const std::filesystem::path& path, LabelMode mode = LabelMode::kBinary,
                    std::optional<int> dim = std::nullopt);

enum class SynthKind { kSeparableLogistic, kGaussianLeastSquares };

struct SynthOptions {
  /// Probability of flipping a planted label (logistic).
  double label_noise = 0.1;
  /// Standard deviation of additive target noise (least squares).
  double noise_std = 0.1;
  /// Feature j has standard deviation (j + 1)^(-spectrum_decay).
  double spectrum_decay = 0.0;
  /// Scale every feature row to unit Euclidean norm.
  bool normalize_rows = false;
};

/// Planted-model synthetic data, deterministic for a fixed seed.
Dataset synth_dataset(int dim, int num_samples, SynthKind kind, std::uint64_t seed,
                      const SynthOptions& options = {});

/// Seeded shuffle followed by contiguous blocks; block sizes differ by at
/// most one sample.
std::vector<Dataset> partition(const Dataset& data, int num_nodes, std::uint64_t seed);

}  // namespace depd

#endif  // DEPD_PROBLEM_HPP
