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

#include "depd/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "depd/rng.hpp"

namespace depd {
namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + exp(z)), i.e. sigmoid(-z).
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double soft_threshold(double y, double t) {
  if (y > t) return y - t;
  if (y < -t) return y + t;
  return 0.0;
}

}  // namespace

Regularizer Regularizer::squared_l2(double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "weight must be >= 0");
  return {RegularizerType::kSquaredL2, weight, {}, {}};
}

Regularizer Regularizer::l1(double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "weight must be >= 0");
  return {RegularizerType::kL1, weight, {}, {}};
}

Regularizer Regularizer::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "box bounds differ in length");
  }
  if ((lo.array() > hi.array()).any()) {
    throw Error(ErrorCode::kInvalidArgument, "box requires lo <= hi");
  }
  return {RegularizerType::kBox, 0.0, std::move(lo), std::move(hi)};
}

double Regularizer::value(const Vector& x) const {
  switch (type) {
    case RegularizerType::kZero: return 0.0;
    case RegularizerType::kSquaredL2: return 0.5 * weight * x.squaredNorm();
    case RegularizerType::kL1: return weight * x.lpNorm<1>();
    case RegularizerType::kBox:
      if (x.size() != lo.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "box dimension");
      }
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] < lo[j] || x[j] > hi[j]) return std::numeric_limits<double>::infinity();
      }
      return 0.0;
  }
  return 0.0;
}

Vector Regularizer::gradient(const Vector& x) const {
  switch (type) {
    case RegularizerType::kZero: return Vector::Zero(x.size());
    case RegularizerType::kSquaredL2: return weight * x;
    default: throw Error(ErrorCode::kInvalidArgument, "regularizer is not smooth");
  }
}

Vector Regularizer::hessian_diagonal(const Vector& x) const {
  switch (type) {
    case RegularizerType::kZero: return Vector::Zero(x.size());
    case RegularizerType::kSquaredL2: return Vector::Constant(x.size(), weight);
    default: throw Error(ErrorCode::kInvalidArgument, "regularizer is not smooth");
  }
}

double Regularizer::prox_coordinate(int j, double y, double step) const {
  switch (type) {
    case RegularizerType::kZero: return y;
    case RegularizerType::kSquaredL2: return y / (1.0 + step * weight);
    case RegularizerType::kL1: return soft_threshold(y, step * weight);
    case RegularizerType::kBox: return std::clamp(y, lo[j], hi[j]);
  }
  return y;
}

Vector prox(const Regularizer& reg, const Vector& y, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "prox step must be > 0");
  switch (reg.type) {
    case RegularizerType::kZero: return y;
    case RegularizerType::kSquaredL2: return y / (1.0 + step * reg.weight);
    case RegularizerType::kL1:
      return y.unaryExpr([t = step * reg.weight](double v) { return soft_threshold(v, t); });
    case RegularizerType::kBox:
      if (y.size() != reg.lo.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "box dimension");
      }
      return y.cwiseMax(reg.lo).cwiseMin(reg.hi);
  }
  return y;
}

SmoothnessConstants smoothness_constants(const Dataset& data, const LossKind& loss) {
  if (data.num_samples() == 0) throw Error(ErrorCode::kEmptyDataset, "no samples");
  SmoothnessConstants out;
  out.per_component.resize(data.num_samples());
  const double factor = loss.type == LossType::kLogistic ? 0.25 : 1.0;
  for (int k = 0; k < data.num_samples(); ++k) {
    out.per_component[k] = factor * data.features.row(k).squaredNorm() + loss.tau;
  }
  out.max = *std::max_element(out.per_component.begin(), out.per_component.end());
  return out;
}

LocalProblem::LocalProblem(Dataset data, LossKind loss, Regularizer reg,
                           std::optional<double> smoothness_override)
    : data_(std::move(data)), loss_(loss), reg_(std::move(reg)) {
  if (data_.num_samples() == 0) throw Error(ErrorCode::kEmptyDataset, "no samples");
  if (data_.labels.size() != data_.num_samples()) {
    throw Error(ErrorCode::kInconsistentDimension, "label count differs from sample count");
  }
  if (!(loss_.tau >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be >= 0");
  if (reg_.type == RegularizerType::kBox && reg_.lo.size() != data_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "box bounds do not match feature dimension");
  }
  auto constants = smoothness_constants(data_, loss_);
  component_smoothness_ = std::move(constants.per_component);
  smoothness_ = smoothness_override.value_or(constants.max);
  if (!(smoothness_ > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothness constant must be positive");
  }
}

void LocalProblem::check_point(const Vector& x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "point has dimension " +
                                                   std::to_string(x.size()) + ", expected " +
                                                   std::to_string(dim()));
  }
}

void LocalProblem::check_component(int k) const {
  if (k < 0 || k >= num_components()) {
    throw Error(ErrorCode::kIndexOutOfRange, "component " + std::to_string(k));
  }
}

double LocalProblem::link_derivative(const Vector& x, int k) const {
  const double inner = data_.features.row(k).dot(x);
  const double c = data_.labels[k];
  if (loss_.type == LossType::kLogistic) return -c * sigmoid_neg(c * inner);
  return inner - c;
}

double LocalProblem::component_value(const Vector& x, int k) const {
  check_point(x);
  check_component(k);
  const double inner = data_.features.row(k).dot(x);
  const double c = data_.labels[k];
  double v = loss_.type == LossType::kLogistic ? softplus(-c * inner)
                                               : 0.5 * (inner - c) * (inner - c);
  if (loss_.tau != 0.0) v += 0.5 * loss_.tau * x.squaredNorm();
  return v;
}

Vector LocalProblem::component_grad(const Vector& x, int k) const {
  Vector g = Vector::Zero(dim());
  add_component_grad(x, k, 1.0, g);
  return g;
}

void LocalProblem::add_component_grad(const Vector& x, int k, double scale,
                                      Vector& out) const {
  check_point(x);
  check_component(k);
  out.noalias() += (scale * link_derivative(x, k)) * data_.features.row(k).transpose();
  if (loss_.tau != 0.0) out.noalias() += (scale * loss_.tau) * x;
}

double LocalProblem::component_grad_coordinate(const Vector& x, int k, int j) const {
  check_point(x);
  check_component(k);
  if (j < 0 || j >= dim()) throw Error(ErrorCode::kIndexOutOfRange, "coordinate " + std::to_string(j));
  return link_derivative(x, k) * data_.features(k, j) + loss_.tau * x[j];
}

double LocalProblem::value(const Vector& x) const {
  check_point(x);
  double sum = 0.0;
  for (int k = 0; k < num_components(); ++k) sum += component_value(x, k);
  return sum / num_components();
}

Vector LocalProblem::full_grad(const Vector& x) const {
  check_point(x);
  Vector g = Vector::Zero(dim());
  const double w = 1.0 / num_components();
  for (int k = 0; k < num_components(); ++k) add_component_grad(x, k, w, g);
  return g;
}

Eigen::MatrixXd LocalProblem::hessian(const Vector& x) const {
  check_point(x);
  Vector curvature(num_components());
  for (int k = 0; k < num_components(); ++k) {
    if (loss_.type == LossType::kLogistic) {
      const double c = data_.labels[k];
      const double s = sigmoid_neg(c * data_.features.row(k).dot(x));
      curvature[k] = c * c * s * (1.0 - s);
    } else {
      curvature[k] = 1.0;
    }
  }
  Eigen::MatrixXd H = data_.features.transpose() * curvature.asDiagonal() * data_.features;
  H /= num_components();
  H.diagonal().array() += loss_.tau;
  return H;
}

Dataset load_libsvm(const std::filesystem::path& path, LabelMode mode, std::optional<int> dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());

  struct Entry {
    int row;
    int col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  int max_col = 0;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kParseError,
                path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  auto parse_double = [&](std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail("bad number '" + std::string(text) + "'");
    }
    return v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string_view> tokens;
    std::string_view rest(line);
    while (!rest.empty()) {
      auto start = rest.find_first_not_of(" \t\r");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      auto end = rest.find_first_of(" \t\r");
      tokens.push_back(rest.substr(0, end));
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    if (tokens.empty()) continue;

    double label = parse_double(tokens[0]);
    if (mode == LabelMode::kBinary) {
      if (label == 1.0) {
        label = 1.0;
      } else if (label == -1.0 || label == 0.0) {
        label = -1.0;
      } else {
        fail("label '" + std::string(tokens[0]) + "' is not binary");
      }
    }
    const int row = static_cast<int>(labels.size());
    labels.push_back(label);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) fail("expected idx:val");
      int col = 0;
      auto idx = tokens[t].substr(0, colon);
      auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), col);
      if (ec != std::errc() || ptr != idx.data() + idx.size() || col < 1) {
        fail("bad index '" + std::string(idx) + "'");
      }
      if (dim && col > *dim) {
        throw Error(ErrorCode::kInconsistentDimension,
                    path.string() + ":" + std::to_string(line_no) + ": index " +
                        std::to_string(col) + " exceeds dimension " + std::to_string(*dim));
      }
      max_col = std::max(max_col, col);
      entries.push_back({row, col - 1, parse_double(tokens[t].substr(colon + 1))});
    }
  }

  Dataset out;
  const int n = dim.value_or(max_col);
  out.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(labels.size()), n);
  for (const Entry& e : entries) out.features(e.row, e.col) = e.value;
  out.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  return out;
}

Dataset synth_dataset(int dim, int num_samples, SynthKind kind, std::uint64_t seed,
                      const SynthOptions& options) {
  if (dim < 1 || num_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic data needs dim >= 1 and samples >= 1");
  }
  Rng rng(seed, 0, Stream::kData);
  Vector planted(dim);
  for (int j = 0; j < dim; ++j) planted[j] = rng.normal();

  Vector scale(dim);
  for (int j = 0; j < dim; ++j) scale[j] = std::pow(j + 1.0, -options.spectrum_decay);

  Dataset out;
  out.features.resize(num_samples, dim);
  out.labels.resize(num_samples);
  for (int k = 0; k < num_samples; ++k) {
    for (int j = 0; j < dim; ++j) out.features(k, j) = scale[j] * rng.normal();
    if (options.normalize_rows) {
      const double norm = out.features.row(k).norm();
      if (norm > 0.0) out.features.row(k) /= norm;
    }
    const double inner = out.features.row(k).dot(planted);
    if (kind == SynthKind::kSeparableLogistic) {
      double label = inner >= 0.0 ? 1.0 : -1.0;
      if (rng.bernoulli(options.label_noise)) label = -label;
      out.labels[k] = label;
    } else {
      out.labels[k] = inner + options.noise_std * rng.normal();
    }
  }
  return out;
}

std::vector<Dataset> partition(const Dataset& data, int num_nodes, std::uint64_t seed) {
  if (num_nodes < 1 || data.num_samples() < num_nodes) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one sample per node");
  }
  std::vector<int> order(data.num_samples());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0, Stream::kPartition);
  for (int k = static_cast<int>(order.size()) - 1; k > 0; --k) {
    std::swap(order[k], order[rng.uniform_index(k + 1)]);
  }
  std::vector<Dataset> out(num_nodes);
  const int base = data.num_samples() / num_nodes;
  const int extra = data.num_samples() % num_nodes;
  int cursor = 0;
  for (int i = 0; i < num_nodes; ++i) {
    const int size = base + (i < extra ? 1 : 0);
    out[i].features.resize(size, data.dim());
    out[i].labels.resize(size);
    for (int r = 0; r < size; ++r) {
      out[i].features.row(r) = data.features.row(order[cursor]);
      out[i].labels[r] = data.labels[order[cursor]];
      ++cursor;
    }
  }
  return out;
}

}  // namespace depd
