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

#include "depd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>

#include "json.hpp"

namespace depd {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); }

const json& section(const json& root, const char* name) {
  static const json kEmpty = json::object();
  if (!root.contains(name)) return kEmpty;
  const json& s = root.at(name);
  if (!s.is_object()) config_error(std::string("'") + name + "' must be an object");
  return s;
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      config_error("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_value(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return value_or<T>(obj, key, T{}, where);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& path) {
  std::filesystem::path p(path);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void parse_topology(const json& s, TopologySpec& spec) {
  expect_keys(s, "topology", {"kind", "nodes", "edges", "seed", "path"});
  spec.kind = value_or<std::string>(s, "kind", spec.kind, "topology");
  // Edge-list files infer the node count unless one is given.
  spec.nodes = value_or<int>(s, "nodes", spec.kind == "edge_list" ? 0 : spec.nodes, "topology");
  spec.seed = value_or<std::uint64_t>(s, "seed", spec.seed, "topology");
  spec.path = value_or<std::string>(s, "path", spec.path, "topology");
  if (s.contains("edges")) {
    const json& e = s.at("edges");
    if (e.is_number_integer()) {
      spec.edges = e.get<int>();
    } else if (e.is_array()) {
      try {
        spec.edge_pairs = e.get<std::vector<std::pair<int, int>>>();
      } catch (const json::exception&) {
        config_error("topology.edges must be a count or a list of [u, v] pairs");
      }
    } else {
      config_error("topology.edges must be a count or a list of [u, v] pairs");
    }
  }
  static const std::vector<std::string> kinds{"random", "ring", "complete", "edges", "edge_list"};
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
    config_error("unknown topology kind '" + spec.kind + "'");
  }
}

void parse_data(const json& s, DataSpec& spec) {
  expect_keys(s, "data", {"source", "kind", "dim", "samples_per_node", "seed", "label_noise",
                          "noise_std", "spectrum_decay", "normalize_rows", "path", "labels", "partition_seed"});
  spec.source = value_or<std::string>(s, "source", spec.source, "data");
  if (spec.source != "synthetic" && spec.source != "libsvm") {
    config_error("unknown data source '" + spec.source + "'");
  }
  const std::string kind = value_or<std::string>(s, "kind", "logistic", "data");
  if (kind == "logistic") {
    spec.kind = SynthKind::kSeparableLogistic;
  } else if (kind == "least_squares") {
    spec.kind = SynthKind::kGaussianLeastSquares;
  } else {
    config_error("unknown synthetic data kind '" + kind + "'");
  }
  // LIBSVM files infer the dimension unless one is given.
  spec.dim = value_or<int>(s, "dim", spec.source == "libsvm" ? 0 : spec.dim, "data");
  spec.samples_per_node = value_or<int>(s, "samples_per_node", spec.samples_per_node, "data");
  spec.seed = value_or<std::uint64_t>(s, "seed", spec.seed, "data");
  spec.synth.label_noise = value_or<double>(s, "label_noise", spec.synth.label_noise, "data");
  spec.synth.noise_std = value_or<double>(s, "noise_std", spec.synth.noise_std, "data");
  spec.synth.spectrum_decay =
      value_or<double>(s, "spectrum_decay", spec.synth.spectrum_decay, "data");
  spec.synth.normalize_rows =
      value_or<bool>(s, "normalize_rows", spec.synth.normalize_rows, "data");
  spec.path = value_or<std::string>(s, "path", spec.path, "data");
  const std::string labels = value_or<std::string>(s, "labels", "binary", "data");
  if (labels == "binary") {
    spec.label_mode = LabelMode::kBinary;
  } else if (labels == "real") {
    spec.label_mode = LabelMode::kReal;
  } else {
    config_error("data.labels must be 'binary' or 'real'");
  }
  spec.partition_seed = value_or<std::uint64_t>(s, "partition_seed", spec.partition_seed, "data");
}

LossKind parse_loss(const json& s) {
  expect_keys(s, "loss", {"type", "tau"});
  const std::string type = value_or<std::string>(s, "type", "logistic", "loss");
  const double tau = value_or<double>(s, "tau", 0.0, "loss");
  if (type == "logistic") return LossKind::logistic_l2(tau);
  if (type == "least_squares") return {LossType::kLeastSquares, tau};
  config_error("unknown loss type '" + type + "'");
}

RegularizerSpec parse_regularizer(const json& s) {
  expect_keys(s, "regularizer", {"type", "weight", "lo", "hi"});
  RegularizerSpec spec;
  const std::string type = value_or<std::string>(s, "type", "zero", "regularizer");
  if (type == "zero") {
    spec.type = RegularizerType::kZero;
  } else if (type == "l2") {
    spec.type = RegularizerType::kSquaredL2;
  } else if (type == "l1") {
    spec.type = RegularizerType::kL1;
  } else if (type == "box") {
    spec.type = RegularizerType::kBox;
  } else {
    config_error("unknown regularizer type '" + type + "'");
  }
  spec.weight = value_or<double>(s, "weight", 0.0, "regularizer");
  spec.lo = value_or<double>(s, "lo", -1.0, "regularizer");
  spec.hi = value_or<double>(s, "hi", 1.0, "regularizer");
  return spec;
}

void parse_run(const json& s, ExperimentConfig& config) {
  expect_keys(s, "run", {"algorithm", "rho", "eta", "iterations", "epochs", "m1",
                         "max_epoch_len", "beta1", "asvr_p", "early_stop_threshold",
                         "max_iterations", "seed", "w1_hint", "sigma", "threads"});
  RunConfig& run = config.run;
  run.algorithm = estimator_kind_from_string(value_or<std::string>(s, "algorithm", "saga", "run"));
  run.rho = value_or<double>(s, "rho", run.rho, "run");
  if (s.contains("eta")) {
    const json& e = s.at("eta");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") config_error("run.eta must be 'auto', a number or a list");
      run.eta.clear();
    } else if (e.is_number()) {
      run.eta = {e.get<double>()};
    } else if (e.is_array()) {
      run.eta = value_or<std::vector<double>>(s, "eta", {}, "run");
    } else {
      config_error("run.eta must be 'auto', a number or a list");
    }
  }
  run.iterations = value_or<std::int64_t>(s, "iterations", run.iterations, "run");
  run.epochs = value_or<int>(s, "epochs", run.epochs, "run");
  run.m1 = value_or<std::int64_t>(s, "m1", run.m1, "run");
  run.max_epoch_len = value_or<std::int64_t>(s, "max_epoch_len", run.max_epoch_len, "run");
  run.beta1 = value_or<double>(s, "beta1", run.beta1, "run");
  run.asvr_p = optional_value<double>(s, "asvr_p", "run");
  run.early_stop_threshold = optional_value<double>(s, "early_stop_threshold", "run");
  run.max_iterations = optional_value<std::int64_t>(s, "max_iterations", "run");
  run.seed = value_or<std::uint64_t>(s, "seed", run.seed, "run");
  run.w1_hint = value_or<double>(s, "w1_hint", run.w1_hint, "run");
  run.threads = value_or<int>(s, "threads", run.threads, "run");
  if (s.contains("sigma")) {
    const json& sg = s.at("sigma");
    if (sg.is_string() && sg.get<std::string>() == "reference") {
      config.sigma_from_reference = true;
    } else if (sg.is_array()) {
      run.sigma = value_or<std::vector<double>>(s, "sigma", {}, "run");
      config.sigma_from_reference = false;
    } else if (sg.is_null()) {
      config.sigma_from_reference = false;
    } else {
      config_error("run.sigma must be 'reference', null or a list");
    }
  }
}

void parse_reference(const json& s, ReferenceSpec& spec) {
  expect_keys(s, "reference", {"tol", "max_iters", "method", "rho", "eta", "path"});
  spec.options.tol = value_or<double>(s, "tol", spec.options.tol, "reference");
  spec.options.max_iters = value_or<std::int64_t>(s, "max_iters", spec.options.max_iters, "reference");
  spec.options.rho = value_or<double>(s, "rho", spec.options.rho, "reference");
  spec.options.eta = optional_value<double>(s, "eta", "reference");
  spec.path = value_or<std::string>(s, "path", spec.path, "reference");
  const std::string method = value_or<std::string>(s, "method", "auto", "reference");
  if (method == "auto") {
    spec.options.method = ReferenceMethod::kAuto;
  } else if (method == "newton") {
    spec.options.method = ReferenceMethod::kNewton;
  } else if (method == "primal_dual") {
    spec.options.method = ReferenceMethod::kPrimalDual;
  } else {
    config_error("unknown reference method '" + method + "'");
  }
}

void parse_output(const json& s, OutputSpec& spec) {
  expect_keys(s, "output", {"path", "reference_path", "stride"});
  spec.path = value_or<std::string>(s, "path", spec.path, "output");
  spec.reference_path = value_or<std::string>(s, "reference_path", spec.reference_path, "output");
  spec.stride = value_or<std::int64_t>(s, "stride", spec.stride, "output");
  if (spec.stride < 1) config_error("output.stride must be >= 1");
}

void parse_sweep(const json& s, SweepSpec& spec) {
  expect_keys(s, "sweep", {"seeds", "algorithms", "budgets", "summary_path"});
  spec.seeds = value_or<std::vector<std::uint64_t>>(s, "seeds", spec.seeds, "sweep");
  spec.algorithms = value_or<std::vector<std::string>>(s, "algorithms", spec.algorithms, "sweep");
  for (const auto& name : spec.algorithms) estimator_kind_from_string(name);
  spec.budgets = value_or<std::vector<std::int64_t>>(s, "budgets", spec.budgets, "sweep");
  spec.summary_path = value_or<std::string>(s, "summary_path", spec.summary_path, "sweep");
  if (spec.seeds.empty()) config_error("sweep.seeds must not be empty");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

}  // namespace

Regularizer RegularizerSpec::build(int dim) const {
  switch (type) {
    case RegularizerType::kZero: return Regularizer::zero();
    case RegularizerType::kSquaredL2: return Regularizer::squared_l2(weight);
    case RegularizerType::kL1: return Regularizer::l1(weight);
    case RegularizerType::kBox:
      return Regularizer::box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
  }
  return Regularizer::zero();
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config must be a JSON object");
  expect_keys(root, "config",
              {"topology", "data", "loss", "regularizer", "run", "reference", "output", "sweep"});
  ExperimentConfig config;
  config.base_dir = base_dir;
  parse_topology(section(root, "topology"), config.topology);
  parse_data(section(root, "data"), config.data);
  config.loss = parse_loss(section(root, "loss"));
  config.regularizer = parse_regularizer(section(root, "regularizer"));
  parse_run(section(root, "run"), config);
  parse_reference(section(root, "reference"), config.reference);
  parse_output(section(root, "output"), config.output);
  parse_sweep(section(root, "sweep"), config.sweep);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

namespace {

Topology build_topology_from(const ExperimentConfig& config) {
  const TopologySpec& t = config.topology;
  if (t.kind == "random") return random_connected(t.nodes, t.edges, t.seed);
  if (t.kind == "ring") return ring(t.nodes);
  if (t.kind == "complete") return complete(t.nodes);
  if (t.kind == "edges") return build_topology(t.nodes, t.edge_pairs);
  if (t.path.empty()) config_error("topology.path is required for edge_list");
  return load_edge_list(resolve(config.base_dir, t.path),
                        t.nodes > 0 ? std::optional<int>(t.nodes) : std::nullopt);
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& config) {
  Topology topology = build_topology_from(config);
  const DataSpec& d = config.data;
  Dataset all;
  if (d.source == "synthetic") {
    all = synth_dataset(d.dim, d.samples_per_node * topology.num_nodes(), d.kind, d.seed, d.synth);
  } else {
    if (d.path.empty()) config_error("data.path is required for libsvm data");
    std::optional<int> dim;
    if (d.dim > 0) dim = d.dim;
    all = load_libsvm(resolve(config.base_dir, d.path), d.label_mode, dim);
  }
  std::vector<Dataset> parts = partition(all, topology.num_nodes(), d.partition_seed);
  Experiment experiment{std::move(topology), {}};
  experiment.problems.reserve(parts.size());
  for (auto& part : parts) {
    const int n = part.dim();
    experiment.problems.emplace_back(std::move(part), config.loss, config.regularizer.build(n));
  }
  return experiment;
}

ReferenceSolution obtain_reference(const ExperimentConfig& config, const Experiment& experiment) {
  if (config.reference.path.empty()) {
    return compute_reference(experiment.problems, experiment.topology, config.reference.options);
  }
  ReferenceSolution ref = load_reference(resolve(config.base_dir, config.reference.path));
  const Topology& topo = experiment.topology;
  bool fits = static_cast<int>(ref.lambda_star.size()) == topo.num_nodes() &&
              ref.x_star.size() == experiment.problems.front().dim();
  for (int i = 0; fits && i < topo.num_nodes(); ++i) {
    fits = static_cast<int>(ref.lambda_star[i].size()) == topo.degree(i);
  }
  if (!fits) throw Error(ErrorCode::kConfigMismatch, "saved reference does not fit the experiment");
  return ref;
}

Trace run_experiment(const ExperimentConfig& config, const Experiment& experiment,
                     const ReferenceSolution& ref, RunSummary* summary) {
  RunConfig run_config = config.run;
  if (run_config.algorithm == EstimatorKind::kSgd && run_config.eta.empty() &&
      run_config.sigma.empty() && config.sigma_from_reference) {
    for (const auto& p : experiment.problems) {
      run_config.sigma.push_back(std::sqrt(sigma_at_reference(p, ref.x_star)));
    }
  }
  TraceRecorder recorder(experiment.problems, experiment.topology, ref, config.output.stride);
  RunSummary result = run(experiment.problems, experiment.topology, run_config, recorder.observer());
  if (summary) *summary = std::move(result);
  return recorder.take();
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::kIoError, "float formatting failed");
  return std::string(buf, end);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.iteration << ',';
    if (r.epoch >= 0) out << r.epoch;
    out << ',' << r.oracle_calls << ',' << r.sketched_calls << ',' << r.comm_rounds << ','
        << format_double(r.bregman_gap) << ',' << format_double(r.consensus_residual) << ','
        << format_double(r.objective) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out = open_output(path);
  write_trace_csv(out, trace);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

namespace {

template <typename T>
T parse_field(std::string_view field, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParseError, where + ": bad field '" + std::string(field) + "'");
  }
  return value;
}

double parse_double_field(std::string_view field, const std::string& where) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  return parse_field<double>(field, where);
}

}  // namespace

Trace read_trace_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw Error(ErrorCode::kParseError, path.string() + ": missing trace header");
  }
  Trace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 8) throw Error(ErrorCode::kParseError, where + ": expected 8 fields");
    TraceRow r;
    r.iteration = parse_field<std::int64_t>(fields[0], where);
    r.epoch = fields[1].empty() ? -1 : parse_field<int>(fields[1], where);
    r.oracle_calls = parse_field<std::int64_t>(fields[2], where);
    r.sketched_calls = parse_field<std::int64_t>(fields[3], where);
    r.comm_rounds = parse_field<std::int64_t>(fields[4], where);
    r.bregman_gap = parse_double_field(fields[5], where);
    r.consensus_residual = parse_double_field(fields[6], where);
    r.objective = parse_double_field(fields[7], where);
    trace.rows.push_back(r);
  }
  return trace;
}

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j, Eigen::Index dim) {
  auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != dim) {
    throw Error(ErrorCode::kParseError, "reference vector has the wrong dimension");
  }
  return Eigen::Map<const Vector>(values.data(), dim);
}

}  // namespace

void save_reference(const std::filesystem::path& path, const ReferenceSolution& ref) {
  json doc;
  doc["format"] = "depd-reference";
  doc["version"] = kReferenceFormatVersion;
  doc["dim"] = ref.x_star.size();
  doc["x_star"] = vector_json(ref.x_star);
  doc["v_star"] = json::array();
  for (const auto& v : ref.v_star) doc["v_star"].push_back(vector_json(v));
  doc["lambda_star"] = json::array();
  for (const auto& node : ref.lambda_star) {
    json duals = json::array();
    for (const auto& l : node) duals.push_back(vector_json(l));
    doc["lambda_star"].push_back(std::move(duals));
  }
  doc["kkt_residual"] = ref.kkt_residual;
  doc["iterations"] = ref.iterations;
  std::ofstream out = open_output(path);
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

ReferenceSolution load_reference(const std::filesystem::path& path) {
  try {
    const json doc = json::parse(read_file(path));
    if (doc.value("format", "") != "depd-reference") {
      throw Error(ErrorCode::kParseError, path.string() + " is not a reference file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kReferenceFormatVersion) {
      throw Error(ErrorCode::kParseError,
                  "unsupported reference format version " + std::to_string(version));
    }
    const Eigen::Index dim = doc.at("dim").get<Eigen::Index>();
    ReferenceSolution ref;
    ref.x_star = json_vector(doc.at("x_star"), dim);
    for (const auto& v : doc.at("v_star")) ref.v_star.push_back(json_vector(v, dim));
    for (const auto& node : doc.at("lambda_star")) {
      std::vector<Vector> duals;
      for (const auto& l : node) duals.push_back(json_vector(l, dim));
      ref.lambda_star.push_back(std::move(duals));
    }
    if (ref.v_star.size() != ref.lambda_star.size()) {
      throw Error(ErrorCode::kParseError, "reference node counts disagree");
    }
    ref.kkt_residual = doc.at("kkt_residual").get<double>();
    ref.iterations = doc.at("iterations").get<std::int64_t>();
    return ref;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

double gap_at_budget(const Trace& trace, std::int64_t budget) {
  double gap = std::numeric_limits<double>::quiet_NaN();
  for (const TraceRow& r : trace.rows) {
    if (r.oracle_calls + r.sketched_calls > budget) break;
    gap = r.bregman_gap;
  }
  return gap;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

SweepResult run_sweep(const ExperimentConfig& config, const Experiment& experiment,
                      const ReferenceSolution& ref) {
  std::vector<std::string> algorithms = config.sweep.algorithms;
  const bool tagged = !algorithms.empty();
  if (!tagged) algorithms.emplace_back(to_string(config.run.algorithm));

  const std::filesystem::path out(config.output.path);
  const std::filesystem::path dir = out.parent_path();
  const std::string stem = out.stem().string();

  SweepResult result;
  std::map<std::string, std::vector<Trace>> traces;
  std::int64_t shortest = std::numeric_limits<std::int64_t>::max();
  for (const auto& name : algorithms) {
    for (std::uint64_t seed : config.sweep.seeds) {
      ExperimentConfig c = config;
      c.run.algorithm = estimator_kind_from_string(name);
      c.run.seed = seed;
      Trace trace = run_experiment(c, experiment, ref);
      std::string file = stem + (tagged ? "_" + name : "") + "_seed" + std::to_string(seed) + ".csv";
      const auto path = dir / file;
      write_trace_csv(path, trace);
      result.traces.push_back(path);
      if (!trace.rows.empty()) {
        const auto& last = trace.rows.back();
        shortest = std::min(shortest, last.oracle_calls + last.sketched_calls);
      }
      traces[name].push_back(std::move(trace));
    }
  }

  std::vector<std::int64_t> budgets = config.sweep.budgets;
  if (budgets.empty()) budgets.push_back(shortest);
  for (const auto& name : algorithms) {
    for (std::int64_t budget : budgets) {
      std::vector<double> gaps;
      for (const auto& trace : traces[name]) gaps.push_back(gap_at_budget(trace, budget));
      SweepSummaryRow row;
      row.algorithm = name;
      row.budget = budget;
      row.runs = static_cast<int>(std::count_if(gaps.begin(), gaps.end(),
                                                [](double g) { return !std::isnan(g); }));
      row.median_gap = median(std::move(gaps));
      result.summary.push_back(row);
    }
  }

  std::ofstream summary = open_output(dir / config.sweep.summary_path);
  summary << "algorithm,budget,median_bregman_gap,runs\n";
  for (const auto& row : result.summary) {
    summary << row.algorithm << ',' << row.budget << ',' << format_double(row.median_gap) << ','
            << row.runs << '\n';
  }
  if (!summary) throw Error(ErrorCode::kIoError, "cannot write sweep summary");
  return result;
}

namespace {

ExperimentConfig configured(const std::filesystem::path& config_path,
                            const CommandOverrides& overrides) {
  ExperimentConfig config = load_config(config_path);
  if (overrides.seed) {
    config.run.seed = *overrides.seed;
    config.sweep.seeds = {*overrides.seed};
  }
  if (overrides.threads) config.run.threads = *overrides.threads;
  return config;
}

}  // namespace

std::filesystem::path cmd_run(const std::filesystem::path& config_path,
                              const CommandOverrides& overrides) {
  ExperimentConfig config = configured(config_path, overrides);
  if (overrides.out) config.output.path = overrides.out->string();
  const Experiment experiment = build_experiment(config);
  const ReferenceSolution ref = obtain_reference(config, experiment);
  const Trace trace = run_experiment(config, experiment, ref);
  write_trace_csv(config.output.path, trace);
  return config.output.path;
}

std::filesystem::path cmd_reference(const std::filesystem::path& config_path,
                                    const CommandOverrides& overrides) {
  ExperimentConfig config = configured(config_path, overrides);
  if (overrides.out) config.output.reference_path = overrides.out->string();
  const Experiment experiment = build_experiment(config);
  const ReferenceSolution ref =
      compute_reference(experiment.problems, experiment.topology, config.reference.options);
  save_reference(config.output.reference_path, ref);
  return config.output.reference_path;
}

SweepResult cmd_sweep(const std::filesystem::path& config_path, const CommandOverrides& overrides) {
  ExperimentConfig config = configured(config_path, overrides);
  if (overrides.out) config.output.path = overrides.out->string();
  const Experiment experiment = build_experiment(config);
  const ReferenceSolution ref = obtain_reference(config, experiment);
  return run_sweep(config, experiment, ref);
}

}  // namespace depd
