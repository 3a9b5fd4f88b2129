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

#include "depd/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "depd/common.hpp"
#include "depd/rng.hpp"

namespace depd {

Topology Topology::build(int num_nodes, std::span<const std::pair<int, int>> edges) {
  if (num_nodes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "num_nodes must be positive");
  }
  Topology topo;
  topo.num_nodes_ = num_nodes;
  topo.edges_.reserve(edges.size());
  for (auto [i, j] : edges) {
    for (int node : {i, j}) {
      if (node < 0 || node >= num_nodes) {
        throw Error(ErrorCode::kNodeOutOfRange, "node " + std::to_string(node));
      }
    }
    if (i == j) throw Error(ErrorCode::kSelfLoop, "node " + std::to_string(i));
    topo.edges_.push_back({std::min(i, j), std::max(i, j)});
  }
  std::sort(topo.edges_.begin(), topo.edges_.end());
  topo.edges_.erase(std::unique(topo.edges_.begin(), topo.edges_.end()),
                    topo.edges_.end());

  std::vector<int> degree(num_nodes, 0);
  for (const Edge& e : topo.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  topo.offsets_.assign(num_nodes + 1, 0);
  for (int i = 0; i < num_nodes; ++i) topo.offsets_[i + 1] = topo.offsets_[i] + degree[i];
  topo.adjacency_.resize(topo.offsets_.back());
  std::vector<int> fill(topo.offsets_.begin(), topo.offsets_.end() - 1);
  for (const Edge& e : topo.edges_) {
    topo.adjacency_[fill[e.u]++] = e.v;
    topo.adjacency_[fill[e.v]++] = e.u;
  }
  for (int i = 0; i < num_nodes; ++i) {
    std::sort(topo.adjacency_.begin() + topo.offsets_[i],
              topo.adjacency_.begin() + topo.offsets_[i + 1]);
  }
  topo.reverse_.resize(topo.adjacency_.size());
  for (int i = 0; i < num_nodes; ++i) {
    auto nbrs = topo.neighbors(i);
    for (int s = 0; s < static_cast<int>(nbrs.size()); ++s) {
      topo.reverse_[topo.offsets_[i] + s] = topo.slot_of(nbrs[s], i);
    }
  }
  if (!topo.is_connected()) {
    throw Error(ErrorCode::kDisconnected,
                "graph on " + std::to_string(num_nodes) + " nodes is not connected");
  }
  return topo;
}

int Topology::slot_of(int i, int j) const {
  auto nbrs = neighbors(i);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), j);
  if (it == nbrs.end() || *it != j) return -1;
  return static_cast<int>(it - nbrs.begin());
}

bool Topology::is_connected() const {
  std::vector<char> seen(num_nodes_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int j : neighbors(i)) {
      if (!seen[j]) {
        seen[j] = 1;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == num_nodes_;
}

Topology build_topology(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  return Topology::build(num_nodes, edges);
}

Topology random_connected(int num_nodes, int num_edges, std::uint64_t seed) {
  if (num_nodes < 1) throw Error(ErrorCode::kInvalidArgument, "num_nodes must be positive");
  const std::int64_t max_edges =
      static_cast<std::int64_t>(num_nodes) * (num_nodes - 1) / 2;
  if (num_edges < num_nodes - 1 || num_edges > max_edges) {
    throw Error(ErrorCode::kInfeasibleEdgeCount,
                std::to_string(num_edges) + " edges on " + std::to_string(num_nodes) +
                    " nodes (need " + std::to_string(num_nodes - 1) + ".." +
                    std::to_string(max_edges) + ")");
  }
  Rng rng(seed, 0, Stream::kTopology);

  // Random recursive tree over a shuffled node order.
  std::vector<int> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  for (int k = num_nodes - 1; k > 0; --k) {
    std::swap(order[k], order[rng.uniform_index(k + 1)]);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(num_edges);
  std::vector<char> used(static_cast<std::size_t>(num_nodes) * num_nodes, 0);
  for (int k = 1; k < num_nodes; ++k) {
    int a = order[k];
    int b = order[rng.uniform_index(k)];
    edges.emplace_back(std::min(a, b), std::max(a, b));
    used[static_cast<std::size_t>(std::min(a, b)) * num_nodes + std::max(a, b)] = 1;
  }

  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < num_nodes; ++i) {
    for (int j = i + 1; j < num_nodes; ++j) {
      if (!used[static_cast<std::size_t>(i) * num_nodes + j]) candidates.emplace_back(i, j);
    }
  }
  const std::size_t extra = static_cast<std::size_t>(num_edges - (num_nodes - 1));
  for (std::size_t k = 0; k < extra; ++k) {
    std::size_t pick = k + rng.uniform_index(candidates.size() - k);
    std::swap(candidates[k], candidates[pick]);
    edges.push_back(candidates[k]);
  }
  return Topology::build(num_nodes, edges);
}

Topology ring(int num_nodes) {
  if (num_nodes < 3) {
    throw Error(ErrorCode::kTooFewNodes, "ring needs at least 3 nodes");
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_nodes; ++i) edges.emplace_back(i, (i + 1) % num_nodes);
  return Topology::build(num_nodes, edges);
}

Topology complete(int num_nodes) {
  if (num_nodes < 2) {
    throw Error(ErrorCode::kTooFewNodes, "complete graph needs at least 2 nodes");
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_nodes; ++i) {
    for (int j = i + 1; j < num_nodes; ++j) edges.emplace_back(i, j);
  }
  return Topology::build(num_nodes, edges);
}

Topology load_edge_list(const std::filesystem::path& path, std::optional<int> num_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::pair<int, int>> edges;
  int max_index = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int i = 0;
    int j = 0;
    if (!(fields >> i)) continue;
    std::string rest;
    if (!(fields >> j) || (fields >> rest)) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(line_no) + ": expected `i j`");
    }
    max_index = std::max({max_index, i, j});
    edges.emplace_back(i, j);
  }
  return Topology::build(num_nodes.value_or(max_index + 1), edges);
}

}  // namespace depd
