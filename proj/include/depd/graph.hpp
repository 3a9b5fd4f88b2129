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

#ifndef DEPD_GRAPH_HPP
#define DEPD_GRAPH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace depd {

/// Undirected edge stored canonically with u < v.
struct Edge {
  int u;
  int v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Connected, simple, undirected communication graph with sorted neighbor
/// lists. Immutable once built.
class Topology {
 public:
  /// Deduplicates and symmetrizes `edges`. Throws on self-loops, out-of-range
  /// endpoints, and disconnected graphs.
  static Topology build(int num_nodes, std::span<const std::pair<int, int>> edges);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const int> neighbors(int i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }

  /// Position of j in N_i, or -1.
  int slot_of(int i, int j) const;

  /// For the s-th neighbor j of i, the position of i in N_j. Precomputed so
  /// that message routing does not search.
  int reverse_slot(int i, int s) const { return reverse_[offsets_[i] + s]; }

  bool is_connected() const;

 private:
  Topology() = default;

  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
  std::vector<int> reverse_;
};

Topology build_topology(int num_nodes, const std::vector<std::pair<int, int>>& edges);

/// Random spanning tree followed by uniformly sampled extra edges.
Topology random_connected(int num_nodes, int num_edges, std::uint64_t seed);

Topology ring(int num_nodes);
Topology complete(int num_nodes);

/// Reads `i j` pairs, one per line; `#` starts a comment. When `num_nodes` is
/// absent it is taken as one past the largest index seen.
Topology load_edge_list(const std::filesystem::path& path,
                        std::optional<int> num_nodes = std::nullopt);

}  // namespace depd

#endif  // DEPD_GRAPH_HPP
