#pragma once
// Plot graph: spatial proximity edges fused with genotypic identity edges.
// Construction is O(n^2) by design (desk scale, brute-force verifiable).

#include <array>
#include <string>
#include <vector>

#include "agrignn/matrix.hpp"

namespace agrignn {

/// Unordered node pair, normalized to src < dst.
struct EdgeKey {
  int src = 0;
  int dst = 0;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

using EdgeSet = std::vector<EdgeKey>;  // sorted, unique

enum class SpatialEdgeMode { global, per_node };

struct SpatialEdgeOptions {
  SpatialEdgeMode mode = SpatialEdgeMode::global;
  double percentile = 3.0;
  bool closed_threshold = false;  // true: d <= t qualifies; default strict d < t
};

/// Undirected graph over plot nodes with per-edge provenance flags.
class AgriGraph {
 public:
  struct Edge {
    int src = 0;  // src < dst
    int dst = 0;
    bool spatial = false;
    bool genotypic = false;
  };

  AgriGraph() = default;
  explicit AgriGraph(int node_count) : node_count_(node_count), adjacency_(node_count) {}

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const;
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  /// Rebuilds adjacency from the edge list; used by the consistency check.
  std::vector<std::vector<int>> rebuild_adjacency() const;

 private:
  friend AgriGraph union_graph(const EdgeSet&, const EdgeSet&, int);
  int node_count_ = 0;
  std::vector<Edge> edges_;                  // sorted by (src, dst)
  std::vector<std::vector<int>> adjacency_;  // sorted neighbor lists
};

/// Euclidean distances on raw coordinate degrees, the default edge metric.
/// `haversine` switches to great-circle metres for real-world data.
Matrix pairwise_distances(const std::vector<std::array<double, 2>>& coords, bool haversine = false);

/// Nearest-rank percentile of the non-zero off-diagonal distances, each
/// unordered pair counted once. Throws when every pair is coincident.
double spatial_threshold(const Matrix& distances, double percentile = 3.0);

EdgeSet build_spatial_edges(const Matrix& distances, const SpatialEdgeOptions& opts = {});

/// Clique per shared population label.
EdgeSet build_genotype_edges(const std::vector<std::string>& populations);

AgriGraph union_graph(const EdgeSet& spatial, const EdgeSet& genotypic, int node_count);

void write_edges_csv(const std::string& path, const AgriGraph& g);

}  // namespace agrignn
