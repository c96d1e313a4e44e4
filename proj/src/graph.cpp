#include "agrignn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "agrignn/errors.hpp"

namespace agrignn {
namespace {

constexpr double kEarthRadiusM = 6371000.0;

double degree_norm(double lat1, double lon1, double lat2, double lon2) {
  const double dy = lat1 - lat2;
  const double dx = lon1 - lon2;
  return std::sqrt(dx * dx + dy * dy);
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double rad = 0.017453292519943295;
  const double p1 = lat1 * rad, p2 = lat2 * rad;
  const double dphi = (lat2 - lat1) * rad;
  const double dlam = (lon2 - lon1) * rad;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dlam / 2) * std::sin(dlam / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

/// Nearest rank: 1-based index ceil(p/100 * m), clamped to [1, m].
std::size_t nearest_rank(double percentile, std::size_t m) {
  const double raw = std::ceil(percentile / 100.0 * static_cast<double>(m));
  if (raw < 1.0) return 1;
  if (raw > static_cast<double>(m)) return m;
  return static_cast<std::size_t>(raw);
}

}  // namespace

const std::vector<int>& AgriGraph::neighbors(int i) const {
  if (i < 0 || i >= node_count_)
    throw input_error("node index " + std::to_string(i) + " out of range [0, " +
                      std::to_string(node_count_) + ")");
  return adjacency_[i];
}

std::vector<std::vector<int>> AgriGraph::rebuild_adjacency() const {
  std::vector<std::vector<int>> adj(node_count_);
  for (const Edge& e : edges_) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Matrix pairwise_distances(const std::vector<std::array<double, 2>>& coords, bool haversine) {
  const int n = static_cast<int>(coords.size());
  if (n < 1) throw input_error("pairwise_distances requires at least one node");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(coords[i][0]) || !std::isfinite(coords[i][1]))
      throw input_error("non-finite coordinate at node " + std::to_string(i));

  Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = haversine
                           ? haversine_m(coords[i][0], coords[i][1], coords[j][0], coords[j][1])
                           : degree_norm(coords[i][0], coords[i][1], coords[j][0], coords[j][1]);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

double spatial_threshold(const Matrix& distances, double percentile) {
  const int n = distances.rows();
  std::vector<double> nonzero;
  nonzero.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (distances(i, j) > 0.0) nonzero.push_back(distances(i, j));
  if (nonzero.empty()) throw input_error("all pairwise distances are zero; no spatial threshold");

  const std::size_t rank = nearest_rank(percentile, nonzero.size());
  std::nth_element(nonzero.begin(), nonzero.begin() + (rank - 1), nonzero.end());
  return nonzero[rank - 1];
}

EdgeSet build_spatial_edges(const Matrix& distances, const SpatialEdgeOptions& opts) {
  const int n = distances.rows();
  EdgeSet edges;

  auto qualifies = [&opts](double d, double t) {
    return d > 0.0 && (opts.closed_threshold ? d <= t : d < t);
  };

  if (opts.mode == SpatialEdgeMode::global) {
    const double t = spatial_threshold(distances, opts.percentile);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (qualifies(distances(i, j), t)) edges.push_back({i, j});
    return edges;  // already sorted, unique
  }

  // Per-node mode: i selects j when d(i,j) sits in the bottom percentile of
  // i's own non-zero distances; symmetrized by union.
  std::vector<double> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int j = 0; j < n; ++j)
      if (j != i && distances(i, j) > 0.0) row.push_back(distances(i, j));
    if (row.empty()) continue;
    const std::size_t rank = nearest_rank(opts.percentile, row.size());
    std::nth_element(row.begin(), row.begin() + (rank - 1), row.end());
    const double t = row[rank - 1];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (qualifies(distances(i, j), t)) edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

EdgeSet build_genotype_edges(const std::vector<std::string>& populations) {
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (populations[i].empty())
      throw input_error("empty population label at node " + std::to_string(i));
    groups[populations[i]].push_back(static_cast<int>(i));
  }
  EdgeSet edges;
  for (const auto& [label, members] : groups)
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        edges.push_back({members[a], members[b]});
  std::sort(edges.begin(), edges.end());
  return edges;
}

AgriGraph union_graph(const EdgeSet& spatial, const EdgeSet& genotypic, int node_count) {
  auto check = [node_count](const EdgeSet& set) {
    for (const EdgeKey& e : set)
      if (e.src < 0 || e.dst < 0 || e.src >= node_count || e.dst >= node_count)
        throw input_error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                          ") out of range for " + std::to_string(node_count) + " nodes");
  };
  check(spatial);
  check(genotypic);

  std::map<EdgeKey, std::pair<bool, bool>> merged;
  for (const EdgeKey& e : spatial) merged[{std::min(e.src, e.dst), std::max(e.src, e.dst)}].first = true;
  for (const EdgeKey& e : genotypic) merged[{std::min(e.src, e.dst), std::max(e.src, e.dst)}].second = true;

  AgriGraph g(node_count);
  g.edges_.reserve(merged.size());
  for (const auto& [key, prov] : merged) {
    if (key.src == key.dst) continue;  // no self-loops
    g.edges_.push_back({key.src, key.dst, prov.first, prov.second});
    g.adjacency_[key.src].push_back(key.dst);
    g.adjacency_[key.dst].push_back(key.src);
  }
  for (auto& list : g.adjacency_) std::sort(list.begin(), list.end());
  return g;
}

void write_edges_csv(const std::string& path, const AgriGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write edges file: " + path);
  out << "src,dst,spatial,genotypic\n";
  for (const auto& e : g.edges())
    out << e.src << ',' << e.dst << ',' << (e.spatial ? 1 : 0) << ',' << (e.genotypic ? 1 : 0)
        << '\n';
}

}  // namespace agrignn
