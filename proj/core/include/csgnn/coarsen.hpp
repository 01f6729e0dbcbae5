#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csgnn/graph.hpp"

namespace csgnn {

/// Output of a coarsening function: super-nodes (sorted node-id sets) and the
/// coarse edges induced by the original connectivity.
struct CoarsePartition {
  std::vector<std::vector<int>> super_nodes;
  std::vector<Edge> coarse_edges;  // super-node indices, u < v
  int source_n = 0;

  int num_supers() const noexcept { return static_cast<int>(super_nodes.size()); }
  /// True when super-nodes are disjoint and cover every node.
  bool is_partition() const;
  /// Coarse 0/1 adjacency over super-node indices.
  DenseMatrix adjacency() const;
  /// Applies a node relabeling inside every super-node; super-node order is kept.
  CoarsePartition permuted(std::span<const int> perm) const;
};

enum class CoarseningKind { spectral, identity, degree3, node_plus_edge };

struct CoarseningSpec {
  CoarseningKind kind = CoarseningKind::spectral;
  int num_clusters = 2;
  int lap_dim = 2;
  std::uint64_t seed = 0;
};

std::string to_string(CoarseningKind kind);
CoarseningKind parse_coarsening_kind(const std::string& name);

/// Pairs of distinct super-nodes joined by at least one original edge.
std::vector<Edge> induced_edges(const Graph& g, const std::vector<std::vector<int>>& supers);

/// Spectral clustering: k-means (k-means++ seeding, Lloyd iterations) on the
/// lap_dim smallest eigenvectors of the normalized Laplacian. Empty clusters are
/// dropped; super-nodes are ordered by their smallest member.
CoarsePartition spectral_coarsen(const Graph& g, int num_clusters, int lap_dim, std::uint64_t seed);

/// One singleton super-node per node.
CoarsePartition identity_coarsen(const Graph& g);

/// A single super-node holding every degree-3 node. Throws EmptyCoarseningError
/// when the graph has none.
CoarsePartition degree3_coarsen(const Graph& g);

/// Singletons followed by one super-node per edge (not a partition).
CoarsePartition node_plus_edge_coarsen(const Graph& g);

CoarsePartition coarsen(const Graph& g, const CoarseningSpec& spec);

}  // namespace csgnn
