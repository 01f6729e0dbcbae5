#pragma once

#include <span>
#include <utility>
#include <vector>

#include "csgnn/matrix.hpp"

namespace csgnn {

/// Undirected edge, stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Simple undirected graph with categorical node and edge features.
///
/// Node ids are 0..n-1. The constructor normalizes every edge so that the
/// smaller id comes first and rejects self-loops, duplicates and out-of-range
/// ids. Edge order is preserved as given.
class Graph {
 public:
  Graph() = default;
  Graph(int num_nodes, std::vector<std::pair<int, int>> edges, std::vector<int> node_feat = {},
        std::vector<int> edge_feat = {});

  int num_nodes() const noexcept { return n_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& node_feat() const noexcept { return node_feat_; }
  const std::vector<int>& edge_feat() const noexcept { return edge_feat_; }

  /// Sorted neighbor list of v.
  std::span<const int> neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  bool has_edge(int u, int v) const;

  /// Dense 0/1 adjacency matrix.
  DenseMatrix adjacency() const;

  /// Relabels node v as perm[v]. Edge order and per-edge features follow their edges.
  Graph permuted(std::span<const int> perm) const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_ && node_feat_ == other.node_feat_ &&
           edge_feat_ == other.edge_feat_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> node_feat_;
  std::vector<int> edge_feat_;
  std::vector<std::vector<int>> adj_;
};

/// All-pairs hop distances. Unreachable pairs hold the sentinel num_nodes.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(int n) : n_(n), dist_(static_cast<std::size_t>(n) * n, n) {}

  int size() const noexcept { return n_; }
  int unreachable() const noexcept { return n_; }
  int operator()(int u, int v) const { return dist_[static_cast<std::size_t>(u) * n_ + v]; }
  int& at(int u, int v) { return dist_[static_cast<std::size_t>(u) * n_ + v]; }

  bool operator==(const SpdMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<int> dist_;
};

SpdMatrix all_pairs_spd(const Graph& g);

/// L = I - D^{-1/2} A D^{-1/2}; isolated nodes get a unit diagonal.
DenseMatrix normalized_laplacian(const Graph& g);

struct EigenPairs {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // n x k, column j pairs with values[j]
};

/// k smallest eigenpairs of a symmetric matrix via cyclic Jacobi rotations.
/// Each eigenvector is normalized and signed so its first nonzero entry is positive.
EigenPairs symmetric_eigs(const DenseMatrix& m, int k);

/// Connected components, each sorted, ordered by smallest member.
std::vector<std::vector<int>> connected_components(const Graph& g);

}  // namespace csgnn
