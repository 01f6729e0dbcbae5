#pragma once

#include <vector>

#include "csgnn/coarsen.hpp"
#include "csgnn/graph.hpp"
#include "csgnn/symmetry.hpp"

namespace csgnn {

/// Directed message src -> dst between product nodes.
struct Arc {
  int src = 0;
  int dst = 0;
  auto operator<=>(const Arc&) const = default;
};

/// Coarse product graph T(G) □ G. Product node (S, v) has index S·n + v.
///
/// adj_g and adj_tg store each undirected pair once (smaller index as src);
/// message passing traverses both directions. adj_p1 and adj_p2 are directed:
///   p1: (S', v) -> (S, v) for every S' containing v
///   p2: (S, v') -> (S, v) for every v' in S
/// Self-messages (S, v) -> (S, v) are present in both when v ∈ S.
struct ProductGraph {
  int num_supers = 0;
  int num_nodes = 0;

  std::vector<Arc> adj_g;
  std::vector<Arc> adj_tg;
  std::vector<Arc> adj_p1;
  std::vector<Arc> adj_p2;

  std::vector<int> efeat_g;   // original edge feature id
  std::vector<int> efeat_tg;  // coarse edge feature id (always 0)
  /// Orbit of (S, v, S', v') with (S, v) the receiver and (S', v') the sender.
  std::vector<QuadOrbit> orbit_p1;
  std::vector<QuadOrbit> orbit_p2;
  /// OrbitIndex::for_n(num_nodes) codes of the orbits above.
  std::vector<int> code_p1;
  std::vector<int> code_p2;

  int num_pg_nodes() const noexcept { return num_supers * num_nodes; }
  int index(int super, int node) const noexcept { return super * num_nodes + node; }
  int super_of(int pg) const noexcept { return pg / num_nodes; }
  int node_of(int pg) const noexcept { return pg % num_nodes; }
};

ProductGraph build_product(const Graph& g, const CoarsePartition& cp);

/// Dense Cartesian-product adjacency a1 ⊗ I + I ⊗ a2 (rows indexed i1·n2 + i2).
DenseMatrix kron_oracle(const DenseMatrix& a1, const DenseMatrix& a2);

/// Dense symmetric 0/1 matrix of adj_g ∪ adj_tg.
DenseMatrix product_connectivity(const ProductGraph& pg);

}  // namespace csgnn
