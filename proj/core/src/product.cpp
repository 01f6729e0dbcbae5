#include "csgnn/product.hpp"

#include <algorithm>

#include "csgnn/error.hpp"

namespace csgnn {

ProductGraph build_product(const Graph& g, const CoarsePartition& cp) {
  require(cp.source_n == g.num_nodes(), "build_product: coarsening was built for a different graph");
  require(g.num_nodes() < 256, "build_product: orbit codes support fewer than 256 nodes");
  ProductGraph pg;
  const int n = g.num_nodes();
  const int t = cp.num_supers();
  pg.num_supers = t;
  pg.num_nodes = n;

  for (int s = 0; s < t; ++s)
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& edge = g.edges()[e];
      pg.adj_g.push_back({pg.index(s, edge.u), pg.index(s, edge.v)});
      pg.efeat_g.push_back(g.edge_feat()[e]);
    }
  for (const auto& ce : cp.coarse_edges)
    for (int v = 0; v < n; ++v) {
      pg.adj_tg.push_back({pg.index(ce.u, v), pg.index(ce.v, v)});
      pg.efeat_tg.push_back(0);
    }

  std::vector<std::vector<int>> owners(n);
  for (int s = 0; s < t; ++s) {
    for (int v : cp.super_nodes[s]) owners[v].push_back(s);
  }

  // Orbit invariants without materializing masks, so large n also works.
  auto membership = [&](int s, int v) {
    const auto& members = cp.super_nodes[s];
    return std::binary_search(members.begin(), members.end(), v);
  };
  auto overlap = [&](int a, int b) {
    const auto& x = cp.super_nodes[a];
    const auto& y = cp.super_nodes[b];
    int c = 0;
    for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
      if (x[i] < y[j]) ++i;
      else if (y[j] < x[i]) ++j;
      else { ++c; ++i; ++j; }
    }
    return c;
  };
  auto orbit = [&](int s, int v, int s2, int v2) {
    QuadOrbit o;
    o.distinct = v != v2;
    o.k1 = static_cast<int>(cp.super_nodes[s].size());
    o.k2 = static_cast<int>(cp.super_nodes[s2].size());
    o.k_cap = s == s2 ? o.k1 : overlap(s, s2);
    o.i1_in_s1 = membership(s, v);
    o.i2_in_s2 = membership(s2, v2);
    o.i1_in_s2 = membership(s2, v);
    o.i2_in_s1 = membership(s, v2);
    return o;
  };

  for (int s = 0; s < t; ++s)
    for (int v = 0; v < n; ++v)
      for (int src_super : owners[v]) {
        pg.adj_p1.push_back({pg.index(src_super, v), pg.index(s, v)});
        pg.orbit_p1.push_back(orbit(s, v, src_super, v));
      }
  for (int s = 0; s < t; ++s)
    for (int v = 0; v < n; ++v)
      for (int src_node : cp.super_nodes[s]) {
        pg.adj_p2.push_back({pg.index(s, src_node), pg.index(s, v)});
        pg.orbit_p2.push_back(orbit(s, v, s, src_node));
      }

  auto index = OrbitIndex::for_n(n);
  pg.code_p1.reserve(pg.orbit_p1.size());
  for (const auto& o : pg.orbit_p1) pg.code_p1.push_back(index->code(o));
  pg.code_p2.reserve(pg.orbit_p2.size());
  for (const auto& o : pg.orbit_p2) pg.code_p2.push_back(index->code(o));
  return pg;
}

DenseMatrix kron_oracle(const DenseMatrix& a1, const DenseMatrix& a2) {
  require(a1.rows() == a1.cols() && a2.rows() == a2.cols(), "kron_oracle: inputs must be square");
  const int n1 = a1.rows();
  const int n2 = a2.rows();
  DenseMatrix out(n1 * n2, n1 * n2);
  // a1 ⊗ I
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) out(i * n2 + k, j * n2 + k) += a1(i, j);
  // I ⊗ a2
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < n2; ++k)
      for (int l = 0; l < n2; ++l) out(i * n2 + k, i * n2 + l) += a2(k, l);
  return out;
}

DenseMatrix product_connectivity(const ProductGraph& pg) {
  const int m = pg.num_pg_nodes();
  DenseMatrix a(m, m);
  for (const auto* list : {&pg.adj_g, &pg.adj_tg})
    for (const auto& arc : *list) {
      a(arc.src, arc.dst) = 1.0;
      a(arc.dst, arc.src) = 1.0;
    }
  return a;
}

}  // namespace csgnn
