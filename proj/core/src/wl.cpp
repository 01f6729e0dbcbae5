#include "csgnn/wl.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "csgnn/error.hpp"
#include "csgnn/product.hpp"

namespace csgnn {

int TypedGraph::add_node(int color) {
  require(color >= 0, "TypedGraph: colors must be non-negative");
  colors.push_back(color);
  return num_nodes() - 1;
}

void TypedGraph::add_edge(int a, int b, int label) {
  require(a >= 0 && a < num_nodes() && b >= 0 && b < num_nodes(), "TypedGraph: edge endpoint out of range");
  require(label >= 0, "TypedGraph: labels must be non-negative");
  edges.push_back({a, b, label});
}

void TypedGraph::add_arc(int src, int dst, int label) {
  require(src >= 0 && src < num_nodes() && dst >= 0 && dst < num_nodes(), "TypedGraph: arc endpoint out of range");
  require(label >= 0, "TypedGraph: labels must be non-negative");
  arcs.push_back({src, dst, label});
}

int WlPalette::color_of(const std::vector<int>& signature) {
  auto [it, inserted] = ids_.emplace(signature, static_cast<int>(ids_.size()));
  return it->second;
}

WlResult wl_refine(const TypedGraph& g, WlPalette& palette, int rounds) {
  const int n = g.num_nodes();
  if (rounds <= 0) rounds = std::max(1, n);

  // incoming[v] = (relation kind, label, neighbor)
  std::vector<std::vector<std::tuple<int, int, int>>> incoming(n);
  for (const auto& e : g.edges) {
    incoming[e.b].emplace_back(0, e.label, e.a);
    incoming[e.a].emplace_back(0, e.label, e.b);
  }
  for (const auto& a : g.arcs) incoming[a.b].emplace_back(1, a.label, a.a);

  WlResult out;
  std::vector<int> colors(n);
  // Seed colors go through the palette too, tagged so they never collide with
  // refinement signatures (which start with a non-negative color).
  for (int v = 0; v < n; ++v) colors[v] = palette.color_of({-1, g.colors[v]});
  auto count_classes = [](const std::vector<int>& c) { return static_cast<int>(std::set<int>(c.begin(), c.end()).size()); };
  out.classes_per_round.push_back(count_classes(colors));

  std::vector<int> next(n);
  std::vector<std::tuple<int, int, int>> bag;
  for (int r = 0; r < rounds; ++r) {
    for (int v = 0; v < n; ++v) {
      bag.clear();
      for (const auto& [kind, label, u] : incoming[v]) bag.emplace_back(kind, label, colors[u]);
      std::sort(bag.begin(), bag.end());
      std::vector<int> sig;
      sig.reserve(1 + 3 * bag.size());
      sig.push_back(colors[v]);
      for (const auto& [kind, label, c] : bag) {
        sig.push_back(kind);
        sig.push_back(label);
        sig.push_back(c);
      }
      next[v] = palette.color_of(sig);
    }
    colors.swap(next);
    out.classes_per_round.push_back(count_classes(colors));
  }
  for (int c : colors) ++out.histogram[c];
  out.colors = std::move(colors);
  return out;
}

WlResult wl_refine(const TypedGraph& g, int rounds) {
  WlPalette palette;
  return wl_refine(g, palette, rounds);
}

bool wl_distinguishes(const TypedGraph& g1, const TypedGraph& g2) {
  if (g1.num_nodes() != g2.num_nodes()) return true;
  WlPalette palette;
  const int rounds = std::max({1, g1.num_nodes(), g2.num_nodes()});
  return wl_refine(g1, palette, rounds).histogram != wl_refine(g2, palette, rounds).histogram;
}

TypedGraph to_typed(const Graph& g) {
  TypedGraph t;
  for (int v = 0; v < g.num_nodes(); ++v) t.add_node(g.node_feat()[v]);
  for (int e = 0; e < g.num_edges(); ++e) t.add_edge(g.edges()[e].u, g.edges()[e].v, g.edge_feat()[e]);
  return t;
}

TypedGraph build_sum_graph(const Graph& g, const CoarsePartition& cp) {
  require(cp.source_n == g.num_nodes(), "build_sum_graph: coarsening does not match graph");
  const int n = g.num_nodes();
  TypedGraph t;
  for (int v = 0; v < n; ++v) t.add_node(2 * g.node_feat()[v]);
  for (int s = 0; s < cp.num_supers(); ++s) t.add_node(1);
  for (int e = 0; e < g.num_edges(); ++e) t.add_edge(g.edges()[e].u, g.edges()[e].v, 3 * g.edge_feat()[e]);
  for (const auto& ce : cp.coarse_edges) t.add_edge(n + ce.u, n + ce.v, 1);
  for (int s = 0; s < cp.num_supers(); ++s)
    for (int v : cp.super_nodes[s]) t.add_edge(v, n + s, 2);
  return t;
}

namespace {

std::vector<int> descriptor_key(const MarkDescriptor& d, MarkingKind kind) {
  switch (kind) {
    case MarkingKind::simple: return {d.member ? 1 : 0};
    case MarkingKind::node_size: return {d.member ? 1 : 0, d.size};
    case MarkingKind::min_distance: return {d.min_distance};
    case MarkingKind::learned_distance: break;
  }
  return d.distances;
}

long long descriptor_value(const MarkDescriptor& d, MarkingKind kind) {
  switch (kind) {
    case MarkingKind::simple:
    case MarkingKind::node_size: return d.member ? 1 : 0;
    case MarkingKind::min_distance: return d.min_distance;
    case MarkingKind::learned_distance: break;
  }
  long long s = 0;
  for (int x : d.distances) s += x;
  return s;
}

int orbit_label(int branch, const QuadOrbit& o, WlPalette& palette) {
  const auto key = o.packed();
  return palette.color_of({-2, branch, static_cast<int>(key >> 31), static_cast<int>(key & 0x7fffffffU)});
}

}  // namespace

TypedGraph product_typed_graph(const Graph& g, const CoarsePartition& cp, const MarkingSpec& marking,
                               MarkingView view, WlPalette& palette, bool with_symmetry_arcs) {
  const ProductGraph pg = build_product(g, cp);
  const SpdMatrix spd = all_pairs_spd(g);
  const Marking m = mark(g, cp, marking, spd);
  // Aggregated views use the untruncated multiset.
  const Marking full = mark(g, cp, MarkingSpec{marking.kind, kNoTruncation}, spd);

  TypedGraph t;
  for (int r = 0; r < pg.num_pg_nodes(); ++r) {
    std::vector<int> sig{-3, g.node_feat()[pg.node_of(r)]};
    if (view == MarkingView::descriptor) {
      auto key = descriptor_key(m.rows[r], marking.kind);
      sig.insert(sig.end(), key.begin(), key.end());
    } else {
      const auto& d = full.rows[r].distances;
      sig.push_back(view == MarkingView::phi_max ? d.back() : d.front());
    }
    t.add_node(palette.color_of(sig));
  }
  // Labels are palette ids so they stay comparable across graphs.
  for (std::size_t i = 0; i < pg.adj_g.size(); ++i)
    t.add_edge(pg.adj_g[i].src, pg.adj_g[i].dst, palette.color_of({-4, 0, pg.efeat_g[i]}));
  for (std::size_t i = 0; i < pg.adj_tg.size(); ++i)
    t.add_edge(pg.adj_tg[i].src, pg.adj_tg[i].dst, palette.color_of({-4, 1, pg.efeat_tg[i]}));
  if (with_symmetry_arcs) {
    for (std::size_t i = 0; i < pg.adj_p1.size(); ++i)
      t.add_arc(pg.adj_p1[i].src, pg.adj_p1[i].dst, orbit_label(1, pg.orbit_p1[i], palette));
    for (std::size_t i = 0; i < pg.adj_p2.size(); ++i)
      t.add_arc(pg.adj_p2[i].src, pg.adj_p2[i].dst, orbit_label(2, pg.orbit_p2[i], palette));
  }
  return t;
}

SeparationResult product_wl_separation(const Graph& g1, const Graph& g2, CoarseningFn coarsening,
                                       const MarkingSpec& marking, MarkingView view) {
  SeparationResult res;
  WlPalette palette;
  const CoarsePartition c1 = coarsening(g1);
  const CoarsePartition c2 = coarsening(g2);
  TypedGraph t1 = product_typed_graph(g1, c1, marking, view, palette);
  TypedGraph t2 = product_typed_graph(g2, c2, marking, view, palette);

  auto statistic = [&](const Graph& g, const CoarsePartition& cp) {
    SpdMatrix spd = all_pairs_spd(g);
    if (view == MarkingView::phi_max) return distance_statistic(cp, spd, DistanceAggregate::max);
    if (view == MarkingView::phi_min) return distance_statistic(cp, spd, DistanceAggregate::min);
    long long total = 0;
    for (const auto& d : mark(g, cp, marking, spd).rows) total += descriptor_value(d, marking.kind);
    return total;
  };
  res.statistic_1 = statistic(g1, c1);
  res.statistic_2 = statistic(g2, c2);

  if (t1.num_nodes() != t2.num_nodes()) {
    res.separated = true;
    return res;
  }
  const int rounds = std::max({1, t1.num_nodes(), t2.num_nodes()});
  res.separated = wl_refine(t1, palette, rounds).histogram != wl_refine(t2, palette, rounds).histogram;
  return res;
}

Graph two_c4_bridged() {
  // cycles 0-1-2-3 and 4-5-6-7, bridge 0-4
  return Graph(8, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {4, 5}, {5, 6}, {6, 7}, {4, 7}, {0, 4}});
}

Graph two_c5_shared_edge() {
  // shared edge 0-1; paths 0-2-3-4-1 and 0-5-6-7-1
  return Graph(8, {{0, 1}, {0, 2}, {2, 3}, {3, 4}, {1, 4}, {0, 5}, {5, 6}, {6, 7}, {1, 7}});
}

}  // namespace csgnn
