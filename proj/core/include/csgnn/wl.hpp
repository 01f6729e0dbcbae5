#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "csgnn/coarsen.hpp"
#include "csgnn/graph.hpp"
#include "csgnn/marking.hpp"

namespace csgnn {

/// Colored graph with labeled undirected edges and labeled directed arcs.
/// Refinement aggregates over every incoming relation: both endpoints of an
/// edge, and the target of an arc.
struct TypedGraph {
  struct Link {
    int a = 0;
    int b = 0;
    int label = 0;
  };
  std::vector<int> colors;
  std::vector<Link> edges;  // undirected
  std::vector<Link> arcs;   // a -> b

  int num_nodes() const noexcept { return static_cast<int>(colors.size()); }
  int add_node(int color);
  void add_edge(int a, int b, int label = 0);
  void add_arc(int src, int dst, int label = 0);
};

/// Injective map from refinement signatures to color ids, shared across graphs
/// so their colors are directly comparable. No hashing: ids are exact.
class WlPalette {
 public:
  int color_of(const std::vector<int>& signature);
  int size() const noexcept { return static_cast<int>(ids_.size()); }

 private:
  std::map<std::vector<int>, int> ids_;
};

using ColorHistogram = std::map<int, int>;

struct WlResult {
  ColorHistogram histogram;          // final colors
  std::vector<int> colors;           // final color per node
  std::vector<int> classes_per_round;  // number of distinct colors after each round (index 0 = initial)
};

/// rounds <= 0 means num_nodes rounds. Colors from the same palette are comparable.
WlResult wl_refine(const TypedGraph& g, WlPalette& palette, int rounds = 0);
/// Refines with a private palette; histograms are only meaningful for class counts.
WlResult wl_refine(const TypedGraph& g, int rounds = 0);

/// True when 1-WL assigns the two graphs different color histograms, using a
/// shared palette and max(n1, n2) rounds.
bool wl_distinguishes(const TypedGraph& g1, const TypedGraph& g2);

/// Node colors from node features; edge labels from edge features.
TypedGraph to_typed(const Graph& g);

/// Sum graph: original nodes colored 2·feat, super-nodes colored 1; edges of
/// E (label 3·ef), coarse edges (label 1) and membership edges v–S (label 2).
/// Original nodes come first, super-node s is node n + s.
TypedGraph build_sum_graph(const Graph& g, const CoarsePartition& cp);

/// How a marking descriptor turns into a product-node color.
enum class MarkingView { descriptor, phi_min, phi_max };

/// Product graph T(G)□G as a typed graph: node (S,v) colored by (node feature,
/// marking descriptor); G and T(G) edges undirected, P1/P2 arcs labeled by their
/// quadruple orbit. Equal descriptors map to equal colors through `palette`.
TypedGraph product_typed_graph(const Graph& g, const CoarsePartition& cp, const MarkingSpec& marking,
                               MarkingView view, WlPalette& palette, bool with_symmetry_arcs = true);

struct SeparationResult {
  bool separated = false;
  long long statistic_1 = 0;  // Σ over (S, v) of the viewed marking value
  long long statistic_2 = 0;
};

using CoarseningFn = CoarsePartition (*)(const Graph&);

/// Compares product-graph WL histograms of two graphs under one coarsening and marking.
SeparationResult product_wl_separation(const Graph& g1, const Graph& g2, CoarseningFn coarsening,
                                       const MarkingSpec& marking, MarkingView view = MarkingView::descriptor);

/// Two 4-cycles joined by a bridge between one node of each (8 nodes).
Graph two_c4_bridged();
/// Two 5-cycles glued along one edge (8 nodes).
Graph two_c5_shared_edge();

}  // namespace csgnn
