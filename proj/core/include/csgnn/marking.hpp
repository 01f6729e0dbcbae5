#pragma once

#include <limits>
#include <string>
#include <vector>

#include "csgnn/coarsen.hpp"
#include "csgnn/graph.hpp"

namespace csgnn {

enum class MarkingKind { simple, node_size, min_distance, learned_distance };

/// spd_dim == kNoTruncation keeps the whole distance multiset.
inline constexpr int kNoTruncation = std::numeric_limits<int>::max();

struct MarkingSpec {
  MarkingKind kind = MarkingKind::simple;
  int spd_dim = kNoTruncation;
};

std::string to_string(MarkingKind kind);
MarkingKind parse_marking_kind(const std::string& name);

/// Relation between node v and super-node S, for one product node (S, v).
/// Every field is filled regardless of kind; the kind decides which ones the
/// model consumes.
struct MarkDescriptor {
  bool member = false;         // v ∈ S
  int size = 0;                // |S|
  int min_distance = 0;        // min_{u∈S} d(v, u)
  std::vector<int> distances;  // {d(v, u) : u ∈ S}, ascending, truncated to spd_dim
};

struct Marking {
  MarkingSpec spec;
  int num_supers = 0;
  int num_nodes = 0;
  std::vector<MarkDescriptor> rows;  // product-node order S·n + v

  const MarkDescriptor& at(int super, int node) const { return rows[super * num_nodes + node]; }
};

Marking mark(const Graph& g, const CoarsePartition& cp, const MarkingSpec& spec, const SpdMatrix& spd);

/// Aggregation applied to the full (untruncated) distance multiset of (S, v).
enum class DistanceAggregate { min, max, sum };

/// Σ_{S,v} φ({d(v, u) : u ∈ S}) over the untruncated multisets.
long long distance_statistic(const CoarsePartition& cp, const SpdMatrix& spd, DistanceAggregate phi);

}  // namespace csgnn
