#include "csgnn/marking.hpp"

#include <algorithm>
#include <numeric>

#include "csgnn/error.hpp"

namespace csgnn {

std::string to_string(MarkingKind kind) {
  switch (kind) {
    case MarkingKind::simple: return "simple";
    case MarkingKind::node_size: return "node_size";
    case MarkingKind::min_distance: return "min_distance";
    case MarkingKind::learned_distance: return "learned_distance";
  }
  return "?";
}

MarkingKind parse_marking_kind(const std::string& name) {
  if (name == "simple" || name == "pi_S") return MarkingKind::simple;
  if (name == "node_size" || name == "pi_SS") return MarkingKind::node_size;
  if (name == "min_distance" || name == "pi_MD") return MarkingKind::min_distance;
  if (name == "learned_distance" || name == "pi_LD") return MarkingKind::learned_distance;
  throw ContractViolation("unknown marking '" + name + "'");
}

namespace {

// Distances from v to every member of s, ascending; ties keep node-id order.
std::vector<int> distance_multiset(const std::vector<int>& s, int v, const SpdMatrix& spd) {
  std::vector<int> members = s;
  std::stable_sort(members.begin(), members.end(),
                   [&](int a, int b) { return spd(v, a) < spd(v, b); });
  std::vector<int> d;
  d.reserve(members.size());
  for (int u : members) d.push_back(spd(v, u));
  return d;
}

}  // namespace

Marking mark(const Graph& g, const CoarsePartition& cp, const MarkingSpec& spec, const SpdMatrix& spd) {
  require(spd.size() == g.num_nodes(), "mark: SPD matrix does not match graph");
  require(cp.source_n == g.num_nodes(), "mark: coarsening does not match graph");
  require(spec.kind != MarkingKind::learned_distance || spec.spd_dim >= 1,
          "mark: spd_dim must be >= 1 for learned_distance");
  Marking m;
  m.spec = spec;
  m.num_supers = cp.num_supers();
  m.num_nodes = g.num_nodes();
  m.rows.reserve(static_cast<std::size_t>(m.num_supers) * m.num_nodes);
  for (const auto& s : cp.super_nodes) {
    for (int v = 0; v < g.num_nodes(); ++v) {
      MarkDescriptor d;
      d.member = std::binary_search(s.begin(), s.end(), v);
      d.size = static_cast<int>(s.size());
      d.distances = distance_multiset(s, v, spd);
      d.min_distance = d.distances.front();
      if (static_cast<int>(d.distances.size()) > spec.spd_dim) d.distances.resize(spec.spd_dim);
      m.rows.push_back(std::move(d));
    }
  }
  return m;
}

long long distance_statistic(const CoarsePartition& cp, const SpdMatrix& spd, DistanceAggregate phi) {
  long long total = 0;
  for (const auto& s : cp.super_nodes)
    for (int v = 0; v < spd.size(); ++v) {
      auto d = distance_multiset(s, v, spd);
      switch (phi) {
        case DistanceAggregate::min: total += d.front(); break;
        case DistanceAggregate::max: total += d.back(); break;
        case DistanceAggregate::sum: total += std::accumulate(d.begin(), d.end(), 0LL); break;
      }
    }
  return total;
}

}  // namespace csgnn
