#include "csgnn/coarsen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "csgnn/error.hpp"

namespace csgnn {

bool CoarsePartition::is_partition() const {
  std::vector<int> hits(source_n, 0);
  for (const auto& s : super_nodes)
    for (int v : s) {
      if (v < 0 || v >= source_n) return false;
      ++hits[v];
    }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

DenseMatrix CoarsePartition::adjacency() const {
  DenseMatrix a(num_supers(), num_supers());
  for (const auto& e : coarse_edges) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

CoarsePartition CoarsePartition::permuted(std::span<const int> perm) const {
  CoarsePartition out = *this;
  for (auto& s : out.super_nodes) {
    for (int& v : s) v = perm[v];
    std::sort(s.begin(), s.end());
  }
  return out;
}

std::string to_string(CoarseningKind kind) {
  switch (kind) {
    case CoarseningKind::spectral: return "spectral";
    case CoarseningKind::identity: return "identity";
    case CoarseningKind::degree3: return "degree3";
    case CoarseningKind::node_plus_edge: return "node_plus_edge";
  }
  return "?";
}

CoarseningKind parse_coarsening_kind(const std::string& name) {
  if (name == "spectral") return CoarseningKind::spectral;
  if (name == "identity") return CoarseningKind::identity;
  if (name == "degree3") return CoarseningKind::degree3;
  if (name == "node_plus_edge" || name == "node-plus-edge") return CoarseningKind::node_plus_edge;
  throw ContractViolation("unknown coarsening '" + name + "'");
}

std::vector<Edge> induced_edges(const Graph& g, const std::vector<std::vector<int>>& supers) {
  const int n = g.num_nodes();
  // owners[v] = super-node indices containing v
  std::vector<std::vector<int>> owners(n);
  for (int s = 0; s < static_cast<int>(supers.size()); ++s)
    for (int v : supers[s]) {
      require(v >= 0 && v < n, "induced_edges: super-node member out of range");
      owners[v].push_back(s);
    }
  std::set<Edge> found;
  for (const auto& e : g.edges())
    for (int a : owners[e.u])
      for (int b : owners[e.v])
        if (a != b) found.insert(Edge{std::min(a, b), std::max(a, b)});
  return {found.begin(), found.end()};
}

namespace {

CoarsePartition finish(const Graph& g, std::vector<std::vector<int>> supers) {
  CoarsePartition cp;
  cp.source_n = g.num_nodes();
  cp.coarse_edges = induced_edges(g, supers);
  cp.super_nodes = std::move(supers);
  return cp;
}

double sq_dist(const DenseMatrix& pts, int i, const std::vector<double>& c) {
  double d = 0.0;
  for (int j = 0; j < pts.cols(); ++j) {
    double t = pts(i, j) - c[j];
    d += t * t;
  }
  return d;
}

// Replaces a degenerate zero eigenspace (several connected components) with the
// Gram-Schmidt orthonormalization of D^{1/2} 1_C, components in node-id order.
void canonicalize_null_space(const Graph& g, EigenPairs& eig) {
  int zeros = 0;
  while (zeros < static_cast<int>(eig.values.size()) && std::abs(eig.values[zeros]) < 1e-9) ++zeros;
  if (zeros <= 1) return;
  std::vector<std::vector<double>> basis;
  const int n = g.num_nodes();
  for (const auto& comp : connected_components(g)) {
    if (comp.size() < 2) continue;
    std::vector<double> vec(n, 0.0);
    for (int v : comp) vec[v] = std::sqrt(static_cast<double>(g.degree(v)));
    for (const auto& b : basis) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += vec[i] * b[i];
      for (int i = 0; i < n; ++i) vec[i] -= dot * b[i];
    }
    double norm = 0.0;
    for (double x : vec) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : vec) x /= norm;
    basis.push_back(std::move(vec));
  }
  if (static_cast<int>(basis.size()) != zeros) return;
  for (int j = 0; j < zeros; ++j)
    for (int i = 0; i < n; ++i) eig.vectors(i, j) = basis[j][i];
}

std::vector<int> kmeans(const DenseMatrix& pts, int k, std::uint64_t seed) {
  const int n = pts.rows();
  const int dim = pts.cols();
  std::mt19937_64 rng(seed);

  std::vector<std::vector<double>> centers;
  std::vector<bool> chosen(n, false);
  auto take = [&](int i) {
    chosen[i] = true;
    centers.emplace_back(pts.row(i).begin(), pts.row(i).end());
  };
  take(static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)));
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, sq_dist(pts, i, c));
      d2[i] = best;
      total += best;
    }
    int pick = -1;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = n - 1; i >= 0; --i)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      for (int i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    }
    take(pick);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(pts, i, centers[0]);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(pts, i, centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (assign[i] == c) {
          ++count;
          for (int j = 0; j < dim; ++j) mean[j] += pts(i, j);
        }
      if (count == 0) continue;  // dropped after convergence
      for (int j = 0; j < dim; ++j) {
        mean[j] /= count;
        shift = std::max(shift, std::abs(mean[j] - centers[c][j]));
      }
      centers[c] = std::move(mean);
    }
    if (!changed || shift < 1e-9) break;
  }
  return assign;
}

}  // namespace

CoarsePartition spectral_coarsen(const Graph& g, int num_clusters, int lap_dim, std::uint64_t seed) {
  const int n = g.num_nodes();
  require(n >= 1, "spectral_coarsen: empty graph");
  require(num_clusters >= 1 && num_clusters <= n, "spectral_coarsen: num_clusters must be in [1, n]");
  require(lap_dim >= 1 && lap_dim <= n, "spectral_coarsen: lap_dim must be in [1, n]");

  std::vector<std::vector<int>> supers;
  if (num_clusters == n) {
    // Every point seeds its own centroid.
    for (int v = 0; v < n; ++v) supers.push_back({v});
    return finish(g, std::move(supers));
  }

  EigenPairs eig = symmetric_eigs(normalized_laplacian(g), n);
  canonicalize_null_space(g, eig);
  DenseMatrix pts(n, lap_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < lap_dim; ++j) pts(i, j) = eig.vectors(i, j);

  std::vector<int> assign = kmeans(pts, num_clusters, seed);
  std::vector<std::vector<int>> clusters(num_clusters);
  for (int v = 0; v < n; ++v) clusters[assign[v]].push_back(v);
  for (auto& c : clusters)
    if (!c.empty()) supers.push_back(std::move(c));
  std::sort(supers.begin(), supers.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return finish(g, std::move(supers));
}

CoarsePartition identity_coarsen(const Graph& g) {
  std::vector<std::vector<int>> supers;
  for (int v = 0; v < g.num_nodes(); ++v) supers.push_back({v});
  return finish(g, std::move(supers));
}

CoarsePartition degree3_coarsen(const Graph& g) {
  std::vector<int> members;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) == 3) members.push_back(v);
  if (members.empty()) throw EmptyCoarseningError("degree3_coarsen: graph has no degree-3 node");
  return finish(g, {std::move(members)});
}

CoarsePartition node_plus_edge_coarsen(const Graph& g) {
  std::vector<std::vector<int>> supers;
  for (int v = 0; v < g.num_nodes(); ++v) supers.push_back({v});
  for (const auto& e : g.edges()) supers.push_back({e.u, e.v});
  return finish(g, std::move(supers));
}

CoarsePartition coarsen(const Graph& g, const CoarseningSpec& spec) {
  switch (spec.kind) {
    case CoarseningKind::spectral:
      return spectral_coarsen(g, std::min(spec.num_clusters, g.num_nodes()),
                              std::min(spec.lap_dim, g.num_nodes()), spec.seed);
    case CoarseningKind::identity: return identity_coarsen(g);
    case CoarseningKind::degree3: return degree3_coarsen(g);
    case CoarseningKind::node_plus_edge: return node_plus_edge_coarsen(g);
  }
  throw ContractViolation("coarsen: unknown kind");
}

}  // namespace csgnn
