#include "csgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "csgnn/error.hpp"

namespace csgnn {

Graph::Graph(int num_nodes, std::vector<std::pair<int, int>> edges, std::vector<int> node_feat,
             std::vector<int> edge_feat)
    : n_(num_nodes), node_feat_(std::move(node_feat)), edge_feat_(std::move(edge_feat)) {
  require(n_ >= 0, "graph: negative node count");
  if (node_feat_.empty()) node_feat_.assign(n_, 0);
  if (edge_feat_.empty()) edge_feat_.assign(edges.size(), 0);
  require(static_cast<int>(node_feat_.size()) == n_, "graph: node_feat length != num_nodes");
  require(edge_feat_.size() == edges.size(), "graph: edge_feat length != edge count");
  for (int f : node_feat_) require(f >= 0, "graph: negative node feature id");
  for (int f : edge_feat_) require(f >= 0, "graph: negative edge feature id");

  adj_.assign(n_, {});
  std::set<Edge> seen;
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    require(a >= 0 && a < n_ && b >= 0 && b < n_,
            "graph: edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    require(a != b, "graph: self-loop at node " + std::to_string(a));
    Edge e{std::min(a, b), std::max(a, b)};
    require(seen.insert(e).second,
            "graph: duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    edges_.push_back(e);
    adj_[e.u].push_back(e.v);
    adj_[e.v].push_back(e.u);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

DenseMatrix Graph::adjacency() const {
  DenseMatrix a(n_, n_);
  for (const auto& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Graph Graph::permuted(std::span<const int> perm) const {
  require(static_cast<int>(perm.size()) == n_, "graph: permutation size mismatch");
  std::vector<int> nf(n_);
  for (int v = 0; v < n_; ++v) nf[perm[v]] = node_feat_[v];
  std::vector<std::pair<int, int>> es;
  es.reserve(edges_.size());
  for (const auto& e : edges_) es.emplace_back(perm[e.u], perm[e.v]);
  return Graph(n_, std::move(es), std::move(nf), edge_feat_);
}

SpdMatrix all_pairs_spd(const Graph& g) {
  const int n = g.num_nodes();
  SpdMatrix spd(n);
  for (int s = 0; s < n; ++s) {
    spd.at(s, s) = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : g.neighbors(u)) {
        if (spd(s, w) == n && w != s) {
          spd.at(s, w) = spd(s, u) + 1;
          q.push(w);
        }
      }
    }
  }
  return spd;
}

DenseMatrix normalized_laplacian(const Graph& g) {
  const int n = g.num_nodes();
  DenseMatrix lap = DenseMatrix::identity(n);
  std::vector<double> inv_sqrt(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (g.degree(v) > 0) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
  }
  for (const auto& e : g.edges()) {
    double w = -inv_sqrt[e.u] * inv_sqrt[e.v];
    lap(e.u, e.v) = w;
    lap(e.v, e.u) = w;
  }
  return lap;
}

EigenPairs symmetric_eigs(const DenseMatrix& m, int k) {
  const int n = m.rows();
  require(m.cols() == n, "symmetric_eigs: matrix is not square");
  require(k >= 0 && k <= n, "symmetric_eigs: k out of range");
  double scale = 0.0;
  for (double x : m.data()) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      require(std::abs(m(i, j) - m(j, i)) <= 1e-12 * std::max(1.0, scale),
              "symmetric_eigs: matrix is not symmetric");

  DenseMatrix a = m;
  DenseMatrix v = DenseMatrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, scale * scale)) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int r = 0; r < n; ++r) {
          double arp = a(r, p);
          double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          double apr = a(p, r);
          double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (int r = 0; r < n; ++r) {
          double vrp = v(r, p);
          double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Stable on index so equal eigenvalues keep the sweep order.
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

  EigenPairs out;
  out.values.resize(k);
  out.vectors = DenseMatrix(n, k);
  for (int j = 0; j < k; ++j) {
    int col = order[j];
    out.values[j] = a(col, col);
    double norm = 0.0;
    for (int r = 0; r < n; ++r) norm += v(r, col) * v(r, col);
    norm = std::sqrt(norm);
    double sign = 1.0;
    for (int r = 0; r < n; ++r) {
      if (std::abs(v(r, col)) > 1e-12) {
        sign = v(r, col) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int r = 0; r < n; ++r) out.vectors(r, j) = sign * v(r, col) / norm;
  }
  return out;
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> members{s};
    comp[s] = static_cast<int>(out.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (int w : g.neighbors(members[i])) {
        if (comp[w] < 0) {
          comp[w] = comp[s];
          members.push_back(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

}  // namespace csgnn
