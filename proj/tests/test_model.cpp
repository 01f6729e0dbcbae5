#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "csgnn/error.hpp"
#include "csgnn/gradcheck.hpp"
#include "csgnn/model.hpp"
#include "support/test_graphs.hpp"

using namespace csgnn;
using namespace csgnn::testing;

namespace {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;

// Straightforward re-derivation of the forward pass from the model definition,
// written against the graph and coarsening directly (no product graph, no tape).
class Reference {
 public:
  Reference(const CsGnn<double>& model) : cfg_(model.config()), vocab_(model.config().max_nodes) {
    for (const auto& e : model.params().entries()) p_[e.name] = &e.value;
  }

  double forward(const Graph& g, const CoarsePartition& cp) const {
    const int n = g.num_nodes(), T = cp.num_supers(), d = cfg_.hidden_dim;
    SpdMatrix spd = all_pairs_spd(g);
    auto in = [&](int s, int v) { return std::count(cp.super_nodes[s].begin(), cp.super_nodes[s].end(), v) > 0; };
    auto at = [&](int s, int v) { return s * n + v; };

    Rows x(T * n, Vec(d, 0.0));
    for (int s = 0; s < T; ++s)
      for (int v = 0; v < n; ++v) {
        Vec& r = x[at(s, v)];
        add(r, row("node_embed", g.node_feat()[v]));
        const int size = static_cast<int>(cp.super_nodes[s].size());
        std::vector<int> dist;
        for (int u : cp.super_nodes[s]) dist.push_back(spd(v, u));
        std::sort(dist.begin(), dist.end());
        switch (cfg_.marking.kind) {
          case MarkingKind::simple: add(r, row("mark_embed", in(s, v))); break;
          case MarkingKind::node_size:
            add(r, row("mark_embed", in(s, v)));
            add(r, row("size_embed", size));
            break;
          case MarkingKind::min_distance: add(r, row("spd_embed", dist.front())); break;
          case MarkingKind::learned_distance:
            for (int k = 0; k < std::min<int>(dist.size(), cfg_.marking.spd_dim); ++k) add(r, row("spd_embed", dist[k]));
            break;
        }
      }

    auto coarse_adj = cp.adjacency();
    for (int t = 0; t < cfg_.num_layers; ++t) {
      const std::string L = "layer" + std::to_string(t);
      Rows total(T * n, Vec(d, 0.0));
      for (int s = 0; s < T; ++s)
        for (int v = 0; v < n; ++v) {
          // G branch: neighbors u of v inside the same super-node row
          Vec agg(d, 0.0);
          for (std::size_t e = 0; e < g.edges().size(); ++e) {
            const auto& ed = g.edges()[e];
            if (ed.u != v && ed.v != v) continue;
            const int u = ed.u == v ? ed.v : ed.u;
            add(agg, relu(sum(x[at(s, u)], row("edge_embed", g.edge_feat()[e]))));
          }
          add(total[at(s, v)], branch(L + ".g", x[at(s, v)], agg));

          agg.assign(d, 0.0);
          for (int s2 = 0; s2 < T; ++s2)
            if (coarse_adj(s, s2) != 0.0) add(agg, relu(sum(x[at(s2, v)], row("coarse_edge_embed", 0))));
          add(total[at(s, v)], branch(L + ".tg", x[at(s, v)], agg));

          if (!cfg_.use_equiv_updates) continue;
          agg.assign(d, 0.0);
          for (int s2 = 0; s2 < T; ++s2)
            if (in(s2, v)) {
              int r = vocab_.row(classify_quad(cp.super_nodes[s], v, cp.super_nodes[s2], v, n));
              add(agg, mlp(L + ".p1.message", sum(x[at(s2, v)], row("orbit_embed", r))));
            }
          add(total[at(s, v)], branch(L + ".p1", x[at(s, v)], agg));

          agg.assign(d, 0.0);
          for (int u : cp.super_nodes[s]) {
            int r = vocab_.row(classify_quad(cp.super_nodes[s], v, cp.super_nodes[s], u, n));
            add(agg, mlp(L + ".p2.message", sum(x[at(s, u)], row("orbit_embed", r))));
          }
          add(total[at(s, v)], branch(L + ".p2", x[at(s, v)], agg));
        }
      Rows next(T * n);
      for (int r = 0; r < T * n; ++r) {
        next[r] = mlp(L + ".fin", total[r]);
        if (cfg_.residual) add(next[r], x[r]);
      }
      x = std::move(next);
    }

    Vec graph_vec(d, 0.0);
    for (int s = 0; s < T; ++s) {
      Vec acc(d, 0.0);
      for (int v = 0; v < n; ++v) add(acc, x[at(s, v)]);
      if (cfg_.pooling == PoolingMode::mean_sum) {
        for (double& a : acc) a /= n;
        add(graph_vec, acc);
      } else {
        add(graph_vec, mlp("pool.inner", acc));
      }
    }
    if (cfg_.pooling == PoolingMode::two_mlp) graph_vec = mlp("pool.outer", graph_vec);
    double y = (*p_.at("head.b"))(0, 0);
    for (int k = 0; k < d; ++k) y += graph_vec[k] * (*p_.at("head.w"))(k, 0);
    return y;
  }

 private:
  Vec row(const std::string& name, int r) const {
    const auto& m = *p_.at(name);
    return Vec(m.row(r).begin(), m.row(r).end());
  }
  static void add(Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  }
  static Vec sum(Vec a, const Vec& b) {
    add(a, b);
    return a;
  }
  static Vec relu(Vec a) {
    for (double& v : a) v = std::max(v, 0.0);
    return a;
  }
  Vec affine(const Vec& x, const std::string& w, const std::string& b) const {
    const auto& W = *p_.at(w);
    Vec out = row(b, 0);
    for (int j = 0; j < W.cols(); ++j)
      for (int i = 0; i < W.rows(); ++i) out[j] += x[i] * W(i, j);
    return out;
  }
  Vec mlp(const std::string& prefix, const Vec& x) const {
    return affine(relu(affine(x, prefix + ".w1", prefix + ".b1")), prefix + ".w2", prefix + ".b2");
  }
  Vec branch(const std::string& prefix, const Vec& x, const Vec& agg) const {
    const double eps = (*p_.at(prefix + ".eps"))(0, 0);
    Vec h = agg;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += (1.0 + eps) * x[i];
    return mlp(prefix + ".update", h);
  }

  ModelConfig cfg_;
  MessageOrbitVocab vocab_;
  std::map<std::string, const Matrix<double>*> p_;
};

ModelConfig small_config(MarkingKind marking, CoarseningKind coarsening, bool equiv, PoolingMode pooling) {
  ModelConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 5;
  cfg.marking = {marking, marking == MarkingKind::learned_distance ? 2 : kNoTruncation};
  cfg.coarsening = {coarsening, 3, 2, 7};
  cfg.use_equiv_updates = equiv;
  cfg.pooling = pooling;
  cfg.max_nodes = 8;
  cfg.node_vocab = 3;
  cfg.edge_vocab = 2;
  cfg.seed = 11;
  return cfg;
}

// Nudges every parameter so that ε and head.b are non-zero as well.
void perturb(ParamStore<double>& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  for (int i = 0; i < store.size(); ++i)
    for (double& v : store[i].value.data()) v += d(rng);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("forward pass equals the reference implementation") {
    std::mt19937_64 rng(131);
    for (auto marking : {MarkingKind::simple, MarkingKind::node_size, MarkingKind::min_distance,
                         MarkingKind::learned_distance})
      for (auto coarsening : {CoarseningKind::spectral, CoarseningKind::node_plus_edge})
        for (bool equiv : {true, false})
          for (auto pooling : {PoolingMode::two_mlp, PoolingMode::mean_sum}) {
            ModelConfig cfg = small_config(marking, coarsening, equiv, pooling);
            cfg.residual = equiv;
            CsGnn<double> model(cfg);
            perturb(model.params(), rng());
            Graph g = random_graph(rng, 7, 0.4, 3, 2);
            PreparedGraph pg = prepare(g, cfg);
            Reference ref(model);
            CHECK(model.predict(pg) == doctest::Approx(ref.forward(g, pg.coarse)).epsilon(1e-12));
          }
  }

  TEST_CASE("all-zero parameters give a zero prediction") {
    ModelConfig cfg = small_config(MarkingKind::learned_distance, CoarseningKind::spectral, true, PoolingMode::two_mlp);
    CsGnn<double> model(cfg);
    for (int i = 0; i < model.params().size(); ++i) model.params()[i].value.fill(0.0);
    CHECK(model.predict(prepare(two_cliques(), cfg)) == 0.0);
  }

  TEST_CASE("mean-sum pooling of constant features") {
    // With one layer whose final MLP outputs a constant c, Σ_S (1/n) Σ_v c = T·c.
    ModelConfig cfg = small_config(MarkingKind::simple, CoarseningKind::identity, false, PoolingMode::mean_sum);
    cfg.num_layers = 1;
    CsGnn<double> model(cfg);
    auto& p = model.params();
    p[p.find("layer0.fin.w2")].value.fill(0.0);
    p[p.find("layer0.fin.b2")].value.fill(0.5);
    p[p.find("head.w")].value.fill(1.0);
    Graph g = path_graph(4);
    // identity coarsening: T = 4 rows, each averaging to 0.5 in every one of d = 5 dims
    CHECK(model.predict(prepare(g, cfg)) == doctest::Approx(4 * 0.5 * 5));
  }

  TEST_CASE("equivariant updates own exactly the symmetry-branch parameters") {
    for (auto pooling : {PoolingMode::two_mlp, PoolingMode::mean_sum}) {
      ModelConfig on = small_config(MarkingKind::node_size, CoarseningKind::spectral, true, pooling);
      ModelConfig off = on;
      off.use_equiv_updates = false;
      CsGnn<double> a(on), b(off);
      CHECK(a.params().num_scalars() - b.params().num_scalars() == a.symmetry_param_count());
      CHECK(b.symmetry_param_count() == 0);
      const std::size_t d = on.hidden_dim;
      const std::size_t mlp = 2 * d * d + 2 * d;
      const std::size_t per_layer = 2 * (1 + 2 * mlp);  // p1 and p2: ε, update MLP, message MLP
      CHECK(a.symmetry_param_count() == on.num_layers * per_layer + a.orbit_vocab().size() * d);
    }
  }

  TEST_CASE("orbit vocabulary covers every message orbit") {
    MessageOrbitVocab vocab(6);
    std::mt19937_64 rng(137);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 5;
      Graph g = random_graph(rng, n, 0.5);
      ProductGraph pg = build_product(g, node_plus_edge_coarsen(g));
      std::map<std::uint64_t, int> seen;
      for (const auto* orbits : {&pg.orbit_p1, &pg.orbit_p2})
        for (const auto& o : *orbits) {
          int r = vocab.row(o);
          // same row iff same orbit
          auto [it, fresh] = seen.emplace(o.packed(), r);
          REQUIRE(it->second == r);
        }
      std::set<int> rows;
      for (const auto& [k, r] : seen) rows.insert(r);
      CHECK(rows.size() == seen.size());
    }
    CHECK_THROWS_AS(vocab.row(QuadOrbit{true, 2, 3, 1, true, true, false, false}), ContractViolation);
  }

  TEST_CASE("output is invariant under node relabeling") {
    std::mt19937_64 rng(139);
    for (auto coarsening : {CoarseningKind::identity, CoarseningKind::degree3, CoarseningKind::node_plus_edge}) {
      ModelConfig cfg = small_config(MarkingKind::learned_distance, coarsening, true, PoolingMode::two_mlp);
      CsGnn<double> model(cfg);
      for (int graph = 0; graph < 4; ++graph) {
        Graph g = random_graph_with_degree3(rng, 7, 0.4, 3, 2);
        const double y = model.predict(prepare(g, cfg));
        for (int trial = 0; trial < 5; ++trial) {
          auto perm = random_permutation(rng, 7);
          REQUIRE(model.predict(prepare(g.permuted(perm), cfg)) == y);
        }
      }
    }
  }

  TEST_CASE("prepare rejects out-of-range inputs") {
    ModelConfig cfg = small_config(MarkingKind::simple, CoarseningKind::identity, true, PoolingMode::two_mlp);
    CHECK_THROWS_AS(prepare(complete_graph(9), cfg), ContractViolation);
    CHECK_THROWS_AS(prepare(Graph(2, {{0, 1}}, {5, 0}), cfg), ContractViolation);
    ModelConfig bad = cfg;
    bad.hidden_dim = 0;
    CHECK_THROWS_AS(CsGnn<double>{bad}, ContractViolation);
  }

  TEST_CASE("gradients match finite differences") {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      GradCheckReport r = grad_check_seeded(seed);
      INFO("worst entry " << r.worst_param);
      CHECK(r.max_rel_error < 1e-5);
      CHECK(r.checked > 0);
    }
  }
}
