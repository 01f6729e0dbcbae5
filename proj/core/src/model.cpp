#include "csgnn/model.hpp"

#include <cmath>
#include <random>

#include "csgnn/error.hpp"

namespace csgnn {

std::string to_string(PoolingMode mode) {
  return mode == PoolingMode::two_mlp ? "two_mlp" : "mean_sum";
}

PoolingMode parse_pooling_mode(const std::string& name) {
  if (name == "two_mlp" || name == "two-mlp") return PoolingMode::two_mlp;
  if (name == "mean_sum" || name == "mean-sum") return PoolingMode::mean_sum;
  throw ContractViolation("unknown pooling '" + name + "'");
}

void ModelConfig::validate() const {
  require(num_layers >= 1, "config: num_layers must be >= 1");
  require(hidden_dim >= 1, "config: hidden_dim must be >= 1");
  require(max_nodes >= 1 && max_nodes < 256, "config: max_nodes must be in [1, 255]");
  require(node_vocab >= 1 && edge_vocab >= 1, "config: vocab sizes must be >= 1");
  require(coarsening.num_clusters >= 1 && coarsening.lap_dim >= 1, "config: clusters and lap_dim must be >= 1");
  require(marking.kind != MarkingKind::learned_distance || marking.spd_dim >= 1,
          "config: spd_dim must be >= 1");
}

PreparedGraph prepare(const Graph& g, const ModelConfig& cfg, double target) {
  require(g.num_nodes() >= 1, "prepare: empty graph");
  require(g.num_nodes() <= cfg.max_nodes,
          "prepare: graph has " + std::to_string(g.num_nodes()) + " nodes, model supports " +
              std::to_string(cfg.max_nodes));
  for (int f : g.node_feat()) require(f < cfg.node_vocab, "prepare: node feature id exceeds node_vocab");
  for (int f : g.edge_feat()) require(f < cfg.edge_vocab, "prepare: edge feature id exceeds edge_vocab");
  PreparedGraph out;
  out.graph = g;
  out.coarse = coarsen(g, cfg.coarsening);
  out.product = build_product(g, out.coarse);
  out.marking = mark(g, out.coarse, cfg.marking, all_pairs_spd(g));
  out.target = target;
  return out;
}

MessageOrbitVocab::MessageOrbitVocab(int max_nodes) {
  for (const auto& o : OrbitIndex::for_n(max_nodes)->orbits()) {
    // p1: sender (S', v), v ∈ S'.  p2: sender (S, v'), v' ∈ S.
    bool p1 = !o.distinct && o.i2_in_s2;
    bool p2 = o.k1 == o.k2 && o.k_cap == o.k1 && o.i2_in_s2;
    if (!p1 && !p2) continue;
    rows_.emplace(o.packed(), size());
    orbits_.push_back(o);
  }
}

int MessageOrbitVocab::row(const QuadOrbit& orbit) const {
  auto it = rows_.find(orbit.packed());
  require(it != rows_.end(), "orbit " + orbit.to_string() + " is outside the model's orbit vocabulary");
  return it->second;
}

template <typename T>
MlpVars<T> bind(Tape<T>& tape, const MlpIds& ids) {
  return {tape.param(ids.w1), tape.param(ids.b1), tape.param(ids.w2), tape.param(ids.b2)};
}

template <typename T>
Var apply_mlp(Tape<T>& tape, Var x, const MlpVars<T>& mlp) {
  Var h = tape.relu(tape.add_row(tape.matmul(x, mlp.w1), mlp.b1));
  return tape.add_row(tape.matmul(h, mlp.w2), mlp.b2);
}

template <typename T>
Var gine_branch(Tape<T>& tape, Var x, const MessageList& messages, Var edge_feat, const BranchVars<T>& branch) {
  const int rows = tape.value(x).rows();
  require(messages.src.size() == messages.dst.size(), "gine_branch: src/dst length mismatch");
  require(tape.value(edge_feat).rows() == static_cast<int>(messages.src.size()),
          "gine_branch: one edge feature row per message required");
  for (int s : messages.src) require(s >= 0 && s < rows, "gine_branch: message source out of range");
  Var incoming = tape.add(tape.gather_rows(x, messages.src), edge_feat);
  Var msg = branch.message ? apply_mlp(tape, incoming, *branch.message) : tape.relu(incoming);
  Var agg = tape.scatter_sum(msg, messages.dst, rows);
  Var h = tape.add(tape.scale_by(x, branch.eps, T(1)), agg);
  return apply_mlp(tape, h, branch.update);
}

namespace {

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  template <typename T>
  Matrix<T> uniform(int rows, int cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix<T> m(rows, cols);
    for (T& v : m.data()) v = static_cast<T>(dist(rng_));
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

template <typename T>
BranchVars<T> bind_branch(Tape<T>& tape, const BranchIds& ids) {
  BranchVars<T> b{tape.param(ids.eps), bind(tape, ids.update), std::nullopt};
  if (ids.message) b.message = bind(tape, *ids.message);
  return b;
}

}  // namespace

template <typename T>
CsGnn<T>::CsGnn(ModelConfig cfg) : cfg_(std::move(cfg)), vocab_(cfg_.max_nodes) {
  cfg_.validate();
  register_params();
}

template <typename T>
CsGnn<T>::CsGnn(ModelConfig cfg, ParamStore<T> params) : cfg_(std::move(cfg)), vocab_(cfg_.max_nodes) {
  cfg_.validate();
  register_params();
  require(params.size() == params_.size(), "CsGnn: parameter count does not match config");
  for (int i = 0; i < params_.size(); ++i) {
    const auto& want = params_[i];
    const auto& got = params[i];
    require(got.name == want.name && got.value.rows() == want.value.rows() &&
                got.value.cols() == want.value.cols(),
            "CsGnn: parameter '" + got.name + "' does not match config");
  }
  params_ = std::move(params);
  params_.zero_grad();
}

template <typename T>
void CsGnn<T>::register_params() {
  const int d = cfg_.hidden_dim;
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  Initializer init(cfg_.seed);

  auto mlp = [&](const std::string& prefix) {
    MlpIds ids;
    ids.w1 = params_.add(prefix + ".w1", init.uniform<T>(d, d, a));
    ids.b1 = params_.add(prefix + ".b1", init.uniform<T>(1, d, a));
    ids.w2 = params_.add(prefix + ".w2", init.uniform<T>(d, d, a));
    ids.b2 = params_.add(prefix + ".b2", init.uniform<T>(1, d, a));
    return ids;
  };
  auto branch = [&](const std::string& prefix, bool with_message) {
    BranchIds ids;
    ids.eps = params_.add(prefix + ".eps", Matrix<T>(1, 1));
    ids.update = mlp(prefix + ".update");
    if (with_message) ids.message = mlp(prefix + ".message");
    return ids;
  };

  node_embed_ = params_.add("node_embed", init.uniform<T>(cfg_.node_vocab, d, a));
  edge_embed_ = params_.add("edge_embed", init.uniform<T>(cfg_.edge_vocab, d, a));
  coarse_edge_embed_ = params_.add("coarse_edge_embed", init.uniform<T>(1, d, a));
  if (cfg_.use_equiv_updates) orbit_embed_ = params_.add("orbit_embed", init.uniform<T>(vocab_.size(), d, a));

  switch (cfg_.marking.kind) {
    case MarkingKind::simple:
      mark_embed_ = params_.add("mark_embed", init.uniform<T>(2, d, a));
      break;
    case MarkingKind::node_size:
      mark_embed_ = params_.add("mark_embed", init.uniform<T>(2, d, a));
      size_embed_ = params_.add("size_embed", init.uniform<T>(cfg_.max_nodes + 1, d, a));
      break;
    case MarkingKind::min_distance:
    case MarkingKind::learned_distance:
      // rows 0..max_nodes: distances plus the unreachable sentinel (= n <= max_nodes)
      spd_embed_ = params_.add("spd_embed", init.uniform<T>(cfg_.max_nodes + 1, d, a));
      break;
  }

  for (int t = 0; t < cfg_.num_layers; ++t) {
    const std::string p = "layer" + std::to_string(t);
    LayerIds ids;
    ids.g = branch(p + ".g", false);
    ids.tg = branch(p + ".tg", false);
    if (cfg_.use_equiv_updates) {
      ids.p1 = branch(p + ".p1", true);
      ids.p2 = branch(p + ".p2", true);
    }
    ids.fin = mlp(p + ".fin");
    layers_.push_back(ids);
  }
  if (cfg_.pooling == PoolingMode::two_mlp) {
    pool_inner_ = mlp("pool.inner");
    pool_outer_ = mlp("pool.outer");
  }
  head_w_ = params_.add("head.w", init.uniform<T>(d, 1, a));
  head_b_ = params_.add("head.b", Matrix<T>(1, 1));
}

template <typename T>
std::size_t CsGnn<T>::symmetry_param_count() const {
  std::size_t n = 0;
  for (const auto& e : params_.entries()) {
    bool sym = e.name == "orbit_embed" || e.name.find(".p1.") != std::string::npos ||
               e.name.find(".p2.") != std::string::npos;
    if (sym) n += e.value.size();
  }
  return n;
}

template <typename T>
Var CsGnn<T>::initial_features(Tape<T>& tape, const PreparedGraph& pg) const {
  const auto& m = pg.marking;
  const int n = pg.product.num_nodes;
  const int rows = pg.product.num_pg_nodes();
  std::vector<int> feat_rows(rows);
  for (int r = 0; r < rows; ++r) feat_rows[r] = pg.graph.node_feat()[r % n];
  Var x = tape.gather_rows(tape.param(node_embed_), std::move(feat_rows));

  switch (cfg_.marking.kind) {
    case MarkingKind::simple:
    case MarkingKind::node_size: {
      std::vector<int> bits(rows);
      for (int r = 0; r < rows; ++r) bits[r] = m.rows[r].member ? 1 : 0;
      x = tape.add(x, tape.gather_rows(tape.param(mark_embed_), std::move(bits)));
      if (cfg_.marking.kind == MarkingKind::node_size) {
        std::vector<int> sizes(rows);
        for (int r = 0; r < rows; ++r) sizes[r] = m.rows[r].size;
        x = tape.add(x, tape.gather_rows(tape.param(size_embed_), std::move(sizes)));
      }
      break;
    }
    case MarkingKind::min_distance: {
      std::vector<int> dist(rows);
      for (int r = 0; r < rows; ++r) dist[r] = m.rows[r].min_distance;
      x = tape.add(x, tape.gather_rows(tape.param(spd_embed_), std::move(dist)));
      break;
    }
    case MarkingKind::learned_distance: {
      // Σ_{u ∈ S} z_{d(v,u)} over the (possibly truncated) distance multiset.
      std::vector<int> dist, owner;
      for (int r = 0; r < rows; ++r)
        for (int dv : m.rows[r].distances) {
          dist.push_back(dv);
          owner.push_back(r);
        }
      Var z = tape.gather_rows(tape.param(spd_embed_), std::move(dist));
      x = tape.add(x, tape.scatter_sum(z, std::move(owner), rows));
      break;
    }
  }
  return x;
}

template <typename T>
Var CsGnn<T>::layer(Tape<T>& tape, Var x, const PreparedGraph& prepared, int t) const {
  const auto& pg = prepared.product;
  const auto& ids = layers_.at(t);

  auto undirected = [&](const std::vector<Arc>& arcs, const std::vector<int>& feats, int table) {
    MessageList msgs;
    std::vector<int> rows;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      msgs.src.push_back(arcs[i].src);
      msgs.dst.push_back(arcs[i].dst);
      rows.push_back(feats[i]);
      msgs.src.push_back(arcs[i].dst);
      msgs.dst.push_back(arcs[i].src);
      rows.push_back(feats[i]);
    }
    Var e = tape.gather_rows(tape.param(table), std::move(rows));
    return std::pair{std::move(msgs), e};
  };
  auto directed = [&](const std::vector<Arc>& arcs, const std::vector<QuadOrbit>& orbits) {
    MessageList msgs;
    std::vector<int> rows;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      msgs.src.push_back(arcs[i].src);
      msgs.dst.push_back(arcs[i].dst);
      rows.push_back(vocab_.row(orbits[i]));
    }
    Var e = tape.gather_rows(tape.param(orbit_embed_), std::move(rows));
    return std::pair{std::move(msgs), e};
  };

  auto [g_msgs, g_feat] = undirected(pg.adj_g, pg.efeat_g, edge_embed_);
  Var total = gine_branch(tape, x, g_msgs, g_feat, bind_branch(tape, ids.g));

  auto [tg_msgs, tg_feat] = undirected(pg.adj_tg, pg.efeat_tg, coarse_edge_embed_);
  total = tape.add(total, gine_branch(tape, x, tg_msgs, tg_feat, bind_branch(tape, ids.tg)));

  if (cfg_.use_equiv_updates) {
    auto [p1_msgs, p1_feat] = directed(pg.adj_p1, pg.orbit_p1);
    total = tape.add(total, gine_branch(tape, x, p1_msgs, p1_feat, bind_branch(tape, ids.p1)));
    auto [p2_msgs, p2_feat] = directed(pg.adj_p2, pg.orbit_p2);
    total = tape.add(total, gine_branch(tape, x, p2_msgs, p2_feat, bind_branch(tape, ids.p2)));
  }

  Var out = apply_mlp(tape, total, bind(tape, ids.fin));
  return cfg_.residual ? tape.add(x, out) : out;
}

template <typename T>
Var CsGnn<T>::pool(Tape<T>& tape, Var x, const PreparedGraph& prepared) const {
  const auto& pg = prepared.product;
  std::vector<int> super(pg.num_pg_nodes());
  for (int r = 0; r < pg.num_pg_nodes(); ++r) super[r] = pg.super_of(r);
  Var per_super = tape.scatter_sum(x, std::move(super), pg.num_supers);
  if (cfg_.pooling == PoolingMode::mean_sum)
    return tape.sum_rows(tape.scale(per_super, T(1) / static_cast<T>(pg.num_nodes)));
  Var inner = apply_mlp(tape, per_super, bind(tape, pool_inner_));
  return apply_mlp(tape, tape.sum_rows(inner), bind(tape, pool_outer_));
}

template <typename T>
Var CsGnn<T>::forward(Tape<T>& tape, const PreparedGraph& pg) const {
  Var x = initial_features(tape, pg);
  for (int t = 0; t < cfg_.num_layers; ++t) x = layer(tape, x, pg, t);
  Var g = pool(tape, x, pg);
  return tape.add(tape.matmul(g, tape.param(head_w_)), tape.param(head_b_));
}

template <typename T>
T CsGnn<T>::predict(const PreparedGraph& pg) const {
  Tape<T> tape(&params_);
  return tape.value(forward(tape, pg))(0, 0);
}

template MlpVars<float> bind(Tape<float>&, const MlpIds&);
template MlpVars<double> bind(Tape<double>&, const MlpIds&);
template Var apply_mlp(Tape<float>&, Var, const MlpVars<float>&);
template Var apply_mlp(Tape<double>&, Var, const MlpVars<double>&);
template Var gine_branch(Tape<float>&, Var, const MessageList&, Var, const BranchVars<float>&);
template Var gine_branch(Tape<double>&, Var, const MessageList&, Var, const BranchVars<double>&);
template class CsGnn<float>;
template class CsGnn<double>;

}  // namespace csgnn
