#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csgnn/coarsen.hpp"
#include "csgnn/graph.hpp"
#include "csgnn/marking.hpp"
#include "csgnn/product.hpp"
#include "csgnn/tensor.hpp"

namespace csgnn {

enum class PoolingMode { two_mlp, mean_sum };

std::string to_string(PoolingMode mode);
PoolingMode parse_pooling_mode(const std::string& name);

struct ModelConfig {
  int num_layers = 2;
  int hidden_dim = 16;
  MarkingSpec marking;
  CoarseningSpec coarsening;
  bool use_equiv_updates = true;
  PoolingMode pooling = PoolingMode::two_mlp;
  bool residual = false;
  std::uint64_t seed = 0;
  /// Largest graph the embedding tables (SPD, size, orbit) are sized for.
  int max_nodes = 16;
  int node_vocab = 1;
  int edge_vocab = 1;

  void validate() const;
};

/// A graph with its coarsening, product graph and marking precomputed.
struct PreparedGraph {
  Graph graph;
  CoarsePartition coarse;
  ProductGraph product;
  Marking marking;
  double target = 0.0;
};

PreparedGraph prepare(const Graph& g, const ModelConfig& cfg, double target = 0.0);

/// Orbits that can label a p1/p2 message for graphs with at most max_nodes
/// nodes, mapped to dense embedding rows.
class MessageOrbitVocab {
 public:
  explicit MessageOrbitVocab(int max_nodes);
  int size() const noexcept { return static_cast<int>(orbits_.size()); }
  /// Throws ContractViolation for an orbit outside the vocabulary.
  int row(const QuadOrbit& orbit) const;
  const std::vector<QuadOrbit>& orbits() const noexcept { return orbits_; }

 private:
  std::vector<QuadOrbit> orbits_;
  std::unordered_map<std::uint64_t, int> rows_;
};

/// Parameter indices of a one-hidden-layer ReLU MLP: relu(x W1 + b1) W2 + b2.
struct MlpIds {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};

template <typename T>
struct MlpVars {
  Var w1, b1, w2, b2;
};

/// Parameters of one message-passing branch: update MLP, ε and, for the
/// symmetry branches, a message MLP replacing the inner ReLU.
struct BranchIds {
  int eps = -1;
  MlpIds update;
  std::optional<MlpIds> message;
};

template <typename T>
struct BranchVars {
  Var eps;
  MlpVars<T> update;
  std::optional<MlpVars<T>> message;
};

/// Messages src[i] -> dst[i] with per-message edge embedding rows.
struct MessageList {
  std::vector<int> src;
  std::vector<int> dst;
};

template <typename T>
MlpVars<T> bind(Tape<T>& tape, const MlpIds& ids);

template <typename T>
Var apply_mlp(Tape<T>& tape, Var x, const MlpVars<T>& mlp);

/// GINE update: U((1+ε)·x[v] + Σ_{u→v} φ(x[u] + e_{u→v})), with φ = ReLU, or
/// the message MLP when the branch carries one.
template <typename T>
Var gine_branch(Tape<T>& tape, Var x, const MessageList& messages, Var edge_feat, const BranchVars<T>& branch);

template <typename T>
class CsGnn {
 public:
  /// Fresh parameters drawn from cfg.seed.
  explicit CsGnn(ModelConfig cfg);
  /// Adopts existing parameters; names and shapes must match the config.
  CsGnn(ModelConfig cfg, ParamStore<T> params);

  const ModelConfig& config() const noexcept { return cfg_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

  /// Initial product-node features: node embedding plus marking embedding.
  Var initial_features(Tape<T>& tape, const PreparedGraph& pg) const;
  /// One CS-GNN layer.
  Var layer(Tape<T>& tape, Var x, const PreparedGraph& pg, int t) const;
  /// Graph embedding (1 x d).
  Var pool(Tape<T>& tape, Var x, const PreparedGraph& pg) const;
  /// Scalar prediction (1 x 1).
  Var forward(Tape<T>& tape, const PreparedGraph& pg) const;
  T predict(const PreparedGraph& pg) const;

  /// Number of scalars owned by the p1/p2 branches and the orbit embedding.
  std::size_t symmetry_param_count() const;

  const MessageOrbitVocab& orbit_vocab() const noexcept { return vocab_; }

 private:
  void register_params();

  struct LayerIds {
    BranchIds g, tg, p1, p2;
    MlpIds fin;
  };

  ModelConfig cfg_;
  MessageOrbitVocab vocab_;
  ParamStore<T> params_;
  int node_embed_ = -1, edge_embed_ = -1, coarse_edge_embed_ = -1, orbit_embed_ = -1;
  int mark_embed_ = -1, size_embed_ = -1, spd_embed_ = -1;
  std::vector<LayerIds> layers_;
  MlpIds pool_inner_, pool_outer_;
  int head_w_ = -1, head_b_ = -1;
};

extern template class CsGnn<float>;
extern template class CsGnn<double>;

}  // namespace csgnn
