#pragma once

#include <filesystem>
#include <iosfwd>

#include "csgnn/model.hpp"

namespace csgnn {

/// JSON checkpoint, version 1:
///
///   {
///     "format": "csgnn-checkpoint",
///     "version": 1,
///     "config": { "num_layers", "hidden_dim", "marking", "spd_dim", "coarsening",
///                 "clusters", "lap_dim", "coarsen_seed", "equiv_updates", "pooling",
///                 "residual", "seed", "max_nodes", "node_vocab", "edge_vocab" },
///     "params": [ { "name", "rows", "cols", "data": [row-major values] }, ... ]
///   }
///
/// "params" follows the model's registration order. spd_dim is -1 for no truncation.
struct Checkpoint {
  ModelConfig config;
  ParamStore<float> params;
};

void save_checkpoint(const ModelConfig& cfg, const ParamStore<float>& params, std::ostream& out);
void save_checkpoint(const ModelConfig& cfg, const ParamStore<float>& params, const std::filesystem::path& path);
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace csgnn
