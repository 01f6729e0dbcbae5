#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csgnn/graph.hpp"

namespace csgnn {

enum class Split { train, val, test };

std::string to_string(Split split);

struct Sample {
  Graph graph;
  double target = 0.0;
  std::optional<Split> split;  // set when the file names one
};

struct Dataset {
  std::string name;
  std::vector<Sample> samples;
  std::vector<int> train, val, test;  // indices into samples
  int node_vocab = 1;                 // max node feature id + 1
  int edge_vocab = 1;                 // max edge feature id + 1
  int max_nodes = 0;

  bool empty() const noexcept { return samples.empty(); }
  /// Recomputes vocab sizes and max_nodes from the samples.
  void refresh_metadata();
  /// Uses per-sample splits when every sample has one, otherwise a seeded
  /// 80/10/10 shuffle.
  void assign_splits(std::uint64_t seed);
};

/// One JSON object per line:
///   {"n": int, "edges": [[u,v],...], "nf": [int,...], "ef": [int,...], "y": float}
/// with optional "split": "train" | "val" | "test". Blank lines are skipped.
/// Malformed lines raise ParseError carrying the line number; feature ids at or
/// above max_feature_id raise SchemaError.
Dataset load_jsonl(std::istream& in, const std::string& name = "dataset", int max_feature_id = 1 << 20);
Dataset load_jsonl(const std::filesystem::path& path, int max_feature_id = 1 << 20);

void save_jsonl(const Dataset& ds, std::ostream& out);
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);

enum class SyntheticTask { triangle_count, diameter, constant };

std::string to_string(SyntheticTask task);
SyntheticTask parse_synthetic_task(const std::string& name);

/// Connected Erdős–Rényi-style graphs (edge probability edge_prob, resampled
/// until connected) with exact brute-force targets. Splits are assigned by
/// assign_splits(seed).
Dataset gen_synthetic(SyntheticTask task, int n_graphs, int n_nodes, std::uint64_t seed, double edge_prob = 0.4);

long long count_triangles(const Graph& g);
/// Largest finite hop distance.
int diameter(const Graph& g);

}  // namespace csgnn
