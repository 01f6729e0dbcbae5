#include "csgnn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "csgnn/error.hpp"

namespace csgnn {

using nlohmann::json;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

void Dataset::refresh_metadata() {
  node_vocab = 1;
  edge_vocab = 1;
  max_nodes = 0;
  for (const auto& s : samples) {
    max_nodes = std::max(max_nodes, s.graph.num_nodes());
    for (int f : s.graph.node_feat()) node_vocab = std::max(node_vocab, f + 1);
    for (int f : s.graph.edge_feat()) edge_vocab = std::max(edge_vocab, f + 1);
  }
}

void Dataset::assign_splits(std::uint64_t seed) {
  train.clear();
  val.clear();
  test.clear();
  const int n = static_cast<int>(samples.size());
  bool in_file = n > 0 && std::all_of(samples.begin(), samples.end(), [](const Sample& s) { return s.split.has_value(); });
  if (in_file) {
    for (int i = 0; i < n; ++i) {
      switch (*samples[i].split) {
        case Split::train: train.push_back(i); break;
        case Split::val: val.push_back(i); break;
        case Split::test: test.push_back(i); break;
      }
    }
    return;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = n * 8 / 10;
  const int n_val = n / 10;
  train.assign(order.begin(), order.begin() + n_train);
  val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  test.assign(order.begin() + n_train + n_val, order.end());
  for (auto* part : {&train, &val, &test}) std::sort(part->begin(), part->end());
}

namespace {

Sample parse_line(const std::string& line, int lineno, int max_feature_id) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);
  for (const char* key : {"n", "edges", "y"})
    if (!obj.contains(key)) throw ParseError(std::string("missing key '") + key + "'", lineno);

  try {
    const int n = obj.at("n").get<int>();
    if (n < 0) throw ParseError("'n' must be non-negative", lineno);
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : obj.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("each edge must be [u, v]", lineno);
      int u = e[0].get<int>();
      int v = e[1].get<int>();
      if (u >= v) throw ParseError("edges must satisfy u < v", lineno);
      edges.emplace_back(u, v);
    }
    std::vector<int> nf = obj.contains("nf") ? obj.at("nf").get<std::vector<int>>() : std::vector<int>(n, 0);
    std::vector<int> ef = obj.contains("ef") ? obj.at("ef").get<std::vector<int>>() : std::vector<int>(edges.size(), 0);
    if (static_cast<int>(nf.size()) != n) throw ParseError("'nf' length must equal n", lineno);
    if (ef.size() != edges.size()) throw ParseError("'ef' length must equal edge count", lineno);
    for (int f : nf)
      if (f < 0 || f >= max_feature_id)
        throw SchemaError("line " + std::to_string(lineno) + ": node feature id " + std::to_string(f) + " out of range");
    for (int f : ef)
      if (f < 0 || f >= max_feature_id)
        throw SchemaError("line " + std::to_string(lineno) + ": edge feature id " + std::to_string(f) + " out of range");

    Sample s;
    try {
      s.graph = Graph(n, std::move(edges), std::move(nf), std::move(ef));
    } catch (const ContractViolation& e) {
      throw ParseError(e.what(), lineno);
    }
    s.target = obj.at("y").get<double>();
    if (obj.contains("split")) {
      const auto name = obj.at("split").get<std::string>();
      if (name == "train") s.split = Split::train;
      else if (name == "val" || name == "valid") s.split = Split::val;
      else if (name == "test") s.split = Split::test;
      else throw ParseError("unknown split '" + name + "'", lineno);
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("wrong field type: ") + e.what(), lineno);
  }
}

}  // namespace

Dataset load_jsonl(std::istream& in, const std::string& name, int max_feature_id) {
  Dataset ds;
  ds.name = name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    ds.samples.push_back(parse_line(line, lineno, max_feature_id));
  }
  ds.refresh_metadata();
  ds.assign_splits(0);
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path, int max_feature_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path.string() + "'");
  return load_jsonl(in, path.stem().string(), max_feature_id);
}

void save_jsonl(const Dataset& ds, std::ostream& out) {
  for (const auto& s : ds.samples) {
    json obj;
    obj["n"] = s.graph.num_nodes();
    json edges = json::array();
    for (const auto& e : s.graph.edges()) edges.push_back({e.u, e.v});
    obj["edges"] = std::move(edges);
    obj["nf"] = s.graph.node_feat();
    obj["ef"] = s.graph.edge_feat();
    obj["y"] = s.target;
    if (s.split) obj["split"] = to_string(*s.split);
    out << obj.dump() << '\n';
  }
}

void save_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file '" + path.string() + "'");
  save_jsonl(ds, out);
}

std::string to_string(SyntheticTask task) {
  switch (task) {
    case SyntheticTask::triangle_count: return "triangle_count";
    case SyntheticTask::diameter: return "diameter";
    case SyntheticTask::constant: return "constant";
  }
  return "?";
}

SyntheticTask parse_synthetic_task(const std::string& name) {
  if (name == "triangle_count" || name == "triangles") return SyntheticTask::triangle_count;
  if (name == "diameter") return SyntheticTask::diameter;
  if (name == "constant") return SyntheticTask::constant;
  throw ContractViolation("unknown synthetic task '" + name + "'");
}

long long count_triangles(const Graph& g) {
  long long count = 0;
  for (const auto& e : g.edges())
    for (int w : g.neighbors(e.v))
      if (w > e.v && g.has_edge(e.u, w)) ++count;
  return count;
}

int diameter(const Graph& g) {
  SpdMatrix spd = all_pairs_spd(g);
  int best = 0;
  for (int u = 0; u < g.num_nodes(); ++u)
    for (int v = 0; v < g.num_nodes(); ++v)
      if (spd(u, v) != spd.unreachable()) best = std::max(best, spd(u, v));
  return best;
}

Dataset gen_synthetic(SyntheticTask task, int n_graphs, int n_nodes, std::uint64_t seed, double edge_prob) {
  require(n_graphs >= 0 && n_nodes >= 1, "gen_synthetic: counts must be positive");
  require(edge_prob > 0.0 && edge_prob <= 1.0, "gen_synthetic: edge_prob must be in (0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(edge_prob);
  Dataset ds;
  ds.name = to_string(task);
  for (int i = 0; i < n_graphs; ++i) {
    Graph g;
    do {
      std::vector<std::pair<int, int>> edges;
      for (int u = 0; u < n_nodes; ++u)
        for (int v = u + 1; v < n_nodes; ++v)
          if (coin(rng)) edges.emplace_back(u, v);
      g = Graph(n_nodes, std::move(edges));
    } while (connected_components(g).size() != 1);
    Sample s;
    switch (task) {
      case SyntheticTask::triangle_count: s.target = static_cast<double>(count_triangles(g)); break;
      case SyntheticTask::diameter: s.target = diameter(g); break;
      case SyntheticTask::constant: s.target = 1.0; break;
    }
    s.graph = std::move(g);
    ds.samples.push_back(std::move(s));
  }
  ds.refresh_metadata();
  ds.assign_splits(seed);
  return ds;
}

}  // namespace csgnn
