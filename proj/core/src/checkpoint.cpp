#include "csgnn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "csgnn/error.hpp"

namespace csgnn {

using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "csgnn-checkpoint";
constexpr int kVersion = 1;

ordered_json config_to_json(const ModelConfig& c) {
  ordered_json j;
  j["num_layers"] = c.num_layers;
  j["hidden_dim"] = c.hidden_dim;
  j["marking"] = to_string(c.marking.kind);
  j["spd_dim"] = c.marking.spd_dim == kNoTruncation ? -1 : c.marking.spd_dim;
  j["coarsening"] = to_string(c.coarsening.kind);
  j["clusters"] = c.coarsening.num_clusters;
  j["lap_dim"] = c.coarsening.lap_dim;
  j["coarsen_seed"] = c.coarsening.seed;
  j["equiv_updates"] = c.use_equiv_updates;
  j["pooling"] = to_string(c.pooling);
  j["residual"] = c.residual;
  j["seed"] = c.seed;
  j["max_nodes"] = c.max_nodes;
  j["node_vocab"] = c.node_vocab;
  j["edge_vocab"] = c.edge_vocab;
  return j;
}

ModelConfig config_from_json(const ordered_json& j) {
  ModelConfig c;
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.marking.kind = parse_marking_kind(j.at("marking").get<std::string>());
  int spd_dim = j.at("spd_dim").get<int>();
  c.marking.spd_dim = spd_dim < 0 ? kNoTruncation : spd_dim;
  c.coarsening.kind = parse_coarsening_kind(j.at("coarsening").get<std::string>());
  c.coarsening.num_clusters = j.at("clusters").get<int>();
  c.coarsening.lap_dim = j.at("lap_dim").get<int>();
  c.coarsening.seed = j.at("coarsen_seed").get<std::uint64_t>();
  c.use_equiv_updates = j.at("equiv_updates").get<bool>();
  c.pooling = parse_pooling_mode(j.at("pooling").get<std::string>());
  c.residual = j.at("residual").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_nodes = j.at("max_nodes").get<int>();
  c.node_vocab = j.at("node_vocab").get<int>();
  c.edge_vocab = j.at("edge_vocab").get<int>();
  c.validate();
  return c;
}

}  // namespace

void save_checkpoint(const ModelConfig& cfg, const ParamStore<float>& params, std::ostream& out) {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["config"] = config_to_json(cfg);
  ordered_json list = ordered_json::array();
  for (const auto& e : params.entries()) {
    ordered_json p;
    p["name"] = e.name;
    p["rows"] = e.value.rows();
    p["cols"] = e.value.cols();
    p["data"] = e.value.data();
    list.push_back(std::move(p));
  }
  j["params"] = std::move(list);
  out << j.dump() << '\n';
}

void save_checkpoint(const ModelConfig& cfg, const ParamStore<float>& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  save_checkpoint(cfg, params, out);
}

Checkpoint load_checkpoint(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 0);
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw SchemaError("checkpoint: unexpected format tag");
    if (j.at("version").get<int>() != kVersion) throw SchemaError("checkpoint: unsupported version");
    Checkpoint ck;
    ck.config = config_from_json(j.at("config"));
    for (const auto& p : j.at("params")) {
      const int rows = p.at("rows").get<int>();
      const int cols = p.at("cols").get<int>();
      auto data = p.at("data").get<std::vector<float>>();
      if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows) * cols)
        throw SchemaError("checkpoint: parameter '" + p.at("name").get<std::string>() + "' has inconsistent shape");
      Matrix<float> m(rows, cols);
      m.data() = std::move(data);
      ck.params.add(p.at("name").get<std::string>(), std::move(m));
    }
    return ck;
  } catch (const ordered_json::exception& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace csgnn
