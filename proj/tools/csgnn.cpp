#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "csgnn/checkpoint.hpp"
#include "csgnn/dataset.hpp"
#include "csgnn/error.hpp"
#include "csgnn/gradcheck.hpp"
#include "csgnn/product.hpp"
#include "csgnn/symmetry.hpp"
#include "csgnn/train.hpp"
#include "csgnn/wl.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace csgnn;

namespace {

// Thrown for problems with the command line itself, so main() can tell them
// apart from library errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  int epochs = 100;
  double lr = 1e-3;
  int batch_size = 32;
  int clusters = 2;
  int lap_dim = 2;
  int spd_dim = 0;  // 0: no truncation
  std::string marking = "simple";
  std::string coarsening = "spectral";
  bool equiv_updates = true;
  int layers = 2;
  int hidden_dim = 16;
  std::string pooling = "two_mlp";
  bool residual = false;
  int max_nodes = 0;  // 0: taken from the data
  std::string out = "out";

  // inputs
  std::string data;
  std::string graph;
  int index = 0;
  std::string task = "triangle_count";
  int n_graphs = 200;
  int n_nodes = 8;
  double edge_prob = 0.4;
  std::string checkpoint;
  std::string split = "test";

  // orbits / wl-test
  int n = 0;
  std::string mode = "quad";
  int block_size = 0;
  std::string pair;
  double step = 1e-3;
};

std::ofstream open_out(const Options& o, const std::string& file) {
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const Options& o, const std::string& file, const ordered_json& j) {
  auto out = open_out(o, file);
  out << j.dump(2) << '\n';
}

Graph named_graph(const std::string& name) {
  auto sized = [&](const std::string& prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    try {
      return std::stoi(name.substr(prefix.size()));
    } catch (const std::exception&) {
      throw UsageError("bad graph size in '" + name + "'");
    }
  };
  std::vector<std::pair<int, int>> e;
  if (name == "two-cliques") {
    for (int base : {0, 4})
      for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v) e.emplace_back(base + u, base + v);
    e.emplace_back(3, 4);
    return Graph(8, e);
  }
  if (name == "bridged-c4") return two_c4_bridged();
  if (name == "glued-c5") return two_c5_shared_edge();
  if (auto k = sized("path:")) {
    for (int i = 0; i + 1 < *k; ++i) e.emplace_back(i, i + 1);
    return Graph(*k, e);
  }
  if (auto k = sized("cycle:")) {
    for (int i = 0; i < *k; ++i) e.emplace_back(i, (i + 1) % *k);
    return Graph(*k, e);
  }
  if (auto k = sized("complete:")) {
    for (int u = 0; u < *k; ++u)
      for (int v = u + 1; v < *k; ++v) e.emplace_back(u, v);
    return Graph(*k, e);
  }
  throw UsageError("unknown graph '" + name + "' (try two-cliques, bridged-c4, glued-c5, path:N, cycle:N, complete:N)");
}

Graph input_graph(const Options& o) {
  if (!o.graph.empty() && !o.data.empty()) throw UsageError("give either --graph or --data, not both");
  if (!o.graph.empty()) return named_graph(o.graph);
  if (o.data.empty()) throw UsageError("an input graph is required (--graph NAME or --data FILE [--index I])");
  Dataset ds = load_jsonl(fs::path(o.data));
  if (o.index < 0 || o.index >= static_cast<int>(ds.samples.size()))
    throw UsageError("--index " + std::to_string(o.index) + " is out of range for " + o.data);
  return ds.samples[o.index].graph;
}

CoarseningSpec coarsening_spec(const Options& o) {
  return {parse_coarsening_kind(o.coarsening), o.clusters, o.lap_dim, o.seed};
}

MarkingSpec marking_spec(const Options& o) {
  if (o.spd_dim < 0) throw UsageError("--spd-dim must be >= 0 (0 keeps every distance)");
  return {parse_marking_kind(o.marking), o.spd_dim == 0 ? kNoTruncation : o.spd_dim};
}

ModelConfig model_config(const Options& o, const Dataset& ds) {
  ModelConfig cfg;
  cfg.num_layers = o.layers;
  cfg.hidden_dim = o.hidden_dim;
  cfg.marking = marking_spec(o);
  cfg.coarsening = coarsening_spec(o);
  cfg.use_equiv_updates = o.equiv_updates;
  cfg.pooling = parse_pooling_mode(o.pooling);
  cfg.residual = o.residual;
  cfg.seed = o.seed;
  cfg.max_nodes = o.max_nodes > 0 ? o.max_nodes : std::max(1, ds.max_nodes);
  cfg.node_vocab = ds.node_vocab;
  cfg.edge_vocab = ds.edge_vocab;
  cfg.validate();
  return cfg;
}

ordered_json supers_json(const CoarsePartition& cp) {
  ordered_json supers = ordered_json::array(), edges = ordered_json::array();
  for (const auto& s : cp.super_nodes) supers.push_back(s);
  for (const auto& e : cp.coarse_edges) edges.push_back({e.u, e.v});
  return {{"super_nodes", supers}, {"coarse_edges", edges}};
}

std::string set_string(const std::vector<int>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

int cmd_coarsen(const Options& o) {
  Graph g = input_graph(o);
  CoarsePartition cp = coarsen(g, coarsening_spec(o));
  std::printf("coarsening: %s, %d nodes -> %d super-nodes, %zu coarse edges\n", o.coarsening.c_str(),
              g.num_nodes(), cp.num_supers(), cp.coarse_edges.size());
  for (int s = 0; s < cp.num_supers(); ++s) std::printf("  S%d = %s\n", s, set_string(cp.super_nodes[s]).c_str());
  for (const auto& e : cp.coarse_edges) std::printf("  S%d -- S%d\n", e.u, e.v);
  ordered_json j = supers_json(cp);
  j["num_nodes"] = g.num_nodes();
  j["coarsening"] = o.coarsening;
  write_json(o, "coarsening.json", j);
  return 0;
}

int cmd_build_product(const Options& o) {
  Graph g = input_graph(o);
  CoarsePartition cp = coarsen(g, coarsening_spec(o));
  ProductGraph pg = build_product(g, cp);
  std::printf("product graph: %d x %d = %d nodes\n", pg.num_supers, pg.num_nodes, pg.num_pg_nodes());
  std::printf("  adj_G  %zu undirected\n  adj_TG %zu undirected\n  adj_P1 %zu directed\n  adj_P2 %zu directed\n",
              pg.adj_g.size(), pg.adj_tg.size(), pg.adj_p1.size(), pg.adj_p2.size());
  auto arcs = [](const std::vector<Arc>& list, const std::vector<int>* codes) {
    ordered_json a = ordered_json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      ordered_json row = {list[i].src, list[i].dst};
      if (codes) row.push_back((*codes)[i]);
      a.push_back(row);
    }
    return a;
  };
  ordered_json j = supers_json(cp);
  j["num_nodes"] = pg.num_nodes;
  j["adj_g"] = arcs(pg.adj_g, nullptr);
  j["adj_tg"] = arcs(pg.adj_tg, nullptr);
  j["adj_p1"] = arcs(pg.adj_p1, &pg.code_p1);  // [src, dst, orbit code]
  j["adj_p2"] = arcs(pg.adj_p2, &pg.code_p2);
  write_json(o, "product.json", j);
  return 0;
}

int cmd_orbits(const Options& o) {
  if (o.n < 1 || o.n > 31) throw UsageError("--n must be in [1, 31]");
  if (o.mode != "pair" && o.mode != "quad") throw UsageError("--mode must be pair or quad");
  SetSizeFilter filter;
  if (o.block_size > 0) filter = {o.block_size, o.block_size};
  auto csv = open_out(o, "orbits.csv");
  int count = 0;
  if (o.mode == "pair") {
    csv << "code,k,member\n";
    std::printf("code  |S|  i in S\n");
    for (const auto& p : enumerate_pair_orbits(o.n, filter)) {
      std::printf("%4d  %3d  %s\n", count, p.k, p.member ? "yes" : "no");
      csv << count << ',' << p.k << ',' << p.member << '\n';
      ++count;
    }
  } else {
    csv << "code,distinct,k1,k2,k_cap,i1_in_s1,i2_in_s2,i1_in_s2,i2_in_s1\n";
    std::printf("code  i1!=i2  |S1|  |S2|  |S1&S2|  i1inS1  i2inS2  i1inS2  i2inS1\n");
    for (const auto& q : enumerate_quad_orbits(o.n, filter)) {
      std::printf("%4d  %6d  %4d  %4d  %7d  %6d  %6d  %6d  %6d\n", count, q.distinct, q.k1, q.k2, q.k_cap, q.i1_in_s1,
                  q.i2_in_s2, q.i1_in_s2, q.i2_in_s1);
      csv << count << ',' << q.distinct << ',' << q.k1 << ',' << q.k2 << ',' << q.k_cap << ',' << q.i1_in_s1 << ','
          << q.i2_in_s2 << ',' << q.i1_in_s2 << ',' << q.i2_in_s1 << '\n';
      ++count;
    }
  }
  std::printf("%d %s orbits (n=%d%s)\n", count, o.mode.c_str(), o.n,
              o.block_size > 0 ? (", |S|=" + std::to_string(o.block_size)).c_str() : "");
  if (o.mode == "quad" && o.block_size > 0) {
    ParamCounts c = param_count_comparison(o.n, o.block_size);
    std::printf("pair orbits in the same block: %d; 3-IGN reference: %d\n", c.pair_block, c.reference_3ign);
  }
  return 0;
}

struct NamedPair {
  const char* name;
  Graph (*first)();
  Graph (*second)();
  CoarseningFn coarsening;
  const char* coarsening_name;
};

Graph hexagon() { return named_graph("cycle:6"); }
Graph two_triangles() { return Graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }

const NamedPair kPairs[] = {
    {"fig10", &two_c4_bridged, &two_c5_shared_edge, &degree3_coarsen, "degree3"},
    {"hexagon-triangles", &hexagon, &two_triangles, &node_plus_edge_coarsen, "node_plus_edge"},
};

int cmd_wl_test(const Options& o) {
  const NamedPair* pair = nullptr;
  for (const auto& p : kPairs)
    if (o.pair == p.name) pair = &p;
  if (!pair) {
    std::string names;
    for (const auto& p : kPairs) names += std::string(names.empty() ? "" : ", ") + p.name;
    throw UsageError("unknown pair '" + o.pair + "' (available: " + names + ")");
  }
  Graph g1 = pair->first(), g2 = pair->second();
  const bool raw = wl_distinguishes(to_typed(g1), to_typed(g2));
  const bool sum =
      wl_distinguishes(build_sum_graph(g1, pair->coarsening(g1)), build_sum_graph(g2, pair->coarsening(g2)));
  SeparationResult prod = product_wl_separation(g1, g2, pair->coarsening, {MarkingKind::learned_distance, kNoTruncation},
                                                MarkingView::phi_max);
  auto verdict = [](bool s) { return s ? "separated" : "not separated"; };
  std::printf("sum-graph: %s; product(pi_LD,max): %s (%lld vs %lld)\n", verdict(sum), verdict(prod.separated),
              prod.statistic_1, prod.statistic_2);
  std::printf("raw 1-WL: %s; coarsening: %s\n", verdict(raw), pair->coarsening_name);
  write_json(o, "wl_test.json",
             {{"pair", pair->name},
              {"coarsening", pair->coarsening_name},
              {"raw_wl_separated", raw},
              {"sum_graph_separated", sum},
              {"product_separated", prod.separated},
              {"statistic", {prod.statistic_1, prod.statistic_2}}});
  return 0;
}

int cmd_grad_check(const Options& o) {
  GradCheckReport r = grad_check_seeded(o.seed, o.step);
  const bool ok = r.max_rel_error < 1e-5;
  std::printf("grad-check seed %llu: max relative error %.3e at %s over %zu entries (%zu one-sided, %zu reduced step)\n",
              static_cast<unsigned long long>(o.seed), r.max_rel_error, r.worst_param.c_str(), r.checked, r.one_sided,
              r.step_reduced);
  std::printf("%s (threshold 1e-5)\n", ok ? "ok" : "FAILED");
  write_json(o, "grad_check.json",
             {{"seed", o.seed},
              {"max_rel_error", r.max_rel_error},
              {"worst_param", r.worst_param},
              {"checked", r.checked},
              {"one_sided", r.one_sided},
              {"step_reduced", r.step_reduced}});
  return ok ? 0 : 1;
}

Dataset training_data(const Options& o) {
  Dataset ds = o.data.empty() ? gen_synthetic(parse_synthetic_task(o.task), o.n_graphs, o.n_nodes, o.seed, o.edge_prob)
                              : load_jsonl(fs::path(o.data));
  if (!o.data.empty()) ds.assign_splits(o.seed);
  if (ds.empty()) throw UsageError("dataset is empty");
  return ds;
}

std::vector<PreparedGraph> prepare_split(const Dataset& ds, const std::vector<int>& idx, const ModelConfig& cfg) {
  std::vector<PreparedGraph> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(prepare(ds.samples[i].graph, cfg, ds.samples[i].target));
  return out;
}

int cmd_train(const Options& o) {
  if (o.epochs < 1) throw UsageError("--epochs must be >= 1");
  Dataset ds = training_data(o);
  ModelConfig cfg = model_config(o, ds);
  auto tr = prepare_split(ds, ds.train, cfg), va = prepare_split(ds, ds.val, cfg);
  TrainOptions opts;
  opts.epochs = o.epochs;
  opts.lr = o.lr;
  opts.batch_size = o.batch_size;
  opts.seed = o.seed;
  opts.threads = threads_from_env(1);
  std::printf("training on %zu graphs (%zu val), %zu parameters, %d epochs\n", tr.size(), va.size(),
              CsGnn<float>(cfg).params().num_scalars(), o.epochs);
  TrainResult r = train(tr, va, cfg, opts, [](const EpochMetrics& m) {
    std::printf("epoch %4d  train %.6f  val %.6f\n", m.epoch, m.train_mae, m.val_mae);
    std::fflush(stdout);
  });
  {
    auto csv = open_out(o, "metrics.csv");
    write_metrics_csv(r.trace, csv);
  }
  {
    auto ck = open_out(o, "checkpoint.json");
    save_checkpoint(cfg, r.params, ck);
  }
  CsGnn<float> model(cfg, r.params);
  ordered_json summary = {{"train_graphs", tr.size()},
                          {"val_graphs", va.size()},
                          {"final_train_mae", r.trace.back().train_mae},
                          {"final_val_mae", r.trace.back().val_mae}};
  if (!ds.test.empty()) summary["test_mae"] = evaluate_mae(model, prepare_split(ds, ds.test, cfg), opts.threads);
  write_json(o, "summary.json", summary);
  std::printf("wrote %s/{metrics.csv,checkpoint.json,summary.json}\n", o.out.c_str());
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
  Checkpoint ck = load_checkpoint(fs::path(o.checkpoint));
  Dataset ds = training_data(o);
  const std::vector<int>* idx = nullptr;
  std::vector<int> all(ds.samples.size());
  std::iota(all.begin(), all.end(), 0);
  if (o.split == "train") idx = &ds.train;
  else if (o.split == "val") idx = &ds.val;
  else if (o.split == "test") idx = &ds.test;
  else if (o.split == "all") idx = &all;
  else throw UsageError("--split must be train, val, test or all");
  if (idx->empty()) throw UsageError("split '" + o.split + "' is empty");
  CsGnn<float> model(ck.config, std::move(ck.params));
  const double mae = evaluate_mae(model, prepare_split(ds, *idx, ck.config), threads_from_env(1));
  std::printf("%s MAE over %zu graphs: %.9g\n", o.split.c_str(), idx->size(), mae);
  write_json(o, "eval.json", {{"split", o.split}, {"graphs", idx->size()}, {"mae", mae}});
  return 0;
}

int cmd_gen_data(const Options& o) {
  Dataset ds = gen_synthetic(parse_synthetic_task(o.task), o.n_graphs, o.n_nodes, o.seed, o.edge_prob);
  auto out = open_out(o, "data.jsonl");
  save_jsonl(ds, out);
  std::printf("wrote %zu %s graphs with %d nodes to %s/data.jsonl\n", ds.samples.size(), o.task.c_str(), o.n_nodes,
              o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"csgnn: coarsening-based subgraph GNN toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file; keys are the long option names without dashes")
      ->check(CLI::ExistingFile);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  app.add_option("--seed", o.seed, "Seed for data, coarsening, initialization and shuffling")->capture_default_str();
  app.add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  app.add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "Graphs per optimizer step")->capture_default_str();
  app.add_option("--clusters", o.clusters, "Spectral clusters (bag size T)")->capture_default_str();
  app.add_option("--lap-dim", o.lap_dim, "Laplacian eigenvectors used for clustering")->capture_default_str();
  app.add_option("--spd-dim", o.spd_dim, "Distances kept per (S, v) for learned_distance; 0 keeps all")
      ->capture_default_str();
  app.add_option("--marking", o.marking, "simple | node_size | min_distance | learned_distance")->capture_default_str();
  app.add_option("--coarsening", o.coarsening, "spectral | identity | degree3 | node_plus_edge")->capture_default_str();
  app.add_option("--equiv-updates", o.equiv_updates, "Use the symmetry-based P1/P2 branches (true|false)")
      ->capture_default_str();
  app.add_option("--layers", o.layers, "Message-passing layers")->capture_default_str();
  app.add_option("--hidden-dim", o.hidden_dim, "Hidden width d")->capture_default_str();
  app.add_option("--pooling", o.pooling, "two_mlp | mean_sum")->capture_default_str();
  app.add_option("--residual", o.residual, "Residual connection around each layer (true|false)")->capture_default_str();
  app.add_option("--max-nodes", o.max_nodes, "Largest graph size the model supports; 0 takes it from the data")
      ->capture_default_str();
  app.add_option("--out", o.out, "Output directory for CSV/JSON artifacts")->capture_default_str();
  app.add_option("--data", o.data, "JSONL dataset")->check(CLI::ExistingFile);
  app.add_option("--task", o.task, "Synthetic task when --data is absent: triangle_count | diameter | constant")
      ->capture_default_str();
  app.add_option("--n-graphs", o.n_graphs, "Synthetic dataset size")->capture_default_str();
  app.add_option("--n-nodes", o.n_nodes, "Nodes per synthetic graph")->capture_default_str();
  app.add_option("--edge-prob", o.edge_prob, "Edge probability for synthetic graphs")->capture_default_str();

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  auto add_graph_input = [&](CLI::App* s) {
    s->add_option("--graph", o.graph, "Named graph: two-cliques, bridged-c4, glued-c5, path:N, cycle:N, complete:N");
    s->add_option("--index", o.index, "Sample index when reading --data")->capture_default_str();
  };

  CLI::App* coarsen_cmd = sub("coarsen", "Coarsen one graph and print its super-nodes");
  add_graph_input(coarsen_cmd);
  CLI::App* product_cmd = sub("build-product", "Build the coarse product graph of one graph");
  add_graph_input(product_cmd);
  CLI::App* orbits_cmd = sub("orbits", "Print the orbit table of (S,i) pairs or (S1,i1,S2,i2) quadruples");
  orbits_cmd->add_option("--n", o.n, "Number of nodes")->required();
  orbits_cmd->add_option("--mode", o.mode, "pair | quad")->capture_default_str();
  orbits_cmd->add_option("--block-size", o.block_size, "Restrict to sets of this size; 0 for all")
      ->capture_default_str();
  CLI::App* wl_cmd = sub("wl-test", "Run a named 1-WL separation experiment");
  wl_cmd->add_option("--pair", o.pair, "fig10 | hexagon-triangles")->required();
  CLI::App* grad_cmd = sub("grad-check", "Compare reverse-mode gradients with finite differences");
  grad_cmd->add_option("--step", o.step, "Finite-difference step")->capture_default_str();
  CLI::App* train_cmd = sub("train", "Train on --data or a synthetic task; writes metrics.csv and checkpoint.json");
  CLI::App* eval_cmd = sub("eval", "Evaluate a checkpoint on a dataset split");
  eval_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON from train")->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", o.split, "train | val | test | all")->capture_default_str();
  CLI::App* gen_cmd = sub("gen-data", "Write a synthetic JSONL dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ConfigError& e) {
    std::cerr << "error: bad config file entry: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: missing or invalid file: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ExtrasError& e) {
    std::cerr << "error: unknown flag: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (coarsen_cmd->parsed()) return cmd_coarsen(o);
    if (product_cmd->parsed()) return cmd_build_product(o);
    if (orbits_cmd->parsed()) return cmd_orbits(o);
    if (wl_cmd->parsed()) return cmd_wl_test(o);
    if (grad_cmd->parsed()) return cmd_grad_check(o);
    if (train_cmd->parsed()) return cmd_train(o);
    if (eval_cmd->parsed()) return cmd_eval(o);
    if (gen_cmd->parsed()) return cmd_gen_data(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const csgnn::ParseError& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return 3;
  } catch (const SchemaError& e) {
    std::cerr << "error: schema violation: " << e.what() << '\n';
    return 3;
  } catch (const ContractViolation& e) {
    std::cerr << "error: invalid argument: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
