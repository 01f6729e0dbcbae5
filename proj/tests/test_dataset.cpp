#include <doctest.h>

#include <random>
#include <sstream>

#include "csgnn/checkpoint.hpp"
#include "csgnn/dataset.hpp"
#include "csgnn/error.hpp"
#include "support/test_graphs.hpp"

using namespace csgnn;
using namespace csgnn::testing;

namespace {

long long triangles_by_triple_loop(const Graph& g) {
  long long t = 0;
  for (int a = 0; a < g.num_nodes(); ++a)
    for (int b = a + 1; b < g.num_nodes(); ++b)
      for (int c = b + 1; c < g.num_nodes(); ++c) t += g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c);
  return t;
}

int parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    load_jsonl(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("loads the documented schema") {
    std::istringstream in(
        R"({"n": 3, "edges": [[0,1],[1,2]], "nf": [0,2,1], "ef": [1,0], "y": 1.5})"
        "\n\n"
        R"({"n": 2, "edges": [[0,1]], "nf": [0,0], "ef": [3], "y": -2, "split": "val"})"
        "\n");
    Dataset ds = load_jsonl(in, "tiny");
    REQUIRE(ds.samples.size() == 2);
    CHECK(ds.samples[0].graph.num_nodes() == 3);
    CHECK(ds.samples[0].graph.node_feat() == std::vector<int>{0, 2, 1});
    CHECK(ds.samples[0].target == 1.5);
    CHECK_FALSE(ds.samples[0].split.has_value());
    CHECK(ds.samples[1].split == Split::val);
    CHECK(ds.node_vocab == 3);
    CHECK(ds.edge_vocab == 4);
    CHECK(ds.max_nodes == 3);
  }

  TEST_CASE("malformed lines report their line number") {
    CHECK(parse_error_line("{\"n\": 2, \"edges\": [[0,1]], \"nf\": [0,0], \"ef\": [0], \"y\": 1}\nnot json\n") == 2);
    CHECK(parse_error_line("{\"n\": 2, \"edges\": [[1,0]], \"nf\": [0,0], \"ef\": [0], \"y\": 1}\n") == 1);
    CHECK(parse_error_line("\n\n{\"n\": 2, \"edges\": [[0,1]], \"nf\": [0], \"ef\": [0], \"y\": 1}\n") == 3);
    CHECK(parse_error_line("{\"n\": 2, \"edges\": [[0,1]], \"nf\": [0,0], \"ef\": [], \"y\": 1}\n") == 1);
    CHECK(parse_error_line("{\"n\": 2, \"edges\": [[0,1]], \"nf\": [0,0], \"ef\": [0]}\n") == 1);
    CHECK(parse_error_line("{\"n\": 2, \"edges\": [[0,1]], \"nf\": [0,0], \"ef\": [0], \"y\": 1, \"split\": \"x\"}\n") == 1);
    std::istringstream big("{\"n\": 1, \"edges\": [], \"nf\": [50], \"ef\": [], \"y\": 0}\n");
    CHECK_THROWS_AS(load_jsonl(big, "big", 10), SchemaError);
  }

  TEST_CASE("save and load round trip") {
    Dataset ds = gen_synthetic(SyntheticTask::triangle_count, 12, 6, 5);
    std::stringstream buf;
    save_jsonl(ds, buf);
    Dataset back = load_jsonl(buf, ds.name);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      CHECK(back.samples[i].graph == ds.samples[i].graph);
      CHECK(back.samples[i].target == ds.samples[i].target);
    }
  }

  TEST_CASE("synthetic targets match brute force") {
    CHECK(count_triangles(complete_graph(4)) == 4);
    CHECK(diameter(path_graph(5)) == 4);
    CHECK(diameter(cycle_graph(7)) == 3);
    Dataset tri = gen_synthetic(SyntheticTask::triangle_count, 40, 8, 17);
    for (const auto& s : tri.samples) {
      REQUIRE(connected_components(s.graph).size() == 1);
      REQUIRE(s.target == static_cast<double>(triangles_by_triple_loop(s.graph)));
    }
    Dataset dia = gen_synthetic(SyntheticTask::diameter, 40, 7, 19);
    for (const auto& s : dia.samples) {
      SpdMatrix spd = all_pairs_spd(s.graph);
      int want = 0;
      for (int u = 0; u < 7; ++u)
        for (int v = 0; v < 7; ++v) want = std::max(want, spd(u, v));
      REQUIRE(s.target == want);
    }
  }

  TEST_CASE("generation is seed-deterministic and splits cover the data") {
    Dataset a = gen_synthetic(SyntheticTask::triangle_count, 50, 8, 23);
    Dataset b = gen_synthetic(SyntheticTask::triangle_count, 50, 8, 23);
    Dataset c = gen_synthetic(SyntheticTask::triangle_count, 50, 8, 24);
    std::stringstream sa, sb, sc;
    save_jsonl(a, sa);
    save_jsonl(b, sb);
    save_jsonl(c, sc);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
    CHECK(a.train == b.train);
    CHECK(a.train.size() == 40);
    CHECK(a.val.size() == 5);
    CHECK(a.test.size() == 5);
    std::vector<int> all;
    for (const auto* part : {&a.train, &a.val, &a.test}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 50; ++i) CHECK(all[i] == i);
  }

  TEST_CASE("in-file splits take precedence") {
    std::istringstream in(
        "{\"n\": 1, \"edges\": [], \"nf\": [0], \"ef\": [], \"y\": 0, \"split\": \"test\"}\n"
        "{\"n\": 1, \"edges\": [], \"nf\": [0], \"ef\": [], \"y\": 1, \"split\": \"train\"}\n");
    Dataset ds = load_jsonl(in);
    ds.assign_splits(99);
    CHECK(ds.train == std::vector<int>{1});
    CHECK(ds.test == std::vector<int>{0});
    CHECK(ds.val.empty());
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip keeps config and parameters bit-exact") {
    ModelConfig cfg;
    cfg.hidden_dim = 4;
    cfg.max_nodes = 6;
    cfg.marking = {MarkingKind::learned_distance, 3};
    cfg.coarsening = {CoarseningKind::node_plus_edge, 4, 3, 77};
    cfg.pooling = PoolingMode::mean_sum;
    cfg.residual = true;
    cfg.seed = 1234567890123ULL;
    cfg.node_vocab = 3;
    CsGnn<float> model(cfg);
    std::stringstream buf;
    save_checkpoint(cfg, model.params(), buf);
    Checkpoint ck = load_checkpoint(buf);
    CHECK(ck.config.hidden_dim == 4);
    CHECK(ck.config.marking.kind == MarkingKind::learned_distance);
    CHECK(ck.config.marking.spd_dim == 3);
    CHECK(ck.config.coarsening.kind == CoarseningKind::node_plus_edge);
    CHECK(ck.config.coarsening.seed == 77);
    CHECK(ck.config.pooling == PoolingMode::mean_sum);
    CHECK(ck.config.residual);
    CHECK(ck.config.seed == cfg.seed);
    REQUIRE(ck.params.size() == model.params().size());
    for (int i = 0; i < ck.params.size(); ++i) {
      CHECK(ck.params[i].name == model.params()[i].name);
      CHECK(ck.params[i].value == model.params()[i].value);
    }
    CsGnn<float> restored(ck.config, std::move(ck.params));
    PreparedGraph pg = prepare(cycle_graph(6), cfg);
    CHECK(restored.predict(pg) == model.predict(pg));
  }

  TEST_CASE("rejects foreign documents") {
    std::istringstream wrong("{\"format\": \"other\", \"version\": 1}");
    CHECK_THROWS(load_checkpoint(wrong));
    std::istringstream garbage("not json");
    CHECK_THROWS(load_checkpoint(garbage));
  }
}
