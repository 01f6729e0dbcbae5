#include "csgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "csgnn/error.hpp"

namespace csgnn {

namespace {

struct Probe {
  double value;
  std::vector<signed char> pattern;
};

Probe evaluate(const CsGnn<double>& model, const PreparedGraph& graph) {
  Tape<double> tape(&model.params());
  Var out = model.forward(tape, graph);
  return {tape.value(out)(0, 0), tape.kink_pattern()};
}

}  // namespace

GradCheckReport grad_check(const CsGnn<double>& model, const PreparedGraph& graph, double h, double floor) {
  require(h > 0.0, "grad_check: step must be positive");
  CsGnn<double> probe(model.config(), model.params());
  auto& params = probe.params();

  Tape<double> tape(&params);
  Var out = probe.forward(tape, graph);
  const double f0 = tape.value(out)(0, 0);
  const auto base = tape.kink_pattern();
  tape.backward(out);

  GradCheckReport report;
  for (int p = 0; p < params.size(); ++p) {
    const Matrix<double> analytic = tape.param_grad(p);
    auto& data = params[p].value.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      double numeric = 0.0;
      for (double step = h;; step /= 10.0) {
        data[i] = saved + step;
        Probe up = evaluate(probe, graph);
        data[i] = saved - step;
        Probe down = evaluate(probe, graph);
        data[i] = saved;
        const bool up_ok = up.pattern == base, down_ok = down.pattern == base;
        if (up_ok && down_ok) {
          numeric = (up.value - down.value) / (2.0 * step);
        } else if (up_ok || down_ok) {
          numeric = up_ok ? (up.value - f0) / step : (f0 - down.value) / step;
          ++report.one_sided;
        } else if (step > h * 1e-6) {
          continue;
        } else {
          numeric = (up.value - down.value) / (2.0 * step);  // no kink-free side found; plain central
        }
        if (step < h) ++report.step_reduced;
        break;
      }
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++report.checked;
      if (report.worst_param.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = params[p].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

GradCheckReport grad_check_seeded(std::uint64_t seed, double h) {
  std::mt19937_64 rng(seed);
  const int n = 6;
  Graph g;
  // connected random graph with two node and two edge feature values
  for (;;) {
    std::bernoulli_distribution coin(0.45);
    std::uniform_int_distribution<int> feat(0, 1);
    std::vector<std::pair<int, int>> edges;
    std::vector<int> ef;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (coin(rng)) {
          edges.emplace_back(u, v);
          ef.push_back(feat(rng));
        }
    std::vector<int> nf(n);
    for (int& f : nf) f = feat(rng);
    g = Graph(n, std::move(edges), std::move(nf), std::move(ef));
    if (connected_components(g).size() == 1) break;
  }

  ModelConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 4;
  cfg.marking = {MarkingKind::learned_distance, 3};
  cfg.coarsening = {CoarseningKind::spectral, 3, 2, seed};
  cfg.max_nodes = n;
  cfg.node_vocab = 2;
  cfg.edge_vocab = 2;
  cfg.seed = seed;
  cfg.residual = true;
  CsGnn<double> model(cfg);
  return grad_check(model, prepare(g, cfg), h);
}

}  // namespace csgnn
