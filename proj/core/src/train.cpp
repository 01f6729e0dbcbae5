#include "csgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "csgnn/error.hpp"

namespace csgnn {

void Adam::step(ParamStore<float>& params) {
  if (m_.empty()) {
    for (const auto& e : params.entries()) {
      m_.emplace_back(e.value.size(), 0.0);
      v_.emplace_back(e.value.size(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (int p = 0; p < params.size(); ++p) {
    auto& value = params[p].value.data();
    const auto& grad = params[p].grad.data();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      value[i] -= static_cast<float>(lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_));
    }
  }
}

namespace {

// Runs fn(i) for i in [0, count) over up to `threads` workers with a static split.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

bool all_finite(const ParamStore<float>& params) {
  for (const auto& e : params.entries())
    for (float v : e.value.data())
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

double evaluate_mae(const CsGnn<float>& model, const std::vector<PreparedGraph>& data, int threads) {
  require(!data.empty(), "evaluate_mae: empty dataset");
  std::vector<double> err(data.size());
  parallel_for(static_cast<int>(data.size()), threads, [&](int i) {
    err[i] = std::abs(static_cast<double>(model.predict(data[i])) - data[i].target);
  });
  double total = 0.0;
  for (double e : err) total += e;
  return total / static_cast<double>(data.size());
}

TrainResult train(const std::vector<PreparedGraph>& train_set, const std::vector<PreparedGraph>& val_set,
                  const ModelConfig& cfg, const TrainOptions& opts,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  require(!train_set.empty(), "train: empty training set");
  require(opts.epochs >= 1, "train: epochs must be >= 1");
  require(opts.batch_size >= 1, "train: batch_size must be >= 1");
  require(opts.lr > 0.0, "train: lr must be positive");

  CsGnn<float> model(cfg);
  auto& params = model.params();
  Adam adam(opts.lr);
  std::mt19937_64 rng(opts.seed);
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const int batch = static_cast<int>(std::min<std::size_t>(opts.batch_size, order.size() - start));
      std::vector<std::vector<Matrix<float>>> grads(batch);
      std::vector<double> losses(batch);
      parallel_for(batch, opts.threads, [&](int b) {
        const auto& sample = train_set[order[start + b]];
        Tape<float> tape(&params);
        Var pred = model.forward(tape, sample);
        Matrix<float> y(1, 1, static_cast<float>(sample.target));
        Var loss = tape.scale(tape.abs(tape.sub(pred, tape.constant(std::move(y)))), 1.0f / static_cast<float>(batch));
        losses[b] = tape.value(loss)(0, 0);
        tape.backward(loss);
        grads[b].reserve(params.size());
        for (int p = 0; p < params.size(); ++p) grads[b].push_back(tape.param_grad(p));
      });
      for (int b = 0; b < batch; ++b)
        if (!std::isfinite(losses[b]))
          throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                                 std::to_string(order[start + b]));
      params.zero_grad();
      for (int b = 0; b < batch; ++b)
        for (int p = 0; p < params.size(); ++p) {
          auto& acc = params[p].grad.data();
          const auto& g = grads[b][p].data();
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
      adam.step(params);
      if (!all_finite(params))
        throw TrainingDiverged("train: non-finite parameter after epoch " + std::to_string(epoch) + " update");
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_mae = evaluate_mae(model, train_set, opts.threads);
    m.val_mae = val_set.empty() ? std::nan("") : evaluate_mae(model, val_set, opts.threads);
    if (!std::isfinite(m.train_mae))
      throw TrainingDiverged("train: non-finite training MAE at epoch " + std::to_string(epoch));
    result.trace.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.params = std::move(params);
  return result;
}

void write_metrics_csv(const std::vector<EpochMetrics>& trace, std::ostream& out) {
  out << "epoch,split,mae\n";
  char buf[64];
  for (const auto& m : trace) {
    std::snprintf(buf, sizeof buf, "%.9g", m.train_mae);
    out << m.epoch << ",train," << buf << '\n';
    if (!std::isnan(m.val_mae)) {
      std::snprintf(buf, sizeof buf, "%.9g", m.val_mae);
      out << m.epoch << ",val," << buf << '\n';
    }
  }
}

int threads_from_env(int fallback) {
  if (const char* env = std::getenv("CSGNN_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return fallback;
}

}  // namespace csgnn
