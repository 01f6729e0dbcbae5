#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "csgnn/model.hpp"

namespace csgnn {

struct TrainOptions {
  int epochs = 100;
  double lr = 1e-3;
  int batch_size = 32;
  /// Worker threads for the per-batch forward/backward passes. Results do not
  /// depend on this value: per-graph gradients are reduced in sample order.
  int threads = 1;
  std::uint64_t seed = 0;  // shuffling order
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_mae = 0.0;
  double val_mae = 0.0;
};

struct TrainResult {
  ParamStore<float> params;
  std::vector<EpochMetrics> trace;
};

/// Adam on float parameters.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParamStore<float>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Mean absolute error of model predictions.
double evaluate_mae(const CsGnn<float>& model, const std::vector<PreparedGraph>& data, int threads = 1);

/// L1-loss training with Adam. Throws ContractViolation on an empty training
/// set and TrainingDiverged when a loss or parameter turns non-finite.
/// on_epoch, when set, is called after every epoch.
TrainResult train(const std::vector<PreparedGraph>& train_set, const std::vector<PreparedGraph>& val_set,
                  const ModelConfig& cfg, const TrainOptions& opts,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Writes "epoch,split,mae" rows for the trace.
void write_metrics_csv(const std::vector<EpochMetrics>& trace, std::ostream& out);

/// CSGNN_THREADS if set to a positive integer, otherwise fallback.
int threads_from_env(int fallback = 1);

}  // namespace csgnn
