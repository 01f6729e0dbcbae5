#pragma once

#include <cstdint>
#include <string>

#include "csgnn/model.hpp"

namespace csgnn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;      // "name[flat index]" of the worst entry
  std::size_t checked = 0;      // scalar entries compared
  std::size_t one_sided = 0;    // entries whose reference used a one-sided difference
  std::size_t step_reduced = 0; // entries that needed a smaller step
};

/// Compares reverse-mode gradients of the f64 prediction against finite
/// differences over every scalar parameter of the model.
///
/// The prediction is piecewise linear in any single parameter, so a central
/// difference with step h is exact unless x ± h lands on another linear piece
/// (a relu input changes sign). The relu/abs sign pattern at x ± h detects
/// this. When only one side changes, the one-sided difference on the other
/// side is used; when both change, the step is divided by 10 until one side
/// stays on the piece of x.
/// Relative error is |a - b| / max(|a|, |b|, floor).
GradCheckReport grad_check(const CsGnn<double>& model, const PreparedGraph& graph, double h = 1e-3,
                           double floor = 1e-6);

/// The standard check: a seeded 6-node graph and a small seeded model using
/// every branch.
GradCheckReport grad_check_seeded(std::uint64_t seed, double h = 1e-3);

}  // namespace csgnn
