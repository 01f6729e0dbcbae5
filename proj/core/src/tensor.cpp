#include "csgnn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "csgnn/error.hpp"

namespace csgnn {

template <typename T>
int ParamStore<T>::add(std::string name, Matrix<T> init) {
  require(!index_.contains(name), "ParamStore: duplicate parameter '" + name + "'");
  int idx = static_cast<int>(entries_.size());
  index_.emplace(name, idx);
  Matrix<T> grad(init.rows(), init.cols());
  entries_.push_back({std::move(name), std::move(init), std::move(grad)});
  return idx;
}

template <typename T>
int ParamStore<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

template <typename T>
std::size_t ParamStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& e : entries_) e.grad.fill(T(0));
}

namespace {

// Adds values in ascending order so the result does not depend on input order.
template <typename T>
T ordered_sum(std::vector<T>& vals) {
  if (vals.size() > 1) std::sort(vals.begin(), vals.end());
  T acc = T(0);
  for (T v : vals) acc += v;
  return acc;
}

}  // namespace

template <typename T>
Var Tape<T>::push(Matrix<T> value, bool needs_grad, std::function<void(Tape&, int)> backprop) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  if (needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Matrix<T>& Tape<T>::grad_slot(int id) {
  auto& node = nodes_[id];
  if (node.grad.size() != node.value.size() || node.grad.rows() != node.value.rows())
    node.grad = Matrix<T>(node.value.rows(), node.value.cols());
  return node.grad;
}

template <typename T>
Var Tape<T>::constant(Matrix<T> value) {
  return push(std::move(value), false, {});
}

template <typename T>
Var Tape<T>::param(int index) {
  require(params_ != nullptr && index >= 0 && index < params_->size(), "Tape::param: unknown parameter");
  Var v = push((*params_)[index].value, true, [](Tape&, int) {});
  nodes_[v.id].param = index;
  return v;
}

template <typename T>
Var Tape<T>::matmul(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  require(x.cols() == y.rows(), "Tape::matmul: shape mismatch");
  Matrix<T> out(x.rows(), y.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < x.cols(); ++k) {
      T xik = x(i, k);
      if (xik == T(0)) continue;
      for (int j = 0; j < y.cols(); ++j) out(i, j) += xik * y(k, j);
    }
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad;
    const auto& x = t.value(a);
    const auto& y = t.value(b);
    if (t.needs(a)) {
      auto& ga = t.grad_slot(a.id);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) {
          T gij = g(i, j);
          if (gij == T(0)) continue;
          for (int k = 0; k < x.cols(); ++k) ga(i, k) += gij * y(k, j);
        }
    }
    if (t.needs(b)) {
      auto& gb = t.grad_slot(b.id);
      for (int i = 0; i < g.rows(); ++i)
        for (int k = 0; k < x.cols(); ++k) {
          T xik = x(i, k);
          if (xik == T(0)) continue;
          for (int j = 0; j < g.cols(); ++j) gb(k, j) += xik * g(i, j);
        }
    }
  });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(), "Tape::add: shape mismatch");
  Matrix<T> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += y.data()[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    for (Var in : {a, b}) {
      if (!t.needs(in)) continue;
      auto& gi = t.grad_slot(in.id).data();
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(), "Tape::sub: shape mismatch");
  Matrix<T> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= y.data()[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    if (t.needs(a)) {
      auto& ga = t.grad_slot(a.id).data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs(b)) {
      auto& gb = t.grad_slot(b.id).data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var Tape<T>::add_row(Var a, Var row) {
  const auto& x = value(a);
  const auto& r = value(row);
  require(r.rows() == 1 && r.cols() == x.cols(), "Tape::add_row: shape mismatch");
  Matrix<T> out = x;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) += r(0, j);
  return push(std::move(out), needs(a) || needs(row), [a, row](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad;
    if (t.needs(a)) {
      auto& ga = t.grad_slot(a.id).data();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g.data()[i];
    }
    if (t.needs(row)) {
      auto& gr = t.grad_slot(row.id);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
    }
  });
}

template <typename T>
Var Tape<T>::relu(Var a) {
  Matrix<T> out = value(a);
  for (T& v : out.data()) v = v > T(0) ? v : T(0);
  Var r = push(std::move(out), needs(a), [a](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    const auto& x = t.value(a).data();
    auto& ga = t.grad_slot(a.id).data();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > T(0)) ga[i] += g[i];
  });
  nodes_[r.id].kink_input = a.id;
  return r;
}

template <typename T>
Var Tape<T>::abs(Var a) {
  Matrix<T> out = value(a);
  for (T& v : out.data()) v = std::abs(v);
  Var r = push(std::move(out), needs(a), [a](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    const auto& x = t.value(a).data();
    auto& ga = t.grad_slot(a.id).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > T(0)) ga[i] += g[i];
      else if (x[i] < T(0)) ga[i] -= g[i];
    }
  });
  nodes_[r.id].kink_input = a.id;
  return r;
}

template <typename T>
std::vector<signed char> Tape<T>::kink_pattern() const {
  std::vector<signed char> out;
  for (const auto& node : nodes_) {
    if (node.kink_input < 0) continue;
    for (T v : nodes_[node.kink_input].value.data()) out.push_back(v > T(0) ? 1 : (v < T(0) ? -1 : 0));
  }
  return out;
}

template <typename T>
Var Tape<T>::scale(Var a, T factor) {
  Matrix<T> out = value(a);
  for (T& v : out.data()) v *= factor;
  return push(std::move(out), needs(a), [a, factor](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    auto& ga = t.grad_slot(a.id).data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

template <typename T>
Var Tape<T>::scale_by(Var a, Var s, T offset) {
  require(value(s).rows() == 1 && value(s).cols() == 1, "Tape::scale_by: scale must be 1x1");
  const T factor = offset + value(s)(0, 0);
  Matrix<T> out = value(a);
  for (T& v : out.data()) v *= factor;
  return push(std::move(out), needs(a) || needs(s), [a, s, factor](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad.data();
    const auto& x = t.value(a).data();
    if (t.needs(a)) {
      auto& ga = t.grad_slot(a.id).data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    }
    if (t.needs(s)) {
      T acc = T(0);
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
      t.grad_slot(s.id)(0, 0) += acc;
    }
  });
}

template <typename T>
Var Tape<T>::gather_rows(Var a, std::vector<int> idx) {
  const auto& x = value(a);
  Matrix<T> out(static_cast<int>(idx.size()), x.cols());
  for (int i = 0; i < out.rows(); ++i) {
    require(idx[i] >= 0 && idx[i] < x.rows(), "Tape::gather_rows: index out of range");
    std::copy(x.row(idx[i]).begin(), x.row(idx[i]).end(), out.row(i).begin());
  }
  return push(std::move(out), needs(a), [a, idx = std::move(idx)](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga(idx[i], j) += g(i, j);
  });
}

template <typename T>
Var Tape<T>::scatter_sum(Var a, std::vector<int> dst, int out_rows) {
  const auto& x = value(a);
  require(static_cast<int>(dst.size()) == x.rows(), "Tape::scatter_sum: one destination per row required");
  std::vector<std::vector<int>> buckets(out_rows);
  for (int i = 0; i < x.rows(); ++i) {
    require(dst[i] >= 0 && dst[i] < out_rows, "Tape::scatter_sum: destination out of range");
    buckets[dst[i]].push_back(i);
  }
  Matrix<T> out(out_rows, x.cols());
  std::vector<T> vals;
  for (int r = 0; r < out_rows; ++r) {
    const auto& b = buckets[r];
    if (b.empty()) continue;
    for (int j = 0; j < x.cols(); ++j) {
      vals.clear();
      for (int i : b) vals.push_back(x(i, j));
      out(r, j) = ordered_sum(vals);
    }
  }
  return push(std::move(out), needs(a), [a, dst = std::move(dst)](Tape& t, int self) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.grad_slot(a.id);
    for (int i = 0; i < ga.rows(); ++i)
      for (int j = 0; j < ga.cols(); ++j) ga(i, j) += g(dst[i], j);
  });
}

template <typename T>
Var Tape<T>::sum_rows(Var a) {
  return scatter_sum(a, std::vector<int>(value(a).rows(), 0), 1);
}

template <typename T>
void Tape<T>::backward(Var loss) {
  require(!backward_done_, "Tape::backward: tape already consumed");
  require(value(loss).rows() == 1 && value(loss).cols() == 1, "Tape::backward: loss must be a scalar");
  backward_done_ = true;
  if (!needs(loss)) return;
  grad_slot(loss.id)(0, 0) = T(1);
  for (int id = loss.id; id >= 0; --id) {
    auto& node = nodes_[id];
    if (!node.needs_grad || node.grad.size() == 0 || !node.backprop) continue;
    node.backprop(*this, id);
  }
}

template <typename T>
Matrix<T> Tape<T>::param_grad(int index) const {
  const auto& shape = (*params_)[index].value;
  Matrix<T> out(shape.rows(), shape.cols());
  for (const auto& node : nodes_) {
    if (node.param != index || node.grad.size() == 0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += node.grad.data()[i];
  }
  return out;
}

template <typename T>
void Tape<T>::accumulate_into(ParamStore<T>& store) const {
  for (const auto& node : nodes_) {
    if (node.param < 0 || node.grad.size() == 0) continue;
    auto& g = store[node.param].grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += node.grad.data()[i];
  }
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace csgnn
