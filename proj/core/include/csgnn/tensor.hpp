#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csgnn/matrix.hpp"

namespace csgnn {

/// Named learnable arrays with gradient slots.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix<T> value;
    Matrix<T> grad;
  };

  /// Registers a parameter; names must be unique.
  int add(std::string name, Matrix<T> init);
  /// Index of a parameter, or -1.
  int find(const std::string& name) const;

  int size() const noexcept { return static_cast<int>(entries_.size()); }
  Entry& operator[](int i) { return entries_[i]; }
  const Entry& operator[](int i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::size_t num_scalars() const;
  void zero_grad();

  /// Same names and shapes with values converted to U.
  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& e : entries_) {
      Matrix<U> m(e.value.rows(), e.value.cols());
      for (std::size_t i = 0; i < e.value.size(); ++i) m.data()[i] = static_cast<U>(e.value.data()[i]);
      out.add(e.name, std::move(m));
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode gradient tape over 2-D tensors.
///
/// Every op records its output and a closure that propagates the output gradient
/// to its inputs. Sums over rows (scatter_sum, sum_rows) add each output entry's
/// contributions in ascending value order, which makes them independent of the
/// order of their inputs.
template <typename T>
class Tape {
 public:
  explicit Tape(const ParamStore<T>* params = nullptr) : params_(params) {}

  Var constant(Matrix<T> value);
  /// Leaf bound to params[index]; its gradient is collected by param_grad().
  Var param(int index);

  const Matrix<T>& value(Var v) const { return nodes_[v.id].value; }
  const Matrix<T>& grad(Var v) const { return nodes_[v.id].grad; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// a + row broadcast over every row of a (row is 1 x cols).
  Var add_row(Var a, Var row);
  Var relu(Var a);
  Var abs(Var a);
  Var scale(Var a, T factor);
  /// (offset + s) · a for a 1x1 tensor s.
  Var scale_by(Var a, Var s, T offset);
  /// out[i] = a[idx[i]].
  Var gather_rows(Var a, std::vector<int> idx);
  /// out[dst[i]] += a[i]; out has out_rows rows.
  Var scatter_sum(Var a, std::vector<int> dst, int out_rows);
  /// 1 x cols column sums.
  Var sum_rows(Var a);

  /// Seeds d(loss)/d(loss) = 1 and runs the tape backwards. loss must be 1x1.
  /// Throws ContractViolation when called a second time.
  void backward(Var loss);

  /// Gradient accumulated for params[index] (zero matrix if unused).
  Matrix<T> param_grad(int index) const;
  /// Adds every parameter gradient into store.grad.
  void accumulate_into(ParamStore<T>& store) const;

  /// Sign of every relu/abs input recorded so far (-1, 0, +1), in tape order.
  /// Two evaluations with equal patterns lie in the same linear piece.
  std::vector<signed char> kink_pattern() const;

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool needs_grad = false;
    int param = -1;
    int kink_input = -1;  // relu/abs: id of the argument
    std::function<void(Tape&, int)> backprop;
  };

  Var push(Matrix<T> value, bool needs_grad, std::function<void(Tape&, int)> backprop);
  Matrix<T>& grad_slot(int id);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  const ParamStore<T>* params_;
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace csgnn
