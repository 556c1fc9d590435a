#ifndef MSAT_CORE_TAPE_H_
#define MSAT_CORE_TAPE_H_

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "core/rng.h"
#include "core/tensor.h"

namespace msat {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  int32_t idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode autodiff over dense matrices. Operations append nodes in
// topological order; backward() walks them once in reverse. A tape is
// single-use: calling backward a second time is a StateError.
//
// Gradients of parameter leaves accumulate (+=) into the bound Tensor's
// grad buffer, so a parameter used several times on one tape (or shared
// between mechanisms) sums all of its contributions. Zeroing grads is the
// caller's job.
class Tape {
 public:
  explicit Tape(size_t reserve_hint = 256);

  // Differentiable leaf bound to external storage. Repeated calls with the
  // same tensor return the same Var. Allocates the tensor's grad buffer.
  Var param(Tensor& t);

  // Non-differentiable leaf; copies the data.
  Var constant(int rows, int cols, const double* data);
  Var constant(const Tensor& t) { return constant(t.rows, t.cols, t.v.data()); }
  Var zeros(int rows, int cols);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var scale(Var a, double s);
  Var mul(Var a, Var b);  // elementwise
  Var tanh(Var a);
  Var sigmoid(Var a);
  // axis 0 stacks rows, axis 1 stacks columns.
  Var concat(Var a, Var b, int axis);
  Var hstack(const std::vector<Var>& cols);  // same-height columns, side by side
  Var slice_rows(Var a, int r0, int r1);     // rows [r0, r1)
  Var tile_cols(Var v, int n);               // r x 1 -> r x n
  Var reshape(Var a, int rows, int cols);    // same element count and order
  Var embedding_lookup(Var table, int index);  // row `index` as a column vector
  Var softmax(Var x);  // x must be a vector (n x 1 or 1 x n)
  Var sum(Var a);      // scalar 1 x 1
  // -log softmax(logits)[target]; numerically stable fused form.
  Var cross_entropy(Var logits, int target);
  // Inverted dropout: zero with probability `rate`, scale survivors by
  // 1/(1-rate). Identity when !training or rate == 0.
  Var dropout(Var a, double rate, bool training, Rng& rng);

  void backward(Var loss);
  bool backward_done() const { return backward_done_; }

  int rows(Var v) const { return node(v).rows; }
  int cols(Var v) const { return node(v).cols; }
  std::span<const double> value(Var v) const {
    const Node& n = node(v);
    return {n.vptr, static_cast<size_t>(n.rows) * n.cols};
  }
  double scalar(Var v) const;

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    int rows = 0, cols = 0;
    std::vector<double> val;   // owned storage; empty for parameter leaves
    std::vector<double> grad;  // allocated during backward
    const double* vptr = nullptr;
    Tensor* ext = nullptr;  // set for parameter leaves
    // Accumulates input gradients given this node's finished grad.
    std::function<void(Tape&, Node&)> back;
  };

  Node& node(Var v) {
    if (!v.valid() || v.idx >= static_cast<int32_t>(nodes_.size()))
      throw StateError("variable does not belong to this tape");
    return nodes_[v.idx];
  }
  const Node& node(Var v) const {
    return const_cast<Tape*>(this)->node(v);
  }

  Var push(int rows, int cols);
  std::vector<double>& grad_buf(int idx) { return nodes_[idx].grad; }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int32_t> param_vars_;
  bool backward_done_ = false;
};

}  // namespace msat

#endif  // MSAT_CORE_TAPE_H_
