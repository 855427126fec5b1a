#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "veracity/params.hpp"

namespace veracity::ag {

class Graph;

// Handle to a node on a Graph tape. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so walking the
// tape backwards is a valid topological order for backpropagation.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Matrix& out_grad)>;

  // With track_gradients = false no backward closures are recorded (eval mode).
  explicit Graph(const ParameterStore& store, bool track_gradients = true);

  Var constant(Matrix value);
  // Parameter leaf; repeated calls for the same index return the same node.
  Var param(std::size_t index);

  const Matrix& value(int id) const;
  const Matrix& grad(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool tracking() const { return track_; }
  const ParameterStore& store() const { return store_; }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every node.
  void backward(Var root);

  // Adds parameter gradients into `out` (aligned with the store).
  void accumulate_gradients(GradientBuffer& out) const;

  // Used by op implementations.
  Var push(Matrix value, std::initializer_list<int> inputs, BackwardFn fn);
  Var push(Matrix value, const std::vector<int>& inputs, BackwardFn fn);
  void add_grad(int id, const Matrix& contribution);
  template <typename Expr>
  void add_grad_block(int id, Eigen::Index row, Eigen::Index col, const Expr& contribution);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;  // parameter leaves alias the store
    Matrix grad;
    bool requires_grad = false;
    int param = -1;
    BackwardFn backward;
  };

  Matrix& grad_slot(int id);

  const ParameterStore& store_;
  bool track_;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
};

template <typename Expr>
void Graph::add_grad_block(int id, Eigen::Index row, Eigen::Index col, const Expr& contribution) {
  if (!requires_grad(id)) return;
  grad_slot(id).block(row, col, contribution.rows(), contribution.cols()) += contribution;
}

// --- linear algebra -------------------------------------------------------
Var matmul(Var a, Var b);     // a * b
Var matmul_nt(Var a, Var b);  // a * b^T
Var add(Var a, Var b);
Var add_row(Var a, Var row);  // broadcast a 1 x n row over every row of a
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);

// --- pointwise --------------------------------------------------------------
Var relu(Var a);
Var gelu(Var a);  // exact (erf) form
Var tanh(Var a);
Var sigmoid(Var a);

// --- row-wise ---------------------------------------------------------------
Var softmax_rows(Var a);
Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
Var mean_rows(Var a);  // r x n -> 1 x n

// --- shape ------------------------------------------------------------------
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var flatten(Var a);  // r x c -> 1 x (r*c), row-major
Var gather_rows(Var table, const std::vector<int>& rows);

// 2-D convolution over a square-or-rectangular feature map stored as
// (height*width) x channels with positions in row-major (y, x) order.
// weight: out_channels x (in_channels * kernel * kernel), column index
// (c * kernel + ky) * kernel + kx. Returns (out_h*out_w) x out_channels.
struct ConvShape {
  int height = 0, width = 0, kernel = 3, stride = 2, padding = 1;
  int out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  int out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
};
Var conv2d(Var x, Var weight, Var bias, const ConvShape& shape);

// --- losses -----------------------------------------------------------------
// Softmax cross-entropy of a 1 x K logit row against class `label`; 1 x 1.
Var cross_entropy(Var logits, int label);

}  // namespace veracity::ag
