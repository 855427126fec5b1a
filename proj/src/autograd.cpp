#include "veracity/autograd.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace veracity::ag {

const Matrix& Var::value() const { return graph->value(id); }

Graph::Graph(const ParameterStore& store, bool track_gradients)
    : store_(store), track_(track_gradients), param_nodes_(store.size(), -1) {
  nodes_.reserve(256);
}

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(std::size_t index) {
  if (index >= param_nodes_.size()) throw std::out_of_range("parameter index out of range");
  if (param_nodes_[index] >= 0) return {this, param_nodes_[index]};
  Node n;
  n.external = &store_[index].value;
  n.requires_grad = track_ && store_[index].trainable;
  n.param = static_cast<int>(index);
  nodes_.push_back(std::move(n));
  param_nodes_[index] = static_cast<int>(nodes_.size() - 1);
  return {this, param_nodes_[index]};
}

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

const Matrix& Graph::grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

Matrix& Graph::grad_slot(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

void Graph::add_grad(int id, const Matrix& contribution) {
  if (!requires_grad(id)) return;
  grad_slot(id) += contribution;
}

Var Graph::push(Matrix value, std::initializer_list<int> inputs, BackwardFn fn) {
  return push(std::move(value), std::vector<int>(inputs), std::move(fn));
}

Var Graph::push(Matrix value, const std::vector<int>& inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (track_) {
    for (int i : inputs) n.requires_grad |= requires_grad(i);
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size() - 1)};
}

void Graph::backward(Var root) {
  if (root.graph != this) throw std::invalid_argument("backward: variable belongs to another graph");
  const Matrix& rv = value(root.id);
  if (rv.rows() != 1 || rv.cols() != 1) throw std::invalid_argument("backward: root must be a 1x1 scalar");
  if (!requires_grad(root.id)) return;
  grad_slot(root.id)(0, 0) += 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && n.grad.size() != 0) n.backward(*this, n.grad);
  }
}

void Graph::accumulate_gradients(GradientBuffer& out) const {
  for (std::size_t p = 0; p < param_nodes_.size(); ++p) {
    const int id = param_nodes_[p];
    if (id < 0) continue;
    const Matrix& g = nodes_[static_cast<std::size_t>(id)].grad;
    if (g.size() != 0) out[p] += g;
  }
}

namespace {

void require_same_graph(Var a, Var b) {
  if (a.graph != b.graph) throw std::invalid_argument("variables belong to different graphs");
}

void require_shape(bool ok, const char* op, Var a, Var b) {
  if (!ok) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

// --- linear algebra -------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_graph(a, b);
  require_shape(a.cols() == b.rows(), "matmul", a, b);
  Graph& g = *a.graph;
  return g.push(a.value() * b.value(), {a.id, b.id}, [a = a.id, b = b.id](Graph& g, const Matrix& d) {
    if (g.requires_grad(a)) g.add_grad(a, d * g.value(b).transpose());
    if (g.requires_grad(b)) g.add_grad(b, g.value(a).transpose() * d);
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_graph(a, b);
  require_shape(a.cols() == b.cols(), "matmul_nt", a, b);
  Graph& g = *a.graph;
  return g.push(a.value() * b.value().transpose(), {a.id, b.id}, [a = a.id, b = b.id](Graph& g, const Matrix& d) {
    if (g.requires_grad(a)) g.add_grad(a, d * g.value(b));
    if (g.requires_grad(b)) g.add_grad(b, d.transpose() * g.value(a));
  });
}

Var add(Var a, Var b) {
  require_same_graph(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add", a, b);
  Graph& g = *a.graph;
  return g.push(a.value() + b.value(), {a.id, b.id}, [a = a.id, b = b.id](Graph& g, const Matrix& d) {
    g.add_grad(a, d);
    g.add_grad(b, d);
  });
}

Var add_row(Var a, Var row) {
  require_same_graph(a, row);
  require_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row", a, row);
  Graph& g = *a.graph;
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return g.push(std::move(out), {a.id, row.id}, [a = a.id, r = row.id](Graph& g, const Matrix& d) {
    g.add_grad(a, d);
    if (g.requires_grad(r)) g.add_grad(r, d.colwise().sum());
  });
}

Var sub(Var a, Var b) {
  require_same_graph(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub", a, b);
  Graph& g = *a.graph;
  return g.push(a.value() - b.value(), {a.id, b.id}, [a = a.id, b = b.id](Graph& g, const Matrix& d) {
    g.add_grad(a, d);
    if (g.requires_grad(b)) g.add_grad(b, -d);
  });
}

Var mul(Var a, Var b) {
  require_same_graph(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "mul", a, b);
  Graph& g = *a.graph;
  return g.push(a.value().cwiseProduct(b.value()), {a.id, b.id}, [a = a.id, b = b.id](Graph& g, const Matrix& d) {
    if (g.requires_grad(a)) g.add_grad(a, d.cwiseProduct(g.value(b)));
    if (g.requires_grad(b)) g.add_grad(b, d.cwiseProduct(g.value(a)));
  });
}

Var scale(Var a, double s) {
  Graph& g = *a.graph;
  return g.push(a.value() * s, {a.id}, [a = a.id, s](Graph& g, const Matrix& d) { g.add_grad(a, d * s); });
}

// --- pointwise ------------------------------------------------------------

Var relu(Var a) {
  Graph& g = *a.graph;
  return g.push(a.value().cwiseMax(0.0), {a.id}, [a = a.id](Graph& g, const Matrix& d) {
    g.add_grad(a, (g.value(a).array() > 0.0).select(d, 0.0));
  });
}

Var gelu(Var a) {
  Graph& g = *a.graph;
  const Matrix out = a.value().unaryExpr([](double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); });
  return g.push(out, {a.id}, [a = a.id](Graph& g, const Matrix& d) {
    const Matrix slope = g.value(a).unaryExpr([](double x) {
      const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
      const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      return cdf + x * pdf;
    });
    g.add_grad(a, d.cwiseProduct(slope));
  });
}

Var tanh(Var a) {
  Graph& g = *a.graph;
  Matrix out = a.value().array().tanh().matrix();
  const int self = static_cast<int>(g.size());
  return g.push(std::move(out), {a.id}, [a = a.id, self](Graph& g, const Matrix& d) {
    const Matrix& y = g.value(self);
    g.add_grad(a, d.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var sigmoid(Var a) {
  Graph& g = *a.graph;
  Matrix out = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const int self = static_cast<int>(g.size());
  return g.push(std::move(out), {a.id}, [a = a.id, self](Graph& g, const Matrix& d) {
    const Matrix& y = g.value(self);
    g.add_grad(a, d.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

// --- row-wise -------------------------------------------------------------

Var softmax_rows(Var a) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  const int self = static_cast<int>(g.size());
  return g.push(std::move(out), {a.id}, [a = a.id, self](Graph& g, const Matrix& d) {
    const Matrix& y = g.value(self);
    const Eigen::VectorXd dot = d.cwiseProduct(y).rowwise().sum();
    Matrix dx = d;
    dx.colwise() -= dot;
    g.add_grad(a, dx.cwiseProduct(y));
  });
}

Var layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
  require_same_graph(x, gamma);
  require_shape(gamma.rows() == 1 && gamma.cols() == x.cols(), "layer_norm", x, gamma);
  require_shape(beta.rows() == 1 && beta.cols() == x.cols(), "layer_norm", x, beta);
  Graph& g = *x.graph;
  const Matrix& xv = x.value();
  const auto n = static_cast<double>(xv.cols());
  Matrix xhat(xv.rows(), xv.cols());
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double mu = xv.row(i).mean();
    const double var = (xv.row(i).array() - mu).square().sum() / n;
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (xv.row(i).array() - mu) * inv_std(i);
  }
  Matrix out = xhat.array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  return g.push(std::move(out), {x.id, gamma.id, beta.id},
                [x = x.id, gm = gamma.id, bt = beta.id, xhat = std::move(xhat), inv_std, n](Graph& g, const Matrix& d) {
                  if (g.requires_grad(gm)) g.add_grad(gm, d.cwiseProduct(xhat).colwise().sum());
                  if (g.requires_grad(bt)) g.add_grad(bt, d.colwise().sum());
                  if (!g.requires_grad(x)) return;
                  const Matrix gh = d.array().rowwise() * g.value(gm).row(0).array();
                  Matrix dx(gh.rows(), gh.cols());
                  for (Eigen::Index i = 0; i < gh.rows(); ++i) {
                    const double mean_g = gh.row(i).sum() / n;
                    const double mean_gx = gh.row(i).cwiseProduct(xhat.row(i)).sum() / n;
                    dx.row(i) = inv_std(i) * (gh.row(i).array() - mean_g - xhat.row(i).array() * mean_gx);
                  }
                  g.add_grad(x, dx);
                });
}

Var mean_rows(Var a) {
  Graph& g = *a.graph;
  const auto rows = a.rows();
  return g.push(a.value().colwise().mean(), {a.id}, [a = a.id, rows](Graph& g, const Matrix& d) {
    g.add_grad(a, d.replicate(rows, 1) / static_cast<double>(rows));
  });
}

// --- shape ----------------------------------------------------------------

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Graph& g = *parts.front().graph;
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  std::vector<int> ids;
  for (const Var& p : parts) {
    require_same_graph(parts.front(), p);
    require_shape(p.cols() == cols, "concat_rows", parts.front(), p);
    rows += p.rows();
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return g.push(std::move(out), ids, [ids](Graph& g, const Matrix& d) {
    Eigen::Index r = 0;
    for (int id : ids) {
      const auto n = g.value(id).rows();
      if (g.requires_grad(id)) g.add_grad(id, d.middleRows(r, n));
      r += n;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Graph& g = *parts.front().graph;
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    require_same_graph(parts.front(), p);
    require_shape(p.rows() == rows, "concat_cols", parts.front(), p);
    cols += p.cols();
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return g.push(std::move(out), ids, [ids](Graph& g, const Matrix& d) {
    Eigen::Index c = 0;
    for (int id : ids) {
      const auto n = g.value(id).cols();
      if (g.requires_grad(id)) g.add_grad(id, d.middleCols(c, n));
      c += n;
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 1 || start + count > a.rows()) throw std::out_of_range("slice_rows out of range");
  Graph& g = *a.graph;
  return g.push(a.value().middleRows(start, count), {a.id}, [a = a.id, start](Graph& g, const Matrix& d) {
    g.add_grad_block(a, start, 0, d);
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 1 || start + count > a.cols()) throw std::out_of_range("slice_cols out of range");
  Graph& g = *a.graph;
  return g.push(a.value().middleCols(start, count), {a.id}, [a = a.id, start](Graph& g, const Matrix& d) {
    g.add_grad_block(a, 0, start, d);
  });
}

Var flatten(Var a) {
  Graph& g = *a.graph;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Matrix out(1, rows * cols);
  for (Eigen::Index i = 0; i < rows; ++i) out.block(0, i * cols, 1, cols) = a.value().row(i);
  return g.push(std::move(out), {a.id}, [a = a.id, rows, cols](Graph& g, const Matrix& d) {
    Matrix dx(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) dx.row(i) = d.block(0, i * cols, 1, cols);
    g.add_grad(a, dx);
  });
}

Var gather_rows(Var table, const std::vector<int>& rows) {
  Graph& g = *table.graph;
  Matrix out(static_cast<Eigen::Index>(rows.size()), table.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= table.rows()) throw std::out_of_range("gather_rows index out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(rows[i]);
  }
  return g.push(std::move(out), {table.id}, [t = table.id, rows](Graph& g, const Matrix& d) {
    if (!g.requires_grad(t)) return;
    for (std::size_t i = 0; i < rows.size(); ++i) g.add_grad_block(t, rows[i], 0, d.row(static_cast<Eigen::Index>(i)));
  });
}

Var conv2d(Var x, Var weight, Var bias, const ConvShape& s) {
  require_same_graph(x, weight);
  const Eigen::Index in_ch = x.cols();
  const int k = s.kernel;
  if (x.rows() != static_cast<Eigen::Index>(s.height) * s.width) {
    throw std::invalid_argument("conv2d: input rows != height * width");
  }
  if (weight.cols() != in_ch * k * k) throw std::invalid_argument("conv2d: weight width != in_channels * k * k");
  if (bias.rows() != 1 || bias.cols() != weight.rows()) throw std::invalid_argument("conv2d: bias shape");
  const int oh = s.out_height(), ow = s.out_width();
  if (oh < 1 || ow < 1) throw std::invalid_argument("conv2d: empty output");

  const Matrix& xv = x.value();
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(oh) * ow, in_ch * k * k);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index pos = static_cast<Eigen::Index>(oy) * ow + ox;
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * s.stride - s.padding + ky;
        if (iy < 0 || iy >= s.height) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * s.stride - s.padding + kx;
          if (ix < 0 || ix >= s.width) continue;
          const Eigen::Index src = static_cast<Eigen::Index>(iy) * s.width + ix;
          for (Eigen::Index c = 0; c < in_ch; ++c) cols(pos, (c * k + ky) * k + kx) = xv(src, c);
        }
      }
    }
  }
  Matrix out = cols * weight.value().transpose();
  out.rowwise() += bias.value().row(0);
  Graph& g = *x.graph;
  return g.push(std::move(out), {x.id, weight.id, bias.id},
                [x = x.id, w = weight.id, b = bias.id, cols = std::move(cols), s, in_ch, oh, ow](Graph& g,
                                                                                                const Matrix& d) {
                  if (g.requires_grad(w)) g.add_grad(w, d.transpose() * cols);
                  if (g.requires_grad(b)) g.add_grad(b, d.colwise().sum());
                  if (!g.requires_grad(x)) return;
                  const int k = s.kernel;
                  const Matrix dcols = d * g.value(w);
                  Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(s.height) * s.width, in_ch);
                  for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox) {
                      const Eigen::Index pos = static_cast<Eigen::Index>(oy) * ow + ox;
                      for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * s.stride - s.padding + ky;
                        if (iy < 0 || iy >= s.height) continue;
                        for (int kx = 0; kx < k; ++kx) {
                          const int ix = ox * s.stride - s.padding + kx;
                          if (ix < 0 || ix >= s.width) continue;
                          const Eigen::Index dst = static_cast<Eigen::Index>(iy) * s.width + ix;
                          for (Eigen::Index c = 0; c < in_ch; ++c) dx(dst, c) += dcols(pos, (c * k + ky) * k + kx);
                        }
                      }
                    }
                  }
                  g.add_grad(x, dx);
                });
}

// --- losses ---------------------------------------------------------------

Var cross_entropy(Var logits, int label) {
  if (logits.rows() != 1) throw std::invalid_argument("cross_entropy: logits must be a single row");
  if (label < 0 || label >= logits.cols()) throw std::invalid_argument("cross_entropy: invalid label");
  Graph& g = *logits.graph;
  const Eigen::RowVectorXd z = logits.value().row(0);
  const double m = z.maxCoeff();
  const Eigen::RowVectorXd e = (z.array() - m).exp().matrix();
  const double sum = e.sum();
  Matrix loss(1, 1);
  loss(0, 0) = m + std::log(sum) - z(label);
  Eigen::RowVectorXd p = e / sum;
  return g.push(std::move(loss), {logits.id}, [l = logits.id, p, label](Graph& g, const Matrix& d) {
    Matrix grad = p;
    grad(0, label) -= 1.0;
    g.add_grad(l, grad * d(0, 0));
  });
}

}  // namespace veracity::ag
