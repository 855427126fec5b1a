#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "veracity/autograd.hpp"
#include "veracity/blocks.hpp"
#include "veracity/config.hpp"
#include "veracity/dataset.hpp"
#include "veracity/rng.hpp"
#include "veracity/synth.hpp"

namespace testing {

using veracity::Graph;
using veracity::Matrix;
using veracity::ParameterStore;
using veracity::Var;

struct GradCheck {
  double max_rel_error = 0;
  std::string worst;  // "param[row,col]"
  std::size_t checked = 0;
};

// Central differences over every trainable parameter entry against the tape.
// h = 1e-5 keeps rounding noise (~eps/h) well under the floor below while the
// O(h^2) truncation error stays ~1e-10.
// Relative error |a - n| / max(|a| + |n|, 1e-4); the floor keeps entries whose
// true gradient is ~0 from dividing rounding noise by itself.
inline GradCheck gradient_check(ParameterStore& store, const std::function<Var(Graph&)>& loss_fn, double h = 1e-5) {
  Graph g(store, true);
  const Var loss = loss_fn(g);
  g.backward(loss);
  auto grads = veracity::zero_gradients(store);
  g.accumulate_gradients(grads);

  auto eval = [&] {
    Graph e(store, false);
    return loss_fn(e).value()(0, 0);
  };
  GradCheck out;
  for (std::size_t p = 0; p < store.size(); ++p) {
    if (!store[p].trainable) continue;
    Matrix& w = store[p].value;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double saved = w(r, c);
        w(r, c) = saved + h;
        const double up = eval();
        w(r, c) = saved - h;
        const double down = eval();
        w(r, c) = saved;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads[p](r, c);
        const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-4);
        ++out.checked;
        if (rel > out.max_rel_error) {
          out.max_rel_error = rel;
          out.worst = store[p].name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
        }
      }
    }
  }
  return out;
}

// Scalar probe: sum(x .* R) for a fixed random R, so no output direction is
// invisible to the check (a plain mean is blind behind layer norm).
inline Var probe(Graph& g, Var x, std::uint64_t seed = 99) {
  veracity::Rng rng(seed);
  const Matrix r = veracity::normal_matrix(rng, x.rows() * x.cols(), 1, 1.0);
  return veracity::ag::matmul(veracity::ag::flatten(x), g.constant(r));
}

inline Matrix random_matrix(veracity::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  return veracity::normal_matrix(rng, rows, cols, scale);
}

// Straight-line softmax(QK^T/sqrt(d))V per head, concat, output projection.
inline Matrix reference_attention(const ParameterStore& s, const veracity::MultiHeadAttention& a, const Matrix& q,
                                  const Matrix& k, const Matrix& v) {
  auto lin = [&](const veracity::Linear& l, const Matrix& x) {
    Matrix y = x * s[l.weight()].value;
    for (Eigen::Index r = 0; r < y.rows(); ++r) y.row(r) += s[l.bias()].value;
    return y;
  };
  const Matrix qp = lin(a.q(), q), kp = lin(a.k(), k), vp = lin(a.v(), v);
  const int d = a.width() / a.heads();
  Matrix cat(q.rows(), a.width());
  for (int h = 0; h < a.heads(); ++h) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      std::vector<double> logits(static_cast<std::size_t>(k.rows()));
      double mx = -1e300, z = 0;
      for (Eigen::Index j = 0; j < k.rows(); ++j) {
        double dot = 0;
        for (int c = 0; c < d; ++c) dot += qp(i, h * d + c) * kp(j, h * d + c);
        logits[static_cast<std::size_t>(j)] = dot / std::sqrt(static_cast<double>(d));
        mx = std::max(mx, logits[static_cast<std::size_t>(j)]);
      }
      for (double& l : logits) z += l = std::exp(l - mx);
      for (int c = 0; c < d; ++c) {
        double acc = 0;
        for (Eigen::Index j = 0; j < k.rows(); ++j) acc += logits[static_cast<std::size_t>(j)] / z * vp(j, h * d + c);
        cat(i, h * d + c) = acc;
      }
    }
  }
  return lin(a.o(), cat);
}

// Toy dimensions for gradient checks and fast unit tests.
inline veracity::ModelConfig toy_config() {
  veracity::ModelConfig c;
  c.model_dim = 8;
  c.heads = 2;
  c.co_heads = 2;
  c.ffn_dim = 12;
  c.spatial_dim = 8;
  c.spatial_heads = 2;
  c.two_way_layers = 2;
  c.two_way_mlp_dim = 12;
  c.downsample.channels1 = 4;
  c.downsample.channels2 = 3;
  c.head_depth = 3;
  c.head_width = 8;
  c.duration_bins = 4;
  c.dropout = 0.1;
  return c;
}

inline veracity::SynthSpec toy_spec(int n = 24) {
  veracity::SynthSpec s;
  s.n_samples = n;
  s.dims.sent_audio = 5;
  s.dims.sent_text = 6;
  s.dims.sem_text = 6;
  s.dims.sem_frames = 6;
  s.dims.image = 5;
  s.dims.grid = 4;
  s.dims.text_segment = 5;
  s.dims.visual_segment = 4;
  s.sent_audio_len = 3;
  s.sent_text_len = 3;
  s.sem_text_len = 3;
  s.sem_frames_len = 2;
  s.max_text_segments = 3;
  s.max_visual_segments = 3;
  s.max_frames_per_segment = 3;
  s.effects = {0.9, 0.9, 0.9, 0.9};
  return s;
}

// Desk-scale model used by the training and acceptance runs.
inline veracity::ModelConfig desk_config() {
  veracity::ModelConfig c;
  c.model_dim = 16;
  c.heads = 2;
  c.co_heads = 2;
  c.ffn_dim = 32;
  c.spatial_dim = 16;
  c.spatial_heads = 2;
  c.two_way_mlp_dim = 32;
  c.downsample.channels1 = 8;
  c.downsample.channels2 = 4;
  c.head_width = 32;
  c.batch_size = 16;
  c.learning_rate = 3e-3;
  return c;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("veracity-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
