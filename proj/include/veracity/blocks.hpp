#pragma once

#include <string>
#include <utility>
#include <vector>

#include "veracity/autograd.hpp"
#include "veracity/rng.hpp"

namespace veracity {

using ag::Graph;
using ag::Var;

// Mode flag plus the dropout stream for one forward pass.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng, bool bias = true);

  Var operator()(Graph& g, Var x) const;

  int in() const { return in_; }
  int out() const { return out_; }
  std::size_t weight() const { return weight_; }  // in x out
  std::size_t bias() const { return bias_; }

 private:
  int in_ = 0, out_ = 0;
  std::size_t weight_ = 0, bias_ = 0;
  bool has_bias_ = false;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, int width);

  Var operator()(Graph& g, Var x) const;

 private:
  std::size_t gamma_ = 0, beta_ = 0;
};

// softmax(Q' K'^T / sqrt(d)) V' per head, heads concatenated, then an output
// projection. Q' = Q W_Q + b_Q and likewise for K', V'.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name, int width, int heads, Rng& rng);

  // weights, when given, receives one (Lq x Lk) attention matrix per head.
  Var operator()(Graph& g, Var query, Var key, Var value, std::vector<Matrix>* weights = nullptr) const;

  int width() const { return width_; }
  int heads() const { return heads_; }
  const Linear& q() const { return q_; }
  const Linear& k() const { return k_; }
  const Linear& v() const { return v_; }
  const Linear& o() const { return o_; }

 private:
  int width_ = 0, heads_ = 1;
  Linear q_, k_, v_, o_;
};

enum class Activation { relu, gelu };

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, int width, int hidden, Activation act, Rng& rng);

  Var operator()(Graph& g, Var x) const;
  const Linear& output() const { return fc2_; }

 private:
  Linear fc1_, fc2_;
  Activation act_ = Activation::gelu;
};

// Pre-norm encoder layer: x + SA(LN(x)), then x + FFN(LN(x)).
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(ParameterStore& store, const std::string& name, int width, int heads, int ffn_hidden, Rng& rng);

  Var operator()(Graph& g, Var x) const;
  int width() const { return width_; }

 private:
  int width_ = 0;
  LayerNorm ln1_, ln2_;
  MultiHeadAttention attn_;
  FeedForward ffn_;
};

// Two parallel cross-attention streams: text attends visual, visual attends
// text, each followed by residual + LN.
class CoAttention {
 public:
  CoAttention() = default;
  CoAttention(ParameterStore& store, const std::string& name, int width, int heads, Rng& rng);

  struct Weights {
    std::vector<Matrix> text_to_visual;
    std::vector<Matrix> visual_to_text;
  };

  std::pair<Var, Var> operator()(Graph& g, Var text, Var visual, Weights* weights = nullptr) const;

 private:
  MultiHeadAttention text_attn_, visual_attn_;
  LayerNorm text_ln_, visual_ln_;
};

// Prompt/image block:
//   p  = LN(p + SA(p))
//   p  = LN(p + CA(p, img))
//   p  = LN(p + MLP(p))
//   img = LN(img + CA(img, p))
class TwoWayAttentionBlock {
 public:
  TwoWayAttentionBlock() = default;
  TwoWayAttentionBlock(ParameterStore& store, const std::string& name, int width, int heads, int mlp_hidden, Rng& rng);

  std::pair<Var, Var> operator()(Graph& g, Var prompt, Var image) const;

  int width() const { return width_; }
  const MultiHeadAttention& self_attention() const { return self_attn_; }
  const MultiHeadAttention& prompt_to_image() const { return p2i_; }
  const MultiHeadAttention& image_to_prompt() const { return i2p_; }
  const FeedForward& mlp() const { return mlp_; }

 private:
  int width_ = 0;
  MultiHeadAttention self_attn_, p2i_, i2p_;
  FeedForward mlp_;
  LayerNorm ln1_, ln2_, ln3_, ln4_;
};

struct DownsampleConfig {
  int kernel = 3;
  int stride = 2;
  int padding = 1;
  int channels1 = 64;
  int channels2 = 32;
};

// GeLU(Conv(GeLU(LN(Conv(x))))) then flatten. Input is (G*G) x C tokens.
class DownsampleNet {
 public:
  DownsampleNet() = default;
  DownsampleNet(ParameterStore& store, const std::string& name, int in_channels, const DownsampleConfig& cfg, Rng& rng);

  Var operator()(Graph& g, Var image, int grid) const;

  // Flattened output width for a G x G input.
  int output_width(int grid) const;

 private:
  int in_channels_ = 0;
  DownsampleConfig cfg_;
  std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;
  LayerNorm ln_;
};

// depth linear layers, ReLU + dropout between them, final width 2.
class MlpHead {
 public:
  MlpHead() = default;
  MlpHead(ParameterStore& store, const std::string& name, int in, const std::vector<int>& hidden, double dropout,
          Rng& rng);

  Var operator()(Graph& g, Var x, const ForwardContext& ctx) const;

  int in() const { return layers_.front().in(); }
  const Linear& last() const { return layers_.back(); }

 private:
  std::vector<Linear> layers_;
  double dropout_ = 0.0;
};

Var dropout(Graph& g, Var x, double rate, const ForwardContext& ctx);

}  // namespace veracity
