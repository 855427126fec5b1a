#include "veracity/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace veracity {

namespace {

void require_width(Var x, int width, const char* block) {
  if (x.cols() != width) {
    throw std::invalid_argument(std::string(block) + ": input width " + std::to_string(x.cols()) + " != " +
                                std::to_string(width));
  }
  if (x.rows() < 1) throw std::invalid_argument(std::string(block) + ": empty token sequence");
}

// Glorot uniform over the receptive field: fan_in = in*k*k, fan_out = out*k*k.
Matrix conv_init(Rng& rng, int in, int out, int k2) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(in) * k2 + static_cast<double>(out) * k2));
  Matrix m(out, static_cast<Eigen::Index>(in) * k2);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng, bool bias)
    : in_(in), out_(out), has_bias_(bias) {
  weight_ = store.add(name + ".weight", xavier_uniform(rng, in, out));
  if (bias) bias_ = store.add(name + ".bias", Matrix::Zero(1, out));
}

Var Linear::operator()(Graph& g, Var x) const {
  require_width(x, in_, "linear");
  Var y = ag::matmul(x, g.param(weight_));
  return has_bias_ ? ag::add_row(y, g.param(bias_)) : y;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, int width) {
  gamma_ = store.add(name + ".gamma", Matrix::Ones(1, width));
  beta_ = store.add(name + ".beta", Matrix::Zero(1, width));
}

Var LayerNorm::operator()(Graph& g, Var x) const { return ag::layer_norm_rows(x, g.param(gamma_), g.param(beta_)); }

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name, int width, int heads, Rng& rng)
    : width_(width), heads_(heads) {
  if (heads < 1 || width % heads != 0) throw std::invalid_argument("attention width must be divisible by heads");
  q_ = Linear(store, name + ".q", width, width, rng);
  k_ = Linear(store, name + ".k", width, width, rng);
  v_ = Linear(store, name + ".v", width, width, rng);
  o_ = Linear(store, name + ".o", width, width, rng);
}

Var MultiHeadAttention::operator()(Graph& g, Var query, Var key, Var value, std::vector<Matrix>* weights) const {
  require_width(query, width_, "attention query");
  require_width(key, width_, "attention key");
  require_width(value, width_, "attention value");
  if (key.rows() != value.rows()) throw std::invalid_argument("attention: key and value lengths differ");

  const Var qp = q_(g, query), kp = k_(g, key), vp = v_(g, value);
  const int d = width_ / heads_;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads_));
  if (weights) weights->clear();
  for (int h = 0; h < heads_; ++h) {
    const Var qh = heads_ == 1 ? qp : ag::slice_cols(qp, h * d, d);
    const Var kh = heads_ == 1 ? kp : ag::slice_cols(kp, h * d, d);
    const Var vh = heads_ == 1 ? vp : ag::slice_cols(vp, h * d, d);
    const Var attn = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), inv_sqrt_d));
    if (weights) weights->push_back(attn.value());
    outs.push_back(ag::matmul(attn, vh));
  }
  return o_(g, heads_ == 1 ? outs.front() : ag::concat_cols(outs));
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name, int width, int hidden, Activation act,
                         Rng& rng)
    : fc1_(store, name + ".fc1", width, hidden, rng), fc2_(store, name + ".fc2", hidden, width, rng), act_(act) {}

Var FeedForward::operator()(Graph& g, Var x) const {
  const Var h = fc1_(g, x);
  return fc2_(g, act_ == Activation::relu ? ag::relu(h) : ag::gelu(h));
}

TransformerLayer::TransformerLayer(ParameterStore& store, const std::string& name, int width, int heads,
                                   int ffn_hidden, Rng& rng)
    : width_(width),
      ln1_(store, name + ".ln1", width),
      ln2_(store, name + ".ln2", width),
      attn_(store, name + ".attn", width, heads, rng),
      ffn_(store, name + ".ffn", width, ffn_hidden, Activation::gelu, rng) {}

Var TransformerLayer::operator()(Graph& g, Var x) const {
  require_width(x, width_, "transformer layer");
  const Var n1 = ln1_(g, x);
  const Var h = ag::add(x, attn_(g, n1, n1, n1));
  return ag::add(h, ffn_(g, ln2_(g, h)));
}

CoAttention::CoAttention(ParameterStore& store, const std::string& name, int width, int heads, Rng& rng)
    : text_attn_(store, name + ".text_attn", width, heads, rng),
      visual_attn_(store, name + ".visual_attn", width, heads, rng),
      text_ln_(store, name + ".text_ln", width),
      visual_ln_(store, name + ".visual_ln", width) {}

std::pair<Var, Var> CoAttention::operator()(Graph& g, Var text, Var visual, Weights* weights) const {
  if (text.rows() < 1 || visual.rows() < 1) throw std::invalid_argument("co-attention: empty sequence");
  const Var t = text_attn_(g, text, visual, visual, weights ? &weights->text_to_visual : nullptr);
  const Var v = visual_attn_(g, visual, text, text, weights ? &weights->visual_to_text : nullptr);
  return {text_ln_(g, ag::add(text, t)), visual_ln_(g, ag::add(visual, v))};
}

TwoWayAttentionBlock::TwoWayAttentionBlock(ParameterStore& store, const std::string& name, int width, int heads,
                                           int mlp_hidden, Rng& rng)
    : width_(width),
      self_attn_(store, name + ".self_attn", width, heads, rng),
      p2i_(store, name + ".prompt_to_image", width, heads, rng),
      i2p_(store, name + ".image_to_prompt", width, heads, rng),
      mlp_(store, name + ".mlp", width, mlp_hidden, Activation::relu, rng),
      ln1_(store, name + ".ln1", width),
      ln2_(store, name + ".ln2", width),
      ln3_(store, name + ".ln3", width),
      ln4_(store, name + ".ln4", width) {}

std::pair<Var, Var> TwoWayAttentionBlock::operator()(Graph& g, Var prompt, Var image) const {
  require_width(prompt, width_, "two-way block prompt");
  require_width(image, width_, "two-way block image");
  Var p = ln1_(g, ag::add(prompt, self_attn_(g, prompt, prompt, prompt)));
  p = ln2_(g, ag::add(p, p2i_(g, p, image, image)));
  p = ln3_(g, ag::add(p, mlp_(g, p)));
  const Var img = ln4_(g, ag::add(image, i2p_(g, image, p, p)));
  return {p, img};
}

DownsampleNet::DownsampleNet(ParameterStore& store, const std::string& name, int in_channels,
                             const DownsampleConfig& cfg, Rng& rng)
    : in_channels_(in_channels), cfg_(cfg) {
  const int k2 = cfg.kernel * cfg.kernel;
  w1_ = store.add(name + ".conv1.weight", conv_init(rng, in_channels, cfg.channels1, k2));
  b1_ = store.add(name + ".conv1.bias", Matrix::Zero(1, cfg.channels1));
  ln_ = LayerNorm(store, name + ".ln", cfg.channels1);
  w2_ = store.add(name + ".conv2.weight", conv_init(rng, cfg.channels1, cfg.channels2, k2));
  b2_ = store.add(name + ".conv2.bias", Matrix::Zero(1, cfg.channels2));
}

int DownsampleNet::output_width(int grid) const {
  const ag::ConvShape s1{grid, grid, cfg_.kernel, cfg_.stride, cfg_.padding};
  const ag::ConvShape s2{s1.out_height(), s1.out_width(), cfg_.kernel, cfg_.stride, cfg_.padding};
  return cfg_.channels2 * s2.out_height() * s2.out_width();
}

Var DownsampleNet::operator()(Graph& g, Var image, int grid) const {
  if (image.rows() != static_cast<Eigen::Index>(grid) * grid) {
    throw std::invalid_argument("downsample: input is not a square " + std::to_string(grid) + "x" +
                                std::to_string(grid) + " grid");
  }
  require_width(image, in_channels_, "downsample");
  const ag::ConvShape s1{grid, grid, cfg_.kernel, cfg_.stride, cfg_.padding};
  const ag::ConvShape s2{s1.out_height(), s1.out_width(), cfg_.kernel, cfg_.stride, cfg_.padding};
  Var x = ag::conv2d(image, g.param(w1_), g.param(b1_), s1);
  x = ag::gelu(ln_(g, x));
  x = ag::gelu(ag::conv2d(x, g.param(w2_), g.param(b2_), s2));
  return ag::flatten(x);
}

MlpHead::MlpHead(ParameterStore& store, const std::string& name, int in, const std::vector<int>& hidden,
                 double dropout, Rng& rng)
    : dropout_(dropout) {
  int prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.emplace_back(store, name + ".fc" + std::to_string(i + 1), prev, hidden[i], rng);
    prev = hidden[i];
  }
  layers_.emplace_back(store, name + ".fc" + std::to_string(hidden.size() + 1), prev, 2, rng);
}

Var MlpHead::operator()(Graph& g, Var x, const ForwardContext& ctx) const {
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    x = dropout(g, ag::relu(layers_[i](g, x)), dropout_, ctx);
  }
  return layers_.back()(g, x);
}

Var dropout(Graph& g, Var x, double rate, const ForwardContext& ctx) {
  if (!ctx.training || rate <= 0.0) return x;
  if (!ctx.rng) throw std::invalid_argument("dropout in training mode needs a random stream");
  const double keep = 1.0 - rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = ctx.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return ag::mul(x, g.constant(std::move(mask)));
}

}  // namespace veracity
