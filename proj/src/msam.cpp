#include "veracity/msam.hpp"

#include <stdexcept>

namespace veracity {

Msam::Msam(ParameterStore& store, const ModelConfig& cfg, const FeatureDims& dims, Rng& rng, bool with_head)
    : parts_(cfg.components), width_(cfg.model_dim) {
  if (parts_.sen) {
    proj_audio_ = Linear(store, "msam.sentiment.proj_audio", dims.sent_audio, width_, rng);
    proj_text_ = Linear(store, "msam.sentiment.proj_text", dims.sent_text, width_, rng);
    sentiment_layer_ = TransformerLayer(store, "msam.sentiment.fusion", width_, cfg.heads, cfg.ffn_dim, rng);
  }
  if (parts_.sem) {
    proj_sem_text_ = Linear(store, "msam.semantic.proj_text", dims.sem_text, width_, rng);
    proj_sem_frames_ = Linear(store, "msam.semantic.proj_frames", dims.sem_frames, width_, rng);
    co_attention_ = CoAttention(store, "msam.semantic.co_attention", width_, cfg.co_heads, rng);
    semantic_layer_ = TransformerLayer(store, "msam.semantic.fusion", width_, cfg.heads, cfg.ffn_dim, rng);
  }
  if (with_head && parts_.selection()) {
    head_ = MlpHead(store, "msam.head", feature_width(), cfg.head_hidden(), cfg.dropout, rng);
  }
}

int Msam::feature_width() const { return (parts_.sen ? width_ : 0) + (parts_.sem ? width_ : 0); }

Var Msam::sentiment_branch(Graph& g, const Matrix& audio_tokens, const Matrix& text_tokens) const {
  if (audio_tokens.rows() < 1 || text_tokens.rows() < 1) throw std::invalid_argument("sentiment branch: empty input");
  const Var a = proj_audio_(g, g.constant(audio_tokens));
  const Var t = proj_text_(g, g.constant(text_tokens));
  return ag::mean_rows(sentiment_layer_(g, ag::concat_rows({a, t})));
}

Var Msam::semantic_branch(Graph& g, const Matrix& text_tokens, const Matrix& frame_tokens,
                          CoAttention::Weights* weights) const {
  if (text_tokens.rows() < 1 || frame_tokens.rows() < 1) throw std::invalid_argument("semantic branch: empty input");
  const Var t = proj_sem_text_(g, g.constant(text_tokens));
  const Var v = proj_sem_frames_(g, g.constant(frame_tokens));
  const auto [t_enh, v_enh] = co_attention_(g, t, v, weights);
  const Var pair = ag::concat_rows({ag::mean_rows(t_enh), ag::mean_rows(v_enh)});
  return ag::mean_rows(semantic_layer_(g, pair));
}

MsamFeatures Msam::features(Graph& g, const FeatureBundle& b) const {
  MsamFeatures f;
  if (parts_.sen) f.sentiment = sentiment_branch(g, b.sent_audio, b.sent_text);
  if (parts_.sem) f.semantic = semantic_branch(g, b.sem_text, b.sem_frames);
  return f;
}

Var Msam::joint(Graph&, const MsamFeatures& f) const {
  std::vector<Var> parts;
  if (f.sentiment) parts.push_back(*f.sentiment);
  if (f.semantic) parts.push_back(*f.semantic);
  if (parts.empty()) throw std::logic_error("selection branch has no enabled components");
  return parts.size() == 1 ? parts.front() : ag::concat_cols(parts);
}

Var Msam::forward(Graph& g, const FeatureBundle& bundle, const ForwardContext& ctx, MsamFeatures* out) const {
  MsamFeatures f = features(g, bundle);
  const Var logits = head_(g, joint(g, f), ctx);
  if (out) *out = f;
  return logits;
}

}  // namespace veracity
