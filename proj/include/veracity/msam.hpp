#pragma once

#include <optional>

#include "veracity/blocks.hpp"
#include "veracity/config.hpp"
#include "veracity/dataset.hpp"

namespace veracity {

// Intermediate features of the material-selection branch.
struct MsamFeatures {
  std::optional<Var> sentiment;  // H_SEN, 1 x model_dim
  std::optional<Var> semantic;   // H_SEM, 1 x model_dim
};

// Material selection: sentiment fusion over audio + text sentiment tokens and
// semantic fusion of text and frames through co-attention.
class Msam {
 public:
  Msam(ParameterStore& store, const ModelConfig& cfg, const FeatureDims& dims, Rng& rng, bool with_head = true);

  // Projects both modalities, concatenates along the token axis, one
  // transformer layer, mean pool.
  Var sentiment_branch(Graph& g, const Matrix& audio_tokens, const Matrix& text_tokens) const;

  // Projects, co-attends, averages each stream, stacks the two means as a
  // 2-token sequence, one transformer layer, mean pool.
  Var semantic_branch(Graph& g, const Matrix& text_tokens, const Matrix& frame_tokens,
                      CoAttention::Weights* weights = nullptr) const;

  MsamFeatures features(Graph& g, const FeatureBundle& bundle) const;

  // Concatenation of the enabled features, the head's input.
  Var joint(Graph& g, const MsamFeatures& f) const;

  // Selection-branch logits over (real, fake).
  Var forward(Graph& g, const FeatureBundle& bundle, const ForwardContext& ctx, MsamFeatures* out = nullptr) const;

  int feature_width() const;
  const MlpHead& head() const { return head_; }
  const Linear& audio_projection() const { return proj_audio_; }
  const Linear& text_projection() const { return proj_text_; }

 private:
  Components parts_;
  int width_;
  Linear proj_audio_, proj_text_, proj_sem_text_, proj_sem_frames_;
  TransformerLayer sentiment_layer_, semantic_layer_;
  CoAttention co_attention_;
  MlpHead head_;
};

}  // namespace veracity
