#pragma once

#include <optional>

#include "veracity/blocks.hpp"
#include "veracity/config.hpp"
#include "veracity/dataset.hpp"
#include "veracity/encoding.hpp"

namespace veracity {

struct MeamFeatures {
  std::optional<Var> spatial;        // H_SPA
  std::optional<Var> temporal_text;  // per-modality HTSE outputs
  std::optional<Var> temporal_visual;
  std::optional<Var> temporal;  // H_TEM
};

// Hierarchical temporal structure extractor for one modality.
// Visual: Seg_i = MEAN(SA(frames_i)); text: Seg_i = projected stored embedding.
// SEG_i = Seg_i + PE_i + DE_i, output MEAN(SA(SEG)).
class Htse {
 public:
  Htse() = default;
  Htse(ParameterStore& store, const std::string& name, Modality modality, int in_width, int width, int intra_heads,
       int inter_heads, DurationBinner binner, Rng& rng);

  Var operator()(Graph& g, const SegmentSequence& seq) const;

  // SEG rows before inter-segment attention; exposed for tests.
  Var segment_tokens(Graph& g, const SegmentSequence& seq) const;

  const DurationEncoder& durations() const { return durations_; }
  const Linear& projection() const { return proj_; }
  const MultiHeadAttention& intra() const { return intra_; }
  const MultiHeadAttention& inter() const { return inter_; }

 private:
  Modality modality_ = Modality::text;
  int width_ = 0;
  Linear proj_;
  MultiHeadAttention intra_, inter_;
  DurationEncoder durations_;
};

// Material editing: box-prompted spatial branch and the temporal branch.
class Meam {
 public:
  struct Binners {
    DurationBinner text, visual;
  };

  Meam(ParameterStore& store, const ModelConfig& cfg, const FeatureDims& dims, const Binners& binners, Rng& rng,
       bool with_head = true);

  Var spatial_branch(Graph& g, const Matrix& grid_tokens, int grid, const std::vector<Box>& boxes) const;
  Var temporal_branch(Graph& g, const SegmentSequence& text, const SegmentSequence& visual,
                      MeamFeatures* out = nullptr) const;

  MeamFeatures features(Graph& g, const NewsVideoSample& sample) const;
  Var joint(Graph& g, const MeamFeatures& f) const;
  Var forward(Graph& g, const NewsVideoSample& sample, const ForwardContext& ctx, MeamFeatures* out = nullptr) const;

  int feature_width() const;
  const MlpHead& head() const { return head_; }
  const Htse& text_htse() const { return htse_text_; }
  const Htse& visual_htse() const { return htse_visual_; }

 private:
  Components parts_;
  int width_;
  int spatial_width_;
  int grid_;
  Linear proj_image_;
  BoxPromptEncoder prompts_;
  std::vector<TwoWayAttentionBlock> two_way_;
  DownsampleNet downsample_;
  Htse htse_text_, htse_visual_;
  std::size_t modality_tags_ = 0;  // 2 x width
  TransformerLayer temporal_layer_;
  MlpHead head_;
};

}  // namespace veracity
