#include "veracity/meam.hpp"

#include <stdexcept>

namespace veracity {

Htse::Htse(ParameterStore& store, const std::string& name, Modality modality, int in_width, int width,
           int intra_heads, int inter_heads, DurationBinner binner, Rng& rng)
    : modality_(modality), width_(width) {
  proj_ = Linear(store, name + ".proj", in_width, width, rng);
  if (modality == Modality::visual) intra_ = MultiHeadAttention(store, name + ".intra", width, intra_heads, rng);
  inter_ = MultiHeadAttention(store, name + ".inter", width, inter_heads, rng);
  durations_ = DurationEncoder(store, name + ".duration", std::move(binner), width, rng);
}

Var Htse::segment_tokens(Graph& g, const SegmentSequence& seq) const {
  if (seq.segments.empty()) throw std::invalid_argument("HTSE: empty segment sequence");
  if (seq.modality != modality_) throw std::invalid_argument("HTSE: modality mismatch");
  seq.validate();

  const auto n = static_cast<Eigen::Index>(seq.segments.size());
  Eigen::Index frames = 0;
  for (const auto& s : seq.segments) frames += s.content.rows();
  Matrix stacked(frames, seq.segments.front().content.cols());
  Eigen::Index row = 0;
  for (const auto& s : seq.segments) {
    stacked.middleRows(row, s.content.rows()) = s.content;
    row += s.content.rows();
  }
  const Var projected = proj_(g, g.constant(std::move(stacked)));

  Var seg = projected;
  if (modality_ == Modality::visual) {
    std::vector<Var> rows;
    row = 0;
    for (const auto& s : seq.segments) {
      const Var f = ag::slice_rows(projected, row, s.content.rows());
      rows.push_back(ag::mean_rows(intra_(g, f, f, f)));
      row += s.content.rows();
    }
    seg = ag::concat_rows(rows);
  } else if (frames != n) {
    throw std::invalid_argument("HTSE: text segments must carry exactly one embedding");
  }

  Matrix pe(n, width_);
  std::vector<double> abs_s, rel;
  for (Eigen::Index i = 0; i < n; ++i) {
    pe.row(i) = positional_encoding(static_cast<int>(i), width_).transpose();
    abs_s.push_back(seq.absolute_duration(static_cast<std::size_t>(i)));
    rel.push_back(seq.relative_duration(static_cast<std::size_t>(i)));
  }
  return ag::add(ag::add(seg, g.constant(std::move(pe))), durations_(g, abs_s, rel));
}

Var Htse::operator()(Graph& g, const SegmentSequence& seq) const {
  const Var tokens = segment_tokens(g, seq);
  return ag::mean_rows(inter_(g, tokens, tokens, tokens));
}

Meam::Meam(ParameterStore& store, const ModelConfig& cfg, const FeatureDims& dims, const Binners& binners, Rng& rng,
           bool with_head)
    : parts_(cfg.components), width_(cfg.model_dim), spatial_width_(cfg.spatial_dim), grid_(dims.grid) {
  if (parts_.spa) {
    proj_image_ = Linear(store, "meam.spatial.proj_image", dims.image, spatial_width_, rng);
    prompts_ = BoxPromptEncoder(store, "meam.spatial.prompt", spatial_width_, rng);
    for (int i = 0; i < cfg.two_way_layers; ++i) {
      two_way_.emplace_back(store, "meam.spatial.two_way" + std::to_string(i), spatial_width_, cfg.spatial_heads,
                            cfg.two_way_mlp_dim, rng);
    }
    downsample_ = DownsampleNet(store, "meam.spatial.downsample", spatial_width_, cfg.downsample, rng);
  }
  if (parts_.tem) {
    htse_text_ = Htse(store, "meam.temporal.text", Modality::text, dims.text_segment, width_, cfg.intra_heads,
                      cfg.inter_heads, binners.text, rng);
    htse_visual_ = Htse(store, "meam.temporal.visual", Modality::visual, dims.visual_segment, width_,
                        cfg.intra_heads, cfg.inter_heads, binners.visual, rng);
    modality_tags_ = store.add("meam.temporal.modality_tags", normal_matrix(rng, 2, width_, 0.1));
    temporal_layer_ = TransformerLayer(store, "meam.temporal.fusion", width_, cfg.heads, cfg.ffn_dim, rng);
  }
  if (with_head && parts_.editing()) {
    head_ = MlpHead(store, "meam.head", feature_width(), cfg.head_hidden(), cfg.dropout, rng);
  }
}

int Meam::feature_width() const {
  return (parts_.spa ? downsample_.output_width(grid_) : 0) + (parts_.tem ? width_ : 0);
}

Var Meam::spatial_branch(Graph& g, const Matrix& grid_tokens, int grid, const std::vector<Box>& boxes) const {
  if (grid != grid_) throw std::invalid_argument("spatial branch: grid size differs from the configured grid");
  if (grid_tokens.rows() != static_cast<Eigen::Index>(grid) * grid)
    throw std::invalid_argument("spatial branch: patch grid must be square");
  Var image = proj_image_(g, g.constant(grid_tokens));
  image = ag::add(image, g.constant(prompts_.grid_positions(grid, g.store())));
  Var prompt = prompts_(g, boxes);
  for (const auto& block : two_way_) std::tie(prompt, image) = block(g, prompt, image);
  return downsample_(g, image, grid);
}

Var Meam::temporal_branch(Graph& g, const SegmentSequence& text, const SegmentSequence& visual,
                          MeamFeatures* out) const {
  const Var t = htse_text_(g, text);
  const Var v = htse_visual_(g, visual);
  if (out) {
    out->temporal_text = t;
    out->temporal_visual = v;
  }
  const Var tokens = ag::add(ag::concat_rows({t, v}), g.param(modality_tags_));
  return ag::mean_rows(temporal_layer_(g, tokens));
}

MeamFeatures Meam::features(Graph& g, const NewsVideoSample& s) const {
  MeamFeatures f;
  if (parts_.spa) f.spatial = spatial_branch(g, s.bundle.ocr_frame_grid, s.bundle.grid, s.bundle.ocr_boxes);
  if (parts_.tem) f.temporal = temporal_branch(g, s.text_segments, s.visual_segments, &f);
  return f;
}

Var Meam::joint(Graph&, const MeamFeatures& f) const {
  std::vector<Var> parts;
  if (f.spatial) parts.push_back(*f.spatial);
  if (f.temporal) parts.push_back(*f.temporal);
  if (parts.empty()) throw std::logic_error("editing branch has no enabled components");
  return parts.size() == 1 ? parts.front() : ag::concat_cols(parts);
}

Var Meam::forward(Graph& g, const NewsVideoSample& sample, const ForwardContext& ctx, MeamFeatures* out) const {
  MeamFeatures f = features(g, sample);
  const Var logits = head_(g, joint(g, f), ctx);
  if (out) *out = f;
  return logits;
}

}  // namespace veracity
