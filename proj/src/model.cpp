#include "veracity/model.hpp"

#include <fstream>
#include <stdexcept>

namespace veracity {

namespace fs = std::filesystem;

Meam::Binners fit_binners(const std::vector<NewsVideoSample>& train, int n_bins) {
  if (train.empty()) throw std::invalid_argument("fit_binners: empty training set");
  std::vector<const SegmentSequence*> text, visual;
  for (const auto& s : train) {
    text.push_back(&s.text_segments);
    visual.push_back(&s.visual_segments);
  }
  return {fit_duration_bins(text, n_bins), fit_duration_bins(visual, n_bins)};
}

FakeNewsModel::FakeNewsModel(const ModelConfig& cfg, const FeatureDims& dims, const Meam::Binners& binners)
    : cfg_(cfg), dims_(dims), binners_(binners) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  const bool early = cfg_.fusion == FusionStrategy::early;
  if (cfg_.components.selection()) msam_ = std::make_unique<Msam>(store_, cfg_, dims_, rng, !early);
  if (cfg_.components.editing()) meam_ = std::make_unique<Meam>(store_, cfg_, dims_, binners_, rng, !early);
  if (early) {
    const int width = (msam_ ? msam_->feature_width() : 0) + (meam_ ? meam_->feature_width() : 0);
    early_head_ = MlpHead(store_, "early.head", width, cfg_.head_hidden(), cfg_.dropout, rng);
  }
}

bool FakeNewsModel::late_fused() const { return cfg_.fusion != FusionStrategy::early && msam_ && meam_; }

ModelOutput FakeNewsModel::forward(Graph& g, const NewsVideoSample& sample, const ForwardContext& ctx) const {
  if (cfg_.fusion == FusionStrategy::early) {
    std::vector<Var> parts;
    if (msam_) parts.push_back(msam_->joint(g, msam_->features(g, sample.bundle)));
    if (meam_) parts.push_back(meam_->joint(g, meam_->features(g, sample)));
    const Var x = parts.size() == 1 ? parts.front() : ag::concat_cols(parts);
    return {early_head_(g, x, ctx), std::nullopt, std::nullopt};
  }
  ModelOutput out;
  if (msam_) out.selection = msam_->forward(g, sample.bundle, ctx);
  if (meam_) out.editing = meam_->forward(g, sample, ctx);
  if (late_fused()) out.final = fuse(*out.selection, *out.editing, cfg_.fusion);
  else out.final = out.selection ? *out.selection : *out.editing;
  return out;
}

Var FakeNewsModel::loss(const ModelOutput& out, int label) const {
  if (out.selection && out.editing) return total_loss(out.final, *out.selection, *out.editing, label, cfg_.alpha, cfg_.beta);
  if (label != kReal && label != kFake) throw std::invalid_argument("invalid label " + std::to_string(label));
  return ag::cross_entropy(out.final, label);
}

Logits FakeNewsModel::predict(const NewsVideoSample& sample) const {
  Graph g(store_, false);
  return forward(g, sample, {}).final.value();
}

void FakeNewsModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  const nlohmann::json j = {{"format", "veracity-checkpoint"},
                            {"version", 1},
                            {"config", config_to_json(cfg_)},
                            {"dims", dims_to_json(dims_)},
                            {"binners", {{"text", binner_to_json(binners_.text)}, {"visual", binner_to_json(binners_.visual)}}},
                            {"parameters", save_parameters(store_, dir)}};
  std::ofstream f(dir / "checkpoint.json");
  if (!f) throw std::runtime_error("cannot write " + (dir / "checkpoint.json").string());
  f << j.dump(1) << '\n';
}

std::unique_ptr<FakeNewsModel> FakeNewsModel::load(const fs::path& dir) {
  std::ifstream f(dir / "checkpoint.json");
  if (!f) throw std::runtime_error("cannot read checkpoint " + (dir / "checkpoint.json").string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint.json: " + std::string(e.what()));
  }
  const Meam::Binners binners{binner_from_json(j.at("binners").at("text")),
                              binner_from_json(j.at("binners").at("visual"))};
  auto model = std::make_unique<FakeNewsModel>(config_from_json(j.at("config")), dims_from_json(j.at("dims")), binners);
  load_parameters(model->store_, j.at("parameters"), dir);
  return model;
}

}  // namespace veracity
