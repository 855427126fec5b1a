#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "veracity/config.hpp"
#include "veracity/fusion.hpp"
#include "veracity/meam.hpp"
#include "veracity/msam.hpp"

namespace veracity {

struct ModelOutput {
  Var final;                     // Y_FND
  std::optional<Var> selection;  // Y_S
  std::optional<Var> editing;    // Y_E
};

// Duration bins fitted on training sequences only.
Meam::Binners fit_binners(const std::vector<NewsVideoSample>& train, int n_bins);

class FakeNewsModel {
 public:
  FakeNewsModel(const ModelConfig& cfg, const FeatureDims& dims, const Meam::Binners& binners);

  FakeNewsModel(const FakeNewsModel&) = delete;
  FakeNewsModel& operator=(const FakeNewsModel&) = delete;

  // Both branches late-fused, a single branch passed through, or the EARLY
  // head over the concatenated features.
  ModelOutput forward(Graph& g, const NewsVideoSample& sample, const ForwardContext& ctx) const;

  // Three-term loss when both branches are late-fused, plain CE otherwise.
  Var loss(const ModelOutput& out, int label) const;

  // Eval-mode final logits.
  Logits predict(const NewsVideoSample& sample) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return cfg_; }
  const FeatureDims& dims() const { return dims_; }
  const Meam::Binners& binners() const { return binners_; }
  const Msam* msam() const { return msam_.get(); }
  const Meam* meam() const { return meam_.get(); }

  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<FakeNewsModel> load(const std::filesystem::path& dir);

 private:
  bool late_fused() const;

  ModelConfig cfg_;
  FeatureDims dims_;
  Meam::Binners binners_;
  ParameterStore store_;
  std::unique_ptr<Msam> msam_;
  std::unique_ptr<Meam> meam_;
  MlpHead early_head_;
};

}  // namespace veracity
