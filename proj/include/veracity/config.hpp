#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/blocks.hpp"

namespace veracity {

enum class FusionStrategy { early, sum_linear, sum_sigmoid, mul_sigmoid, sum_tanh, mul_tanh };

const std::vector<FusionStrategy>& all_fusion_strategies();
std::string to_string(FusionStrategy s);         // "MUL_TANH", ...
FusionStrategy fusion_from_string(const std::string& s);

// Which feature groups participate. SEN/SEM feed the selection branch,
// SPA/TEM the editing branch.
struct Components {
  bool sen = true, sem = true, spa = true, tem = true;

  bool selection() const { return sen || sem; }
  bool editing() const { return spa || tem; }
  bool any() const { return selection() || editing(); }
  std::string to_string() const;  // "SEN,SEM,SPA,TEM"
  static Components parse(const std::string& list);
  bool operator==(const Components&) const = default;
};

struct ModelConfig {
  // Architecture.
  int model_dim = 128;
  int heads = 8;
  int co_heads = 4;
  int ffn_dim = 512;
  int spatial_dim = 256;
  int spatial_heads = 8;
  int two_way_layers = 2;
  int two_way_mlp_dim = 2048;
  DownsampleConfig downsample;
  int intra_heads = 1;
  int inter_heads = 1;
  int head_depth = 3;
  int head_width = 128;
  double dropout = 0.1;
  int duration_bins = 10;
  Components components;
  FusionStrategy fusion = FusionStrategy::mul_tanh;

  // Optimization.
  double alpha = 0.1;
  double beta = 2.0;
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 30;
  int patience = 5;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<int> head_hidden() const { return std::vector<int>(static_cast<std::size_t>(head_depth - 1), head_width); }
};

nlohmann::json config_to_json(const ModelConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(const nlohmann::json& j, ModelConfig base = {});

}  // namespace veracity
