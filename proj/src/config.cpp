#include "veracity/config.hpp"

#include <sstream>
#include <stdexcept>

namespace veracity {

const std::vector<FusionStrategy>& all_fusion_strategies() {
  static const std::vector<FusionStrategy> all = {FusionStrategy::early,       FusionStrategy::sum_linear,
                                                  FusionStrategy::sum_sigmoid, FusionStrategy::mul_sigmoid,
                                                  FusionStrategy::sum_tanh,    FusionStrategy::mul_tanh};
  return all;
}

std::string to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::early: return "EARLY";
    case FusionStrategy::sum_linear: return "SUM_LINEAR";
    case FusionStrategy::sum_sigmoid: return "SUM_SIGMOID";
    case FusionStrategy::mul_sigmoid: return "MUL_SIGMOID";
    case FusionStrategy::sum_tanh: return "SUM_TANH";
    case FusionStrategy::mul_tanh: return "MUL_TANH";
  }
  return "?";
}

FusionStrategy fusion_from_string(const std::string& s) {
  for (auto f : all_fusion_strategies()) {
    if (to_string(f) == s) return f;
  }
  throw std::invalid_argument("unknown fusion strategy '" + s + "'");
}

std::string Components::to_string() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(sen, "SEN");
  add(sem, "SEM");
  add(spa, "SPA");
  add(tem, "TEM");
  return out;
}

Components Components::parse(const std::string& list) {
  Components c{false, false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "SEN") c.sen = true;
    else if (item == "SEM") c.sem = true;
    else if (item == "SPA") c.spa = true;
    else if (item == "TEM") c.tem = true;
    else if (!item.empty()) throw std::invalid_argument("unknown component '" + item + "' (want SEN, SEM, SPA, TEM)");
  }
  if (!c.any()) throw std::invalid_argument("component set is empty");
  return c;
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("model config: ") + msg);
  };
  require(model_dim > 0 && model_dim % 2 == 0, "model_dim must be positive and even");
  require(heads > 0 && model_dim % heads == 0, "model_dim must be divisible by heads");
  require(co_heads > 0 && model_dim % co_heads == 0, "model_dim must be divisible by co_heads");
  require(intra_heads > 0 && model_dim % intra_heads == 0, "model_dim must be divisible by intra_heads");
  require(inter_heads > 0 && model_dim % inter_heads == 0, "model_dim must be divisible by inter_heads");
  require(ffn_dim > 0, "ffn_dim must be positive");
  require(spatial_dim > 0 && spatial_dim % 2 == 0, "spatial_dim must be positive and even");
  require(spatial_heads > 0 && spatial_dim % spatial_heads == 0, "spatial_dim must be divisible by spatial_heads");
  require(two_way_layers >= 1 && two_way_mlp_dim > 0, "two-way block settings must be positive");
  require(downsample.kernel > 0 && downsample.stride > 0 && downsample.padding >= 0 && downsample.channels1 > 0 &&
              downsample.channels2 > 0,
          "downsample settings must be positive");
  require(head_depth >= 1 && head_width > 0, "head_depth and head_width must be positive");
  require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
  require(duration_bins >= 2, "duration_bins must be >= 2");
  require(components.any(), "at least one component must be enabled");
  require(alpha >= 0 && beta >= 0, "alpha and beta must be >= 0");
  require(learning_rate >= 0, "learning_rate must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_epochs >= 1, "max_epochs must be >= 1");
  require(patience >= 1, "patience must be >= 1");
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"model_dim", c.model_dim},
          {"heads", c.heads},
          {"co_heads", c.co_heads},
          {"ffn_dim", c.ffn_dim},
          {"spatial_dim", c.spatial_dim},
          {"spatial_heads", c.spatial_heads},
          {"two_way_layers", c.two_way_layers},
          {"two_way_mlp_dim", c.two_way_mlp_dim},
          {"conv_kernel", c.downsample.kernel},
          {"conv_stride", c.downsample.stride},
          {"conv_padding", c.downsample.padding},
          {"conv_channels1", c.downsample.channels1},
          {"conv_channels2", c.downsample.channels2},
          {"intra_heads", c.intra_heads},
          {"inter_heads", c.inter_heads},
          {"head_depth", c.head_depth},
          {"head_width", c.head_width},
          {"dropout", c.dropout},
          {"duration_bins", c.duration_bins},
          {"components", c.components.to_string()},
          {"fusion", to_string(c.fusion)},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j, ModelConfig c) {
  if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "model_dim") c.model_dim = value.get<int>();
    else if (key == "heads") c.heads = value.get<int>();
    else if (key == "co_heads") c.co_heads = value.get<int>();
    else if (key == "ffn_dim") c.ffn_dim = value.get<int>();
    else if (key == "spatial_dim") c.spatial_dim = value.get<int>();
    else if (key == "spatial_heads") c.spatial_heads = value.get<int>();
    else if (key == "two_way_layers") c.two_way_layers = value.get<int>();
    else if (key == "two_way_mlp_dim") c.two_way_mlp_dim = value.get<int>();
    else if (key == "conv_kernel") c.downsample.kernel = value.get<int>();
    else if (key == "conv_stride") c.downsample.stride = value.get<int>();
    else if (key == "conv_padding") c.downsample.padding = value.get<int>();
    else if (key == "conv_channels1") c.downsample.channels1 = value.get<int>();
    else if (key == "conv_channels2") c.downsample.channels2 = value.get<int>();
    else if (key == "intra_heads") c.intra_heads = value.get<int>();
    else if (key == "inter_heads") c.inter_heads = value.get<int>();
    else if (key == "head_depth") c.head_depth = value.get<int>();
    else if (key == "head_width") c.head_width = value.get<int>();
    else if (key == "dropout") c.dropout = value.get<double>();
    else if (key == "duration_bins") c.duration_bins = value.get<int>();
    else if (key == "components") c.components = Components::parse(value.get<std::string>());
    else if (key == "fusion") c.fusion = fusion_from_string(value.get<std::string>());
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "beta") c.beta = value.get<double>();
    else if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "batch_size") c.batch_size = value.get<int>();
    else if (key == "max_epochs") c.max_epochs = value.get<int>();
    else if (key == "patience") c.patience = value.get<int>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw std::invalid_argument("model config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace veracity
