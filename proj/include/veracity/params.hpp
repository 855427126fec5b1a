#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "veracity/rng.hpp"

namespace veracity {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  bool trainable = true;  // frozen buffers (e.g. random Fourier maps) are stored but never updated
};

// Ordered, name-addressed container of every tensor a model owns.
class ParameterStore {
 public:
  std::size_t add(std::string name, Matrix init, bool trainable = true);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::optional<std::size_t> find(const std::string& name) const;

  // Number of scalars across trainable parameters.
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One gradient matrix per parameter, aligned with the store.
using GradientBuffer = std::vector<Matrix>;
GradientBuffer zero_gradients(const ParameterStore& store);

Matrix xavier_uniform(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out);
Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev);

// Writes one f64 tensor file per parameter under dir/params and returns the
// JSON index (name, shape, file, trainable) for embedding in a checkpoint.
nlohmann::json save_parameters(const ParameterStore& store, const std::filesystem::path& dir);

// Overwrites the values of `store` from a checkpoint index. Names and shapes
// must match exactly.
void load_parameters(ParameterStore& store, const nlohmann::json& index, const std::filesystem::path& dir);

}  // namespace veracity
