#include "veracity/params.hpp"

#include <cmath>
#include <stdexcept>

#include "veracity/dataset.hpp"
#include "veracity/tensor_io.hpp"

namespace veracity {

namespace fs = std::filesystem;

std::size_t ParameterStore::add(std::string name, Matrix init, bool trainable) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name " + name);
  const std::size_t i = params_.size();
  index_.emplace(name, i);
  params_.push_back({std::move(name), std::move(init), trainable});
  return i;
}

std::optional<std::size_t> ParameterStore::find(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable) n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

GradientBuffer zero_gradients(const ParameterStore& store) {
  GradientBuffer g;
  g.reserve(store.size());
  for (const auto& p : store) g.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  return g;
}

Matrix xavier_uniform(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, stddev);
  return m;
}

nlohmann::json save_parameters(const ParameterStore& store, const fs::path& dir) {
  fs::create_directories(dir / "params");
  nlohmann::json index = nlohmann::json::array();
  for (const auto& p : store) {
    const std::string file = "params/" + p.name + ".frt";
    write_tensor(matrix_to_blob(p.value, DType::f64), dir / file);
    index.push_back({{"name", p.name},
                     {"shape", {p.value.rows(), p.value.cols()}},
                     {"file", file},
                     {"trainable", p.trainable}});
  }
  return index;
}

void load_parameters(ParameterStore& store, const nlohmann::json& index, const fs::path& dir) {
  if (index.size() != store.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(index.size()) + " parameters, model expects " +
                             std::to_string(store.size()));
  }
  for (const auto& e : index) {
    const auto name = e.at("name").get<std::string>();
    const auto i = store.find(name);
    if (!i) throw std::runtime_error("checkpoint parameter " + name + " is not part of this model");
    Matrix value = blob_to_matrix(read_tensor(dir / e.at("file").get<std::string>()));
    auto& p = store[*i];
    if (value.rows() != p.value.rows() || value.cols() != p.value.cols()) {
      throw std::runtime_error("checkpoint parameter " + name + " has a different shape");
    }
    p.value = std::move(value);
    p.trainable = e.value("trainable", true);
  }
}

}  // namespace veracity
