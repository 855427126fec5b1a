#include "veracity/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "veracity/log.hpp"

namespace veracity {

Vector positional_encoding(int index, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("positional encoding dim must be even and positive");
  if (index < 0) throw std::invalid_argument("positional encoding index must be >= 0");
  Vector pe(dim);
  for (int k = 0; k < dim / 2; ++k) {
    const double w = 1.0 / std::pow(10000.0, 2.0 * k / dim);
    pe(2 * k) = std::sin(w * index);
    pe(2 * k + 1) = std::cos(w * index);
  }
  return pe;
}

int BinEdges::group(double value) const {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

BinEdges fit_bins(std::vector<double> values, int n_bins) {
  if (values.empty()) throw std::invalid_argument("fit_bins: no training values");
  if (n_bins < 2) throw std::invalid_argument("fit_bins: need at least two bins");
  std::sort(values.begin(), values.end());
  std::vector<double> uniq;
  std::unique_copy(values.begin(), values.end(), std::back_inserter(uniq));
  int bins = n_bins;
  if (static_cast<int>(uniq.size()) < n_bins) {
    warn("fit_bins: " + std::to_string(n_bins) + " bins requested but only " + std::to_string(uniq.size()) +
         " distinct values; using " + std::to_string(uniq.size()));
    bins = static_cast<int>(uniq.size());
  }
  const std::size_t n = values.size();
  BinEdges out;
  for (int j = 1; j < bins; ++j) {
    const double edge = values[static_cast<std::size_t>(j) * n / static_cast<std::size_t>(bins)];
    if (edge <= values.front()) continue;
    if (!out.edges.empty() && edge <= out.edges.back()) continue;
    out.edges.push_back(edge);
  }
  return out;
}

DurationBinner fit_duration_bins(const std::vector<double>& abs_s, const std::vector<double>& rel, int n_bins) {
  return {fit_bins(abs_s, n_bins), fit_bins(rel, n_bins)};
}

DurationBinner fit_duration_bins(const std::vector<const SegmentSequence*>& sequences, int n_bins) {
  std::vector<double> abs_s, rel;
  for (const auto* seq : sequences) {
    for (std::size_t i = 0; i < seq->segments.size(); ++i) {
      abs_s.push_back(seq->absolute_duration(i));
      rel.push_back(seq->relative_duration(i));
    }
  }
  return fit_duration_bins(abs_s, rel, n_bins);
}

nlohmann::json binner_to_json(const DurationBinner& b) {
  return {{"absolute", b.absolute.edges}, {"relative", b.relative.edges}};
}

DurationBinner binner_from_json(const nlohmann::json& j) {
  DurationBinner b;
  b.absolute.edges = j.at("absolute").get<std::vector<double>>();
  b.relative.edges = j.at("relative").get<std::vector<double>>();
  return b;
}

DurationEncoder::DurationEncoder(ParameterStore& store, const std::string& name, DurationBinner binner, int width,
                                 Rng& rng)
    : binner_(std::move(binner)) {
  if (width % 2 != 0) throw std::invalid_argument("duration encoding width must be even");
  abs_table_ = store.add(name + ".absolute", normal_matrix(rng, binner_.absolute.bin_count(), width / 2, 0.1));
  rel_table_ = store.add(name + ".relative", normal_matrix(rng, binner_.relative.bin_count(), width / 2, 0.1));
}

Var DurationEncoder::operator()(Graph& g, const std::vector<double>& abs_s, const std::vector<double>& rel) const {
  if (abs_s.size() != rel.size() || abs_s.empty()) throw std::invalid_argument("duration encoding: bad inputs");
  std::vector<int> abs_rows, rel_rows;
  for (std::size_t i = 0; i < abs_s.size(); ++i) {
    if (abs_s[i] < 0 || rel[i] < 0 || rel[i] > 1) throw std::invalid_argument("duration out of range");
    abs_rows.push_back(binner_.absolute.group(abs_s[i]));
    rel_rows.push_back(binner_.relative.group(rel[i]));
  }
  return ag::concat_cols({ag::gather_rows(g.param(abs_table_), abs_rows), ag::gather_rows(g.param(rel_table_), rel_rows)});
}

FourierPositions::FourierPositions(ParameterStore& store, const std::string& name, int width, Rng& rng, double scale) {
  if (width % 2 != 0) throw std::invalid_argument("Fourier position width must be even");
  freq_ = store.add(name + ".frequencies", normal_matrix(rng, 2, width / 2, scale), /*trainable=*/false);
}

Matrix FourierPositions::encode(const Matrix& points, const ParameterStore& store) const {
  const Matrix& f = store[freq_].value;
  const Matrix proj = (2.0 * points.array() - 1.0).matrix() * f * (2.0 * std::numbers::pi);
  Matrix out(points.rows(), 2 * f.cols());
  out.leftCols(f.cols()) = proj.array().sin().matrix();
  out.rightCols(f.cols()) = proj.array().cos().matrix();
  return out;
}

BoxPromptEncoder::BoxPromptEncoder(ParameterStore& store, const std::string& name, int width, Rng& rng)
    : width_(width), positions_(store, name + ".fourier", width, rng) {
  corner_embed_ = store.add(name + ".corner_embed", normal_matrix(rng, 2, width, 1.0));
  no_text_ = store.add(name + ".no_text", normal_matrix(rng, 1, width, 1.0));
}

Var BoxPromptEncoder::operator()(Graph& g, const std::vector<Box>& boxes) const {
  if (boxes.empty()) return g.param(no_text_);
  Matrix corners(static_cast<Eigen::Index>(2 * boxes.size()), 2);
  std::vector<int> types;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    if (!b.valid()) throw std::invalid_argument("box prompt: coordinates outside normalized [0,1] range");
    const auto r = static_cast<Eigen::Index>(2 * i);
    corners.row(r) << b.x1, b.y1;
    corners.row(r + 1) << b.x2, b.y2;
    types.push_back(0);
    types.push_back(1);
  }
  const Var pos = g.constant(positions_.encode(corners, g.store()));
  return ag::add(pos, ag::gather_rows(g.param(corner_embed_), types));
}

Matrix BoxPromptEncoder::grid_positions(int grid, const ParameterStore& store) const {
  Matrix centres(static_cast<Eigen::Index>(grid) * grid, 2);
  for (int y = 0; y < grid; ++y)
    for (int x = 0; x < grid; ++x) centres.row(y * grid + x) << (x + 0.5) / grid, (y + 0.5) / grid;
  return positions_.encode(centres, store);
}

}  // namespace veracity
