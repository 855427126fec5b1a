#pragma once

#include <vector>

#include "json.hpp"
#include "veracity/blocks.hpp"
#include "veracity/dataset.hpp"

namespace veracity {

// PE[2k] = sin(w_k i), PE[2k+1] = cos(w_k i), w_k = 1 / 10000^(2k/dim).
Vector positional_encoding(int index, int dim);

// Equi-frequency bin edges. group(x) = number of edges <= x, so values below
// the first edge land in bin 0 and values above the last edge in the last bin.
struct BinEdges {
  std::vector<double> edges;  // strictly increasing

  int bin_count() const { return static_cast<int>(edges.size()) + 1; }
  int group(double value) const;
  bool operator==(const BinEdges&) const = default;
};

// Edges at the (j / n_bins) quantiles of `values`. Collapses to the number of
// distinct values (with a warning) when n_bins exceeds it.
BinEdges fit_bins(std::vector<double> values, int n_bins);

// Fitted absolute (seconds) and relative (fraction) duration bins for one modality.
struct DurationBinner {
  BinEdges absolute;
  BinEdges relative;
  bool operator==(const DurationBinner&) const = default;
};

DurationBinner fit_duration_bins(const std::vector<double>& durations_abs, const std::vector<double>& durations_rel,
                                 int n_bins);

// Collects training durations of one modality and fits its binner.
DurationBinner fit_duration_bins(const std::vector<const SegmentSequence*>& sequences, int n_bins);

nlohmann::json binner_to_json(const DurationBinner& b);
DurationBinner binner_from_json(const nlohmann::json& j);

// DE = [Emb_abs(Group(abs)); Emb_rel(Group(rel))], each table D/2 wide.
class DurationEncoder {
 public:
  DurationEncoder() = default;
  DurationEncoder(ParameterStore& store, const std::string& name, DurationBinner binner, int width, Rng& rng);

  // One row per (abs, rel) pair.
  Var operator()(Graph& g, const std::vector<double>& abs_s, const std::vector<double>& rel) const;

  const DurationBinner& binner() const { return binner_; }
  std::size_t absolute_table() const { return abs_table_; }
  std::size_t relative_table() const { return rel_table_; }

 private:
  DurationBinner binner_;
  std::size_t abs_table_ = 0, rel_table_ = 0;
};

// Random-Fourier coordinate features: for p in [0,1]^2,
// [sin(2 pi (2p-1) F), cos(2 pi (2p-1) F)] with a frozen 2 x (D/2) matrix F.
class FourierPositions {
 public:
  FourierPositions() = default;
  FourierPositions(ParameterStore& store, const std::string& name, int width, Rng& rng, double scale = 1.0);

  Matrix encode(const Matrix& points, const ParameterStore& store) const;  // N x 2 -> N x D
  std::size_t frequencies() const { return freq_; }

 private:
  std::size_t freq_ = 0;
};

// Each box becomes two point tokens (top-left, bottom-right): Fourier
// features of the corner plus a learned corner-type embedding. An empty box
// list yields a single learned "no text" token.
class BoxPromptEncoder {
 public:
  BoxPromptEncoder() = default;
  BoxPromptEncoder(ParameterStore& store, const std::string& name, int width, Rng& rng);

  Var operator()(Graph& g, const std::vector<Box>& boxes) const;

  // Fourier features of patch centres for a G x G grid, (G*G) x D.
  Matrix grid_positions(int grid, const ParameterStore& store) const;

 private:
  int width_ = 0;
  FourierPositions positions_;
  std::size_t corner_embed_ = 0;  // 2 x D
  std::size_t no_text_ = 0;       // 1 x D
};

}  // namespace veracity
