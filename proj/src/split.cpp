#include "veracity/split.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace veracity {

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& r) {
  if (!(r.train > 0 && r.val > 0 && r.test > 0)) throw std::invalid_argument("split ratios must be positive");
  if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");
  // The epsilon absorbs representation error such as 0.7 * 20 = 14.000000000000002.
  const auto take = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  };
  const std::size_t train = take(r.train);
  const std::size_t val = take(r.val);
  return {train, val, n - train - val};
}

TemporalSplit temporal_split(const DatasetManifest& manifest, const SplitRatios& ratios) {
  if (manifest.records.empty()) throw std::invalid_argument("cannot split an empty manifest");
  const auto sizes = split_sizes(manifest.records.size(), ratios);
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("temporal split would leave a partition empty");
  }

  std::vector<SampleRecord> sorted = manifest.records;
  std::sort(sorted.begin(), sorted.end(), [](const SampleRecord& a, const SampleRecord& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.id < b.id;
  });

  TemporalSplit out;
  DatasetManifest* parts[3] = {&out.train, &out.val, &out.test};
  auto it = sorted.begin();
  for (int p = 0; p < 3; ++p) {
    parts[p]->version = manifest.version;
    parts[p]->dims = manifest.dims;
    parts[p]->root = manifest.root;
    parts[p]->records.assign(it, it + static_cast<std::ptrdiff_t>(sizes[p]));
    it += static_cast<std::ptrdiff_t>(sizes[p]);
  }
  return out;
}

}  // namespace veracity
