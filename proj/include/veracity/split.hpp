#pragma once

#include <array>

#include "veracity/dataset.hpp"

namespace veracity {

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct TemporalSplit {
  DatasetManifest train;
  DatasetManifest val;
  DatasetManifest test;
};

// Chronological partition: records sorted by (published_at, id); the first
// floor(train*n) go to train, the next floor(val*n) to val, the rest to test.
TemporalSplit temporal_split(const DatasetManifest& manifest, const SplitRatios& ratios = {});

// The sizes temporal_split would produce for n records.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

}  // namespace veracity
