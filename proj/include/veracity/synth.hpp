#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/dataset.hpp"

namespace veracity {

// Per-cue effect sizes in [0, 1]. 0 plants nothing: the cue's distribution is
// identical for fake and real samples.
struct CueEffects {
  double sentiment = 0;   // fake audio skews toward emotionally charged classes
  double divergence = 0;  // fake frames drift away from the text topic
  double color = 0;       // fake on-screen text uses fewer colors
  double dynamism = 0;    // fake text segments are longer and more uniform

  bool operator==(const CueEffects&) const = default;
};

struct SynthSpec {
  int n_samples = 200;
  double fake_fraction = 0.5;
  FeatureDims dims;
  CueEffects effects;

  int sent_audio_len = 4;
  int sent_text_len = 6;
  int sem_text_len = 6;
  int sem_frames_len = 4;
  int max_text_segments = 6;
  int max_visual_segments = 5;
  int max_frames_per_segment = 3;
  int max_colors = 6;
  int pixels_per_box = 24;
  double text_presence = 0.85;
  std::int64_t start_time = 1577836800;  // 2020-01-01T00:00:00Z
  std::int64_t time_step = 3600;

  SynthSpec();

  void validate() const;
};

nlohmann::json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SyntheticCorpus {
  DatasetManifest manifest;  // root is empty until saved
  std::vector<NewsVideoSample> samples;
};

// Deterministic in (spec, seed). Timestamps strictly increase with record index.
SyntheticCorpus synthesize_dataset(const SynthSpec& spec, std::uint64_t seed);

// Writes manifest.json and blobs/ under dir; sets manifest.root. Returns the manifest path.
std::filesystem::path save_corpus(SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace veracity
