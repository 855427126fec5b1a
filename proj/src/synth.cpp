#include "veracity/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "veracity/rng.hpp"

namespace veracity {

using nlohmann::json;

SynthSpec::SynthSpec() {
  dims.sent_audio = 16;
  dims.sent_text = 16;
  dims.sem_text = 16;
  dims.sem_frames = 16;
  dims.image = 16;
  dims.grid = 6;
  dims.text_segment = 16;
  dims.visual_segment = 16;
  dims.sentiment_classes = {"neutral", "angry", "happy", "sad"};
}

void SynthSpec::validate() const {
  if (n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
  if (!(fake_fraction >= 0 && fake_fraction <= 1)) throw std::invalid_argument("fake_fraction must be in [0, 1]");
  for (int d : {dims.sent_audio, dims.sent_text, dims.sem_text, dims.sem_frames, dims.image, dims.grid,
                dims.text_segment, dims.visual_segment}) {
    if (d <= 0) throw std::invalid_argument("feature dims must be positive");
  }
  if (dims.sem_text != dims.sem_frames) {
    throw std::invalid_argument("sem_text and sem_frames widths must match (shared text-image space)");
  }
  if (dims.sentiment_classes.size() < 2) throw std::invalid_argument("need at least two sentiment classes");
  for (int len : {sent_audio_len, sent_text_len, sem_text_len, sem_frames_len, max_text_segments,
                  max_visual_segments, max_frames_per_segment, max_colors, pixels_per_box}) {
    if (len <= 0) throw std::invalid_argument("synthetic sizes must be positive");
  }
  if (max_text_segments < 2 || max_visual_segments < 2) throw std::invalid_argument("need room for >= 2 segments");
  if (pixels_per_box < max_colors) throw std::invalid_argument("pixels_per_box must be >= max_colors");
  for (double e : {effects.sentiment, effects.divergence, effects.color, effects.dynamism}) {
    if (!(e >= 0 && e <= 1)) throw std::invalid_argument("effect sizes must be in [0, 1]");
  }
  if (!(text_presence >= 0 && text_presence <= 1)) throw std::invalid_argument("text_presence must be in [0, 1]");
  if (time_step <= 0) throw std::invalid_argument("time_step must be positive");
}

json synth_spec_to_json(const SynthSpec& s) {
  return {{"n_samples", s.n_samples},
          {"fake_fraction", s.fake_fraction},
          {"dims",
           {{"sent_audio", s.dims.sent_audio},
            {"sent_text", s.dims.sent_text},
            {"sem_text", s.dims.sem_text},
            {"sem_frames", s.dims.sem_frames},
            {"image", s.dims.image},
            {"grid", s.dims.grid},
            {"text_segment", s.dims.text_segment},
            {"visual_segment", s.dims.visual_segment},
            {"sentiment_classes", s.dims.sentiment_classes}}},
          {"effects",
           {{"sentiment", s.effects.sentiment},
            {"divergence", s.effects.divergence},
            {"color", s.effects.color},
            {"dynamism", s.effects.dynamism}}},
          {"sent_audio_len", s.sent_audio_len},
          {"sent_text_len", s.sent_text_len},
          {"sem_text_len", s.sem_text_len},
          {"sem_frames_len", s.sem_frames_len},
          {"max_text_segments", s.max_text_segments},
          {"max_visual_segments", s.max_visual_segments},
          {"max_frames_per_segment", s.max_frames_per_segment},
          {"max_colors", s.max_colors},
          {"pixels_per_box", s.pixels_per_box},
          {"text_presence", s.text_presence},
          {"start_time", s.start_time},
          {"time_step", s.time_step}};
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  auto opt = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  opt("n_samples", s.n_samples);
  opt("fake_fraction", s.fake_fraction);
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    auto dim = [&d](const char* key, auto& field) {
      if (d.contains(key)) field = d.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    dim("sent_audio", s.dims.sent_audio);
    dim("sent_text", s.dims.sent_text);
    dim("sem_text", s.dims.sem_text);
    dim("sem_frames", s.dims.sem_frames);
    dim("image", s.dims.image);
    dim("grid", s.dims.grid);
    dim("text_segment", s.dims.text_segment);
    dim("visual_segment", s.dims.visual_segment);
    dim("sentiment_classes", s.dims.sentiment_classes);
  }
  if (j.contains("effects")) {
    const auto& e = j.at("effects");
    auto eff = [&e](const char* key, double& field) {
      if (e.contains(key)) field = e.at(key).get<double>();
    };
    eff("sentiment", s.effects.sentiment);
    eff("divergence", s.effects.divergence);
    eff("color", s.effects.color);
    eff("dynamism", s.effects.dynamism);
  }
  opt("sent_audio_len", s.sent_audio_len);
  opt("sent_text_len", s.sent_text_len);
  opt("sem_text_len", s.sem_text_len);
  opt("sem_frames_len", s.sem_frames_len);
  opt("max_text_segments", s.max_text_segments);
  opt("max_visual_segments", s.max_visual_segments);
  opt("max_frames_per_segment", s.max_frames_per_segment);
  opt("max_colors", s.max_colors);
  opt("pixels_per_box", s.pixels_per_box);
  opt("text_presence", s.text_presence);
  opt("start_time", s.start_time);
  opt("time_step", s.time_step);
  s.validate();
  return s;
}

namespace {

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Vector unit(Rng& rng, Eigen::Index n) {
  Vector v = gaussian(rng, n, 1);
  return v / v.norm();
}

// Label-independent world constants shared by all samples of a corpus.
struct World {
  std::vector<Vector> audio_proto;
  std::vector<Vector> text_proto;
  Vector text_dir;
  Vector richness_dir;
};

World make_world(const SynthSpec& spec, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0);
  World w;
  for (std::size_t c = 0; c < spec.dims.sentiment_classes.size(); ++c) {
    w.audio_proto.push_back(unit(rng, spec.dims.sent_audio) * 3.0);
    w.text_proto.push_back(unit(rng, spec.dims.sent_text) * 1.5);
  }
  w.text_dir = unit(rng, spec.dims.image) * 2.0;
  w.richness_dir = unit(rng, spec.dims.image);
  return w;
}

// Splits `total` frames into `n` positive lengths proportional to the weights.
std::vector<int> lengths_from_weights(const std::vector<double>& weights, double coverage, int vframes) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out;
  for (double w : weights) {
    out.push_back(std::max(1, static_cast<int>(std::lround(coverage * w / sum * vframes))));
  }
  return out;
}

bool overlaps(const Box& b, double x0, double y0, double x1, double y1) {
  return b.x1 < x1 && b.x2 > x0 && b.y1 < y1 && b.y2 > y0;
}

}  // namespace

SyntheticCorpus synthesize_dataset(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const World world = make_world(spec, seed);
  const auto& d = spec.dims;
  const int n = spec.n_samples;
  const int n_fake = static_cast<int>(std::lround(n * spec.fake_fraction));
  std::vector<int> labels(static_cast<std::size_t>(n), kReal);
  std::fill(labels.begin(), labels.begin() + n_fake, kFake);
  Rng label_rng = Rng::derive(seed, 2);
  label_rng.shuffle(labels);

  const auto n_classes = static_cast<std::int64_t>(d.sentiment_classes.size());

  SyntheticCorpus corpus;
  corpus.manifest.version = 1;
  corpus.manifest.dims = d;
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::derive(seed, 1, static_cast<std::uint64_t>(i));
    const int label = labels[static_cast<std::size_t>(i)];
    const double sign = label == kFake ? 1.0 : -1.0;

    NewsVideoSample s;
    char id[32];
    std::snprintf(id, sizeof id, "v%05d", i);
    s.id = id;
    s.label = label;
    s.published_at = spec.start_time + static_cast<std::int64_t>(i) * spec.time_step +
                     rng.uniform_int(0, spec.time_step - 1);

    // Audio sentiment: class 0 is neutral, the rest are charged.
    const double p_charged = 0.5 + 0.5 * spec.effects.sentiment * sign;
    const std::int64_t cls = rng.bernoulli(p_charged) ? rng.uniform_int(1, n_classes - 1) : 0;
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    const double dominant = rng.uniform(0.5, 0.9);
    double rest = 0;
    for (std::int64_t c = 0; c < n_classes; ++c) {
      if (c != cls) rest += probs[static_cast<std::size_t>(c)] = rng.uniform(0.05, 1.0);
    }
    for (std::int64_t c = 0; c < n_classes; ++c) {
      auto& p = probs[static_cast<std::size_t>(c)];
      p = c == cls ? dominant : (1.0 - dominant) * p / rest;
    }
    s.analysis.audio_sentiment_probs = probs;
    s.bundle.sent_audio = gaussian(rng, spec.sent_audio_len, d.sent_audio);
    s.bundle.sent_audio.rowwise() += world.audio_proto[static_cast<std::size_t>(cls)].transpose();
    s.bundle.sent_text = gaussian(rng, spec.sent_text_len, d.sent_text);
    s.bundle.sent_text.rowwise() += world.text_proto[static_cast<std::size_t>(cls)].transpose();

    // Semantic text/frame features in a shared space.
    const Vector topic = gaussian(rng, d.sem_text, 1, 1.5);
    s.bundle.sem_text = gaussian(rng, spec.sem_text_len, d.sem_text, 0.5);
    s.bundle.sem_text.rowwise() += topic.transpose();
    const double drift = label == kFake ? spec.effects.divergence : 0.0;
    s.bundle.sem_frames = gaussian(rng, spec.sem_frames_len, d.sem_frames, 0.5);
    for (int f = 0; f < spec.sem_frames_len; ++f) {
      const Vector other = gaussian(rng, d.sem_frames, 1, 1.5);
      s.bundle.sem_frames.row(f) += ((1.0 - drift) * topic + drift * other).transpose();
    }

    // On-screen text: boxes, palette and the text-rich frame grid.
    const int k_cap = label == kFake
                          ? std::max(1, static_cast<int>(std::lround(spec.max_colors - (spec.max_colors - 1) *
                                                                                            spec.effects.color)))
                          : spec.max_colors;
    const int n_colors = static_cast<int>(rng.uniform_int(1, k_cap));
    const bool has_text = rng.bernoulli(spec.text_presence);
    if (has_text) {
      const int n_boxes = static_cast<int>(rng.uniform_int(1, 4));
      for (int b = 0; b < n_boxes; ++b) {
        const double w = rng.uniform(0.15, 0.5), h = rng.uniform(0.05, 0.2);
        const double x1 = rng.uniform(0.0, 1.0 - w), y1 = rng.uniform(0.0, 1.0 - h);
        s.bundle.ocr_boxes.push_back({x1, y1, x1 + w, y1 + h});
      }
      std::set<int> codes;
      while (static_cast<int>(codes.size()) < n_colors) codes.insert(static_cast<int>(rng.uniform_int(0, 4095)));
      const std::vector<int> palette(codes.begin(), codes.end());
      const int n_pixels = n_boxes * spec.pixels_per_box;
      Matrix pixels(n_pixels, 3);
      for (int p = 0; p < n_pixels; ++p) {
        const int code = palette[static_cast<std::size_t>(p % n_colors)];
        for (int c = 0; c < 3; ++c) {
          const int level = (code >> (4 * (2 - c))) & 0xF;
          pixels(p, c) = level * 16 + static_cast<double>(rng.uniform_int(0, 15));
        }
      }
      s.analysis.ocr_text_pixels = pixels;
    }
    const int g = d.grid;
    s.bundle.grid = g;
    s.bundle.ocr_frame_grid = gaussian(rng, g * g, d.image, 0.5);
    const double richness = (n_colors - 0.5 * (1 + spec.max_colors)) / (0.25 * spec.max_colors);
    for (int y = 0; y < g; ++y) {
      for (int x = 0; x < g; ++x) {
        const double x0 = double(x) / g, y0 = double(y) / g;
        const bool in_text = std::any_of(s.bundle.ocr_boxes.begin(), s.bundle.ocr_boxes.end(), [&](const Box& b) {
          return overlaps(b, x0, y0, x0 + 1.0 / g, y0 + 1.0 / g);
        });
        if (in_text) s.bundle.ocr_frame_grid.row(y * g + x) += (world.text_dir + richness * world.richness_dir).transpose();
      }
    }

    // Text segments: fake videos hold fewer, longer, more uniform phrases.
    const int vframes = static_cast<int>(rng.uniform_int(300, 1500));
    const double fps = 30.0;
    const int m = static_cast<int>(rng.uniform_int(2, spec.max_text_segments));
    const double coverage = 0.6 + (label == kFake ? 0.3 * spec.effects.dynamism : 0.0);
    const double spread = 0.9 * (label == kFake ? 1.0 - spec.effects.dynamism : 1.0);
    std::vector<double> weights;
    for (int t = 0; t < m; ++t) weights.push_back(std::exp(spread * rng.normal()));
    const std::vector<int> lens = lengths_from_weights(weights, coverage, vframes);
    const int used = std::accumulate(lens.begin(), lens.end(), 0);
    const int free_frames = std::max(0, vframes - 1 - used);
    std::vector<double> gap_w;
    for (int t = 0; t < m; ++t) gap_w.push_back(rng.uniform(0.0, 1.0) + 1e-9);
    const double gap_sum = std::accumulate(gap_w.begin(), gap_w.end(), 0.0);
    s.text_segments.modality = Modality::text;
    s.text_segments.fps = fps;
    s.text_segments.vframes = vframes;
    int cursor = 0;
    for (int t = 0; t < m; ++t) {
      const int begin = cursor + static_cast<int>(std::floor(free_frames * gap_w[static_cast<std::size_t>(t)] / gap_sum));
      const int end = std::min(vframes - 1, begin + lens[static_cast<std::size_t>(t)]);
      s.text_segments.segments.push_back({{begin, end}, gaussian(rng, 1, d.text_segment)});
      cursor = end;
    }

    // Shots: contiguous cover of the video, label independent.
    const int n_shots = static_cast<int>(rng.uniform_int(2, spec.max_visual_segments));
    std::set<int> cuts;
    while (static_cast<int>(cuts.size()) < n_shots - 1) cuts.insert(static_cast<int>(rng.uniform_int(1, vframes - 1)));
    s.visual_segments.modality = Modality::visual;
    s.visual_segments.fps = fps;
    s.visual_segments.vframes = vframes;
    int start = 0;
    std::vector<int> bounds(cuts.begin(), cuts.end());
    bounds.push_back(vframes);
    for (int b : bounds) {
      const int k = static_cast<int>(rng.uniform_int(1, spec.max_frames_per_segment));
      s.visual_segments.segments.push_back({{start, b - 1}, gaussian(rng, k, d.visual_segment)});
      start = b;
    }

    SampleRecord r;
    r.id = s.id;
    r.published_at = s.published_at;
    r.label = s.label;
    r.fps = fps;
    r.vframes = vframes;
    r.ocr_boxes = s.bundle.ocr_boxes;
    for (const auto& seg : s.text_segments.segments) r.text_intervals.push_back(seg.interval);
    for (const auto& seg : s.visual_segments.segments) {
      r.visual_intervals.push_back(seg.interval);
      r.visual_frame_counts.push_back(static_cast<int>(seg.content.rows()));
    }
    r.audio_sentiment_probs = s.analysis.audio_sentiment_probs;
    for (const char* which : {role::sent_audio, role::sent_text, role::sem_text, role::sem_frames, role::ocr_frame_grid,
                              role::text_segments, role::visual_segments}) {
      r.blobs[which] = "blobs/" + s.id + "." + which + ".frt";
    }
    if (s.analysis.ocr_text_pixels) {
      r.blobs[role::ocr_text_pixels] = "blobs/" + s.id + "." + role::ocr_text_pixels + ".frt";
    }

    // Round features through float32 so in-memory samples equal what is read back.
    for (Matrix* mtx : {&s.bundle.sent_audio, &s.bundle.sent_text, &s.bundle.sem_text, &s.bundle.sem_frames,
                        &s.bundle.ocr_frame_grid}) {
      *mtx = mtx->cast<float>().cast<double>();
    }
    for (auto* seq : {&s.text_segments, &s.visual_segments}) {
      for (auto& seg : seq->segments) seg.content = seg.content.cast<float>().cast<double>();
    }

    corpus.manifest.records.push_back(std::move(r));
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

std::filesystem::path save_corpus(SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "blobs");
  corpus.manifest.root = dir;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    write_sample_blobs(dir, corpus.manifest.records[i], corpus.samples[i]);
  }
  const auto path = dir / "manifest.json";
  save_manifest(corpus.manifest, path);
  return path;
}

}  // namespace veracity
