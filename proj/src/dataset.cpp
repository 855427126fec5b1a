#include "veracity/dataset.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"

namespace veracity {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Segments

void SegmentSequence::validate() const {
  if (!(fps > 0)) throw std::invalid_argument("fps must be > 0");
  if (vframes <= 0) throw std::invalid_argument("vframes must be > 0");
  if (segments.empty()) throw std::invalid_argument("segment sequence is empty");
  Eigen::Index width = -1;
  int prev_begin = -1;
  for (const auto& s : segments) {
    if (s.interval.begin < 0 || s.interval.begin > s.interval.end || s.interval.end >= vframes) {
      throw std::invalid_argument("segment interval [" + std::to_string(s.interval.begin) + ", " +
                                  std::to_string(s.interval.end) + "] outside [0, " + std::to_string(vframes) + ")");
    }
    if (s.interval.begin < prev_begin) throw std::invalid_argument("segments not sorted by frame_begin");
    prev_begin = s.interval.begin;
    if (s.content.rows() < 1) throw std::invalid_argument("segment without content");
    if (modality == Modality::text && s.content.rows() != 1) {
      throw std::invalid_argument("text segment must carry exactly one embedding");
    }
    if (width >= 0 && s.content.cols() != width) throw std::invalid_argument("segment embedding widths differ");
    width = s.content.cols();
  }
}

double SegmentSequence::absolute_duration(std::size_t i) const {
  const auto& iv = segments.at(i).interval;
  return static_cast<double>(iv.end - iv.begin) / fps;
}

double SegmentSequence::relative_duration(std::size_t i) const {
  const auto& iv = segments.at(i).interval;
  return static_cast<double>(iv.end - iv.begin) / static_cast<double>(vframes);
}

// ---------------------------------------------------------------------------
// Time

std::string format_utc(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::int64_t parse_utc(const std::string& text) {
  using namespace std::chrono;
  int y, mo, d, h, mi, s;
  char z = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 || z != 'Z') {
    throw std::invalid_argument("bad UTC timestamp '" + text + "' (want YYYY-MM-DDTHH:MM:SSZ)");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
    throw std::invalid_argument("bad UTC timestamp '" + text + "'");
  }
  return sys_days{ymd}.time_since_epoch().count() * 86400LL + h * 3600LL + mi * 60LL + s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json intervals_to_json(const std::vector<FrameInterval>& v) {
  json arr = json::array();
  for (const auto& iv : v) arr.push_back({iv.begin, iv.end});
  return arr;
}

std::vector<FrameInterval> intervals_from_json(const json& j) {
  std::vector<FrameInterval> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("interval must be [begin, end]");
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}


json record_to_json(const SampleRecord& r) {
  json boxes = json::array();
  for (const auto& b : r.ocr_boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
  json j = {{"id", r.id},
            {"published_at", format_utc(r.published_at)},
            {"label", r.label},
            {"fps", r.fps},
            {"vframes", r.vframes},
            {"blobs", r.blobs},
            {"ocr_boxes", boxes},
            {"text_segments", intervals_to_json(r.text_intervals)},
            {"visual_segments", intervals_to_json(r.visual_intervals)},
            {"visual_frame_counts", r.visual_frame_counts}};
  if (r.audio_sentiment_probs) j["audio_sentiment_probs"] = *r.audio_sentiment_probs;
  return j;
}

SampleRecord record_from_json(const json& j) {
  SampleRecord r;
  r.id = j.at("id").get<std::string>();
  try {
    const auto& ts = j.at("published_at");
    r.published_at = ts.is_string() ? parse_utc(ts.get<std::string>()) : ts.get<std::int64_t>();
    r.label = j.at("label").get<int>();
    r.fps = j.at("fps").get<double>();
    r.vframes = j.at("vframes").get<int>();
    r.blobs = j.at("blobs").get<std::map<std::string, std::string>>();
    for (const auto& b : j.at("ocr_boxes")) {
      if (!b.is_array() || b.size() != 4) throw std::invalid_argument("box must be [x1, y1, x2, y2]");
      r.ocr_boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
    }
    r.text_intervals = intervals_from_json(j.at("text_segments"));
    r.visual_intervals = intervals_from_json(j.at("visual_segments"));
    r.visual_frame_counts = j.at("visual_frame_counts").get<std::vector<int>>();
    if (j.contains("audio_sentiment_probs")) {
      r.audio_sentiment_probs = j.at("audio_sentiment_probs").get<std::vector<double>>();
    }
  } catch (const std::exception& e) {
    throw ManifestError(ManifestError::Kind::invalid_record, r.id, "sample " + r.id + ": " + e.what());
  }
  return r;
}

void check_intervals(const std::string& what, const std::vector<FrameInterval>& v, int vframes,
                     std::vector<std::string>& problems) {
  if (v.empty()) problems.push_back(what + " has no segments");
  int prev = -1;
  for (const auto& iv : v) {
    if (iv.begin < 0 || iv.begin > iv.end || iv.end >= vframes) {
      problems.push_back(what + " interval [" + std::to_string(iv.begin) + ", " + std::to_string(iv.end) +
                         "] outside [0, vframes)");
    }
    if (iv.begin < prev) problems.push_back(what + " not sorted by frame_begin");
    prev = iv.begin;
  }
}

// Expected shape per role; 0 means "any positive length".
struct Expect {
  const char* role;
  std::vector<std::uint32_t> dims;
  bool required;
};

}  // namespace

json dims_to_json(const FeatureDims& d) {
  return {{"sent_audio", d.sent_audio},         {"sent_text", d.sent_text},
          {"sem_text", d.sem_text},             {"sem_frames", d.sem_frames},
          {"image", d.image},                   {"grid", d.grid},
          {"text_segment", d.text_segment},     {"visual_segment", d.visual_segment},
          {"sentiment_classes", d.sentiment_classes}};
}

FeatureDims dims_from_json(const json& j) {
  FeatureDims d;
  d.sent_audio = j.at("sent_audio").get<int>();
  d.sent_text = j.at("sent_text").get<int>();
  d.sem_text = j.at("sem_text").get<int>();
  d.sem_frames = j.at("sem_frames").get<int>();
  d.image = j.at("image").get<int>();
  d.grid = j.at("grid").get<int>();
  d.text_segment = j.at("text_segment").get<int>();
  d.visual_segment = j.at("visual_segment").get<int>();
  d.sentiment_classes = j.at("sentiment_classes").get<std::vector<std::string>>();
  return d;
}

DatasetManifest parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(ManifestError::Kind::parse, "", path.string() + ": cannot open manifest");
  DatasetManifest m;
  m.root = path.parent_path();
  try {
    const json j = json::parse(in);
    m.version = j.at("version").get<int>();
    m.dims = dims_from_json(j.at("dims"));
    for (const auto& r : j.at("records")) m.records.push_back(record_from_json(r));
  } catch (const ManifestError&) {
    throw;
  } catch (const std::exception& e) {
    throw ManifestError(ManifestError::Kind::parse, "", path.string() + ": " + e.what());
  }
  return m;
}

std::vector<Diagnostic> check_manifest(const DatasetManifest& m) {
  using Kind = ManifestError::Kind;
  std::vector<Diagnostic> out;
  const auto& d = m.dims;
  std::set<std::string> seen;
  for (const auto& r : m.records) {
    auto report = [&](Kind kind, const std::string& msg) { out.push_back({kind, r.id, "sample " + r.id + ": " + msg}); };
    if (!seen.insert(r.id).second) {
      report(Kind::duplicate_id, "duplicate id");
      continue;
    }
    std::vector<std::string> problems;
    if (r.label != kFake && r.label != kReal) problems.push_back("label must be 0 or 1");
    if (!(r.fps > 0)) problems.push_back("fps must be > 0");
    if (r.vframes <= 0) problems.push_back("vframes must be > 0");
    check_intervals("text_segments", r.text_intervals, r.vframes, problems);
    check_intervals("visual_segments", r.visual_intervals, r.vframes, problems);
    if (r.visual_frame_counts.size() != r.visual_intervals.size()) {
      problems.push_back("visual_frame_counts length differs from visual_segments");
    }
    std::uint32_t visual_rows = 0;
    for (int k : r.visual_frame_counts) {
      if (k < 1) problems.push_back("visual segment with no frames");
      visual_rows += static_cast<std::uint32_t>(std::max(k, 0));
    }
    for (const auto& b : r.ocr_boxes) {
      if (!b.valid()) problems.push_back("ocr box outside normalized [0,1] range");
    }
    if (r.audio_sentiment_probs) {
      const auto& p = *r.audio_sentiment_probs;
      double sum = 0;
      bool negative = false;
      for (double v : p) {
        sum += v;
        negative |= v < 0;
      }
      if (p.size() != d.sentiment_classes.size()) problems.push_back("audio_sentiment_probs length != class count");
      if (negative || std::abs(sum - 1.0) > 1e-6) problems.push_back("audio_sentiment_probs is not a distribution");
    }
    for (const auto& p : problems) report(Kind::invalid_record, p);

    const std::vector<Expect> expect = {
        {role::sent_audio, {0, std::uint32_t(d.sent_audio)}, true},
        {role::sent_text, {0, std::uint32_t(d.sent_text)}, true},
        {role::sem_text, {0, std::uint32_t(d.sem_text)}, true},
        {role::sem_frames, {0, std::uint32_t(d.sem_frames)}, true},
        {role::ocr_frame_grid, {std::uint32_t(d.grid), std::uint32_t(d.grid), std::uint32_t(d.image)}, true},
        {role::text_segments, {std::uint32_t(r.text_intervals.size()), std::uint32_t(d.text_segment)}, true},
        {role::visual_segments, {visual_rows, std::uint32_t(d.visual_segment)}, true},
        {role::ocr_text_pixels, {0, 3}, false},
    };
    for (const auto& e : expect) {
      const auto it = r.blobs.find(e.role);
      if (it == r.blobs.end()) {
        if (e.required) report(Kind::missing_blob, std::string("no blob for role ") + e.role);
        continue;
      }
      const fs::path p = m.root / it->second;
      if (!fs::exists(p)) {
        report(Kind::missing_blob, std::string("blob ") + e.role + " missing at " + p.string());
        continue;
      }
      TensorHeader h;
      try {
        h = probe_tensor(p);
      } catch (const std::exception& ex) {
        report(Kind::bad_blob, std::string("blob ") + e.role + ": " + ex.what());
        continue;
      }
      bool ok = h.dims.size() == e.dims.size();
      for (std::size_t i = 0; ok && i < e.dims.size(); ++i) ok = e.dims[i] == 0 || e.dims[i] == h.dims[i];
      if (!ok) {
        auto show = [](const std::vector<std::uint32_t>& v) {
          std::string s = "[";
          for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + (v[i] ? std::to_string(v[i]) : "*");
          return s + "]";
        };
        report(Kind::dim_mismatch, std::string("blob ") + e.role + " has shape " + show(h.dims) + ", expected " +
                                       show(e.dims));
      }
    }
  }
  return out;
}

DatasetManifest load_manifest(const fs::path& path) {
  DatasetManifest m = parse_manifest(path);
  const auto diags = check_manifest(m);
  if (!diags.empty()) throw ManifestError(diags.front().kind, diags.front().sample_id, diags.front().message);
  return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  json records = json::array();
  for (const auto& r : m.records) records.push_back(record_to_json(r));
  const json j = {{"version", m.version}, {"dims", dims_to_json(m.dims)}, {"records", records}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << j.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Blobs <-> samples

TensorBlob matrix_to_blob(const Matrix& m, DType dtype) {
  std::vector<double> values(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) values[k++] = m(i, j);
  return TensorBlob({static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, std::move(values),
                    dtype);
}

Matrix blob_to_matrix(const TensorBlob& blob) {
  if (blob.rank() < 2) throw std::invalid_argument("expected a tensor of rank >= 2");
  const Eigen::Index cols = blob.dims.back();
  const Eigen::Index rows = static_cast<Eigen::Index>(blob.element_count()) / cols;
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = blob.values[k++];
  return m;
}

NewsVideoSample load_sample(const DatasetManifest& m, const SampleRecord& r) {
  auto read = [&](const char* which) { return read_tensor(m.root / r.blobs.at(which)); };
  NewsVideoSample s;
  s.id = r.id;
  s.published_at = r.published_at;
  s.label = r.label;
  s.bundle.sent_audio = blob_to_matrix(read(role::sent_audio));
  s.bundle.sent_text = blob_to_matrix(read(role::sent_text));
  s.bundle.sem_text = blob_to_matrix(read(role::sem_text));
  s.bundle.sem_frames = blob_to_matrix(read(role::sem_frames));
  const auto grid = read(role::ocr_frame_grid);
  if (grid.rank() != 3 || grid.dims[0] != grid.dims[1]) {
    throw ManifestError(ManifestError::Kind::dim_mismatch, r.id, "sample " + r.id + ": ocr_frame_grid is not square");
  }
  s.bundle.grid = static_cast<int>(grid.dims[0]);
  s.bundle.ocr_frame_grid = blob_to_matrix(grid);
  s.bundle.ocr_boxes = r.ocr_boxes;

  const Matrix text = blob_to_matrix(read(role::text_segments));
  s.text_segments.modality = Modality::text;
  s.text_segments.fps = r.fps;
  s.text_segments.vframes = r.vframes;
  for (std::size_t i = 0; i < r.text_intervals.size(); ++i) {
    s.text_segments.segments.push_back({r.text_intervals[i], text.row(static_cast<Eigen::Index>(i))});
  }
  const Matrix visual = blob_to_matrix(read(role::visual_segments));
  s.visual_segments.modality = Modality::visual;
  s.visual_segments.fps = r.fps;
  s.visual_segments.vframes = r.vframes;
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < r.visual_intervals.size(); ++i) {
    const int k = r.visual_frame_counts.at(i);
    s.visual_segments.segments.push_back({r.visual_intervals[i], visual.middleRows(row, k)});
    row += k;
  }
  s.analysis.audio_sentiment_probs = r.audio_sentiment_probs;
  if (const auto it = r.blobs.find(role::ocr_text_pixels); it != r.blobs.end()) {
    s.analysis.ocr_text_pixels = blob_to_matrix(read_tensor(m.root / it->second));
  }
  return s;
}

std::vector<NewsVideoSample> load_samples(const DatasetManifest& m) {
  std::vector<NewsVideoSample> out;
  out.reserve(m.records.size());
  for (const auto& r : m.records) out.push_back(load_sample(m, r));
  return out;
}

void write_sample_blobs(const fs::path& root, const SampleRecord& r, const NewsVideoSample& s) {
  auto write = [&](const char* which, const TensorBlob& blob) {
    const fs::path p = root / r.blobs.at(which);
    fs::create_directories(p.parent_path());
    write_tensor(blob, p);
  };
  write(role::sent_audio, matrix_to_blob(s.bundle.sent_audio));
  write(role::sent_text, matrix_to_blob(s.bundle.sent_text));
  write(role::sem_text, matrix_to_blob(s.bundle.sem_text));
  write(role::sem_frames, matrix_to_blob(s.bundle.sem_frames));
  auto grid = matrix_to_blob(s.bundle.ocr_frame_grid);
  grid.dims = {static_cast<std::uint32_t>(s.bundle.grid), static_cast<std::uint32_t>(s.bundle.grid),
               static_cast<std::uint32_t>(s.bundle.ocr_frame_grid.cols())};
  write(role::ocr_frame_grid, grid);

  Matrix text(static_cast<Eigen::Index>(s.text_segments.segments.size()),
              s.text_segments.segments.empty() ? 0 : s.text_segments.segments.front().content.cols());
  for (std::size_t i = 0; i < s.text_segments.segments.size(); ++i) {
    text.row(static_cast<Eigen::Index>(i)) = s.text_segments.segments[i].content.row(0);
  }
  write(role::text_segments, matrix_to_blob(text));

  Eigen::Index rows = 0;
  for (const auto& seg : s.visual_segments.segments) rows += seg.content.rows();
  Matrix visual(rows, s.visual_segments.segments.empty() ? 0 : s.visual_segments.segments.front().content.cols());
  Eigen::Index row = 0;
  for (const auto& seg : s.visual_segments.segments) {
    visual.middleRows(row, seg.content.rows()) = seg.content;
    row += seg.content.rows();
  }
  write(role::visual_segments, matrix_to_blob(visual));

  if (s.analysis.ocr_text_pixels && r.blobs.count(role::ocr_text_pixels)) {
    write(role::ocr_text_pixels, matrix_to_blob(*s.analysis.ocr_text_pixels));
  }
}

}  // namespace veracity
