#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/tensor_io.hpp"

namespace veracity {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Labels: fake is the positive class.
inline constexpr int kFake = 1;
inline constexpr int kReal = 0;

struct FeatureDims {
  int sent_audio = 0;      // D_sa
  int sent_text = 0;       // D_st
  int sem_text = 0;        // D_ct
  int sem_frames = 0;      // D_cv
  int image = 0;           // D_img, per-patch width of the text-rich frame grid
  int grid = 0;            // G
  int text_segment = 0;    // per-segment text embedding width
  int visual_segment = 0;  // per-frame visual embedding width inside segments
  std::vector<std::string> sentiment_classes;

  bool operator==(const FeatureDims&) const = default;
};

// Axis-aligned box in normalized [0,1] coordinates.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool valid() const { return 0 <= x1 && x1 <= x2 && x2 <= 1 && 0 <= y1 && y1 <= y2 && y2 <= 1; }
  bool operator==(const Box&) const = default;
};

struct FrameInterval {
  int begin = 0;  // inclusive
  int end = 0;    // inclusive
  bool operator==(const FrameInterval&) const = default;
};

enum class Modality { text, visual };

struct Segment {
  FrameInterval interval;
  Matrix content;  // 1 row for text, >= 1 frame rows for visual
};

struct SegmentSequence {
  Modality modality = Modality::text;
  std::vector<Segment> segments;
  double fps = 30.0;
  int vframes = 1;

  // Throws std::invalid_argument on a broken invariant.
  void validate() const;

  double absolute_duration(std::size_t i) const;  // seconds
  double relative_duration(std::size_t i) const;  // fraction of the video
};

struct FeatureBundle {
  Matrix sent_audio;      // L_a x D_sa
  Matrix sent_text;       // L_t x D_st
  Matrix sem_text;        // L_s x D_ct
  Matrix sem_frames;      // L_f x D_cv
  Matrix ocr_frame_grid;  // (G*G) x D_img, patches in row-major (y, x) order
  int grid = 0;
  std::vector<Box> ocr_boxes;
};

struct AnalysisAnnotations {
  std::optional<std::vector<double>> audio_sentiment_probs;
  std::optional<Matrix> ocr_text_pixels;  // P x 3, RGB in [0, 255]
};

struct NewsVideoSample {
  std::string id;
  std::int64_t published_at = 0;  // UTC, seconds since epoch
  int label = kReal;
  FeatureBundle bundle;
  SegmentSequence text_segments;
  SegmentSequence visual_segments;
  AnalysisAnnotations analysis;
};

// Blob roles referenced from each manifest record.
namespace role {
inline constexpr const char* sent_audio = "sent_audio";
inline constexpr const char* sent_text = "sent_text";
inline constexpr const char* sem_text = "sem_text";
inline constexpr const char* sem_frames = "sem_frames";
inline constexpr const char* ocr_frame_grid = "ocr_frame_grid";
inline constexpr const char* text_segments = "text_segments";
inline constexpr const char* visual_segments = "visual_segments";
inline constexpr const char* ocr_text_pixels = "ocr_text_pixels";
}  // namespace role

struct SampleRecord {
  std::string id;
  std::int64_t published_at = 0;
  int label = kReal;
  double fps = 30.0;
  int vframes = 1;
  std::map<std::string, std::string> blobs;  // role -> path relative to the manifest directory
  std::vector<Box> ocr_boxes;
  std::vector<FrameInterval> text_intervals;
  std::vector<FrameInterval> visual_intervals;
  std::vector<int> visual_frame_counts;
  std::optional<std::vector<double>> audio_sentiment_probs;

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  int version = 1;
  FeatureDims dims;
  std::vector<SampleRecord> records;
  std::filesystem::path root;  // directory that blob paths are relative to

  std::size_t size() const { return records.size(); }
};

class ManifestError : public std::runtime_error {
 public:
  enum class Kind { parse, missing_blob, bad_blob, dim_mismatch, duplicate_id, invalid_record };

  ManifestError(Kind kind, std::string sample_id, const std::string& what)
      : std::runtime_error(what), kind_(kind), sample_id_(std::move(sample_id)) {}

  Kind kind() const { return kind_; }
  const std::string& sample_id() const { return sample_id_; }

 private:
  Kind kind_;
  std::string sample_id_;
};

struct Diagnostic {
  ManifestError::Kind kind;
  std::string sample_id;
  std::string message;
};

nlohmann::json dims_to_json(const FeatureDims& d);
FeatureDims dims_from_json(const nlohmann::json& j);

// ISO-8601 "YYYY-MM-DDTHH:MM:SSZ" <-> epoch seconds.
std::string format_utc(std::int64_t epoch_seconds);
std::int64_t parse_utc(const std::string& text);

// Structural parse only; no blob access.
DatasetManifest parse_manifest(const std::filesystem::path& path);

// Record-level and blob-header checks. Returns every problem found.
std::vector<Diagnostic> check_manifest(const DatasetManifest& manifest);

// parse_manifest + check_manifest; throws ManifestError on the first problem.
DatasetManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

NewsVideoSample load_sample(const DatasetManifest& manifest, const SampleRecord& record);
std::vector<NewsVideoSample> load_samples(const DatasetManifest& manifest);

// Writes every blob of `sample` under manifest.root using the paths in `record`.
void write_sample_blobs(const std::filesystem::path& root, const SampleRecord& record, const NewsVideoSample& sample);

// Conversions between in-memory matrices and rank-2 blobs.
TensorBlob matrix_to_blob(const Matrix& m, DType dtype = DType::f32);
Matrix blob_to_matrix(const TensorBlob& blob);  // rank >= 2 collapses leading dims into rows

}  // namespace veracity
