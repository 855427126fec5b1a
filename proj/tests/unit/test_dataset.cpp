#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "veracity/dataset.hpp"

using namespace veracity;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path three_sample_corpus(const std::string& name) {
  auto corpus = synthesize_dataset(testing::toy_spec(3), 5);
  return save_corpus(corpus, testing::scratch_dir(name));
}

json read(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

void write(const fs::path& p, const json& j) {
  std::ofstream f(p);
  f << j.dump(1);
}

ManifestError load_error(const fs::path& p) {
  try {
    load_manifest(p);
  } catch (const ManifestError& e) {
    return e;
  }
  FAIL("manifest was accepted");
  return ManifestError(ManifestError::Kind::parse, "", "");
}

}  // namespace

TEST_CASE("well-formed 3-sample manifest loads with all records") {
  const auto path = three_sample_corpus("ds_ok");
  const DatasetManifest m = load_manifest(path);
  CHECK(m.size() == 3);
  CHECK(check_manifest(m).empty());
  const auto samples = load_samples(m);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].bundle.sem_text.cols() == m.dims.sem_text);
  CHECK(samples[0].bundle.ocr_frame_grid.rows() == m.dims.grid * m.dims.grid);
}

TEST_CASE("declared width differing from the blob is a dim mismatch naming the sample") {
  const auto path = three_sample_corpus("ds_dim");
  json j = read(path);
  j["dims"]["sem_text"] = 512;
  j["dims"]["sem_frames"] = 512;
  write(path, j);
  const ManifestError e = load_error(path);
  CHECK(e.kind() == ManifestError::Kind::dim_mismatch);
  CHECK(e.sample_id() == j["records"][0]["id"].get<std::string>());
  CHECK(std::string(e.what()).find(e.sample_id()) != std::string::npos);
}

TEST_CASE("duplicate ids are rejected") {
  const auto path = three_sample_corpus("ds_dup");
  json j = read(path);
  j["records"][2]["id"] = j["records"][0]["id"];
  write(path, j);
  CHECK(load_error(path).kind() == ManifestError::Kind::duplicate_id);
}

TEST_CASE("missing and corrupt blobs are reported") {
  const auto path = three_sample_corpus("ds_blob");
  const json j = read(path);
  const fs::path blob = path.parent_path() / j["records"][1]["blobs"]["sent_audio"].get<std::string>();
  fs::remove(blob);
  CHECK(load_error(path).kind() == ManifestError::Kind::missing_blob);
  std::ofstream(blob, std::ios::binary) << "garbage";
  CHECK(load_error(path).kind() == ManifestError::Kind::bad_blob);
}

TEST_CASE("record invariants: labels, boxes, intervals, sentiment simplex") {
  const auto path = three_sample_corpus("ds_rec");
  const json good = read(path);
  auto expect_invalid = [&](const std::function<void(json&)>& edit) {
    json j = good;
    edit(j);
    write(path, j);
    CHECK(load_error(path).kind() == ManifestError::Kind::invalid_record);
  };
  expect_invalid([](json& j) { j["records"][0]["label"] = 2; });
  expect_invalid([](json& j) { j["records"][0]["ocr_boxes"] = json::array({json::array({0.5, 0.1, 0.2, 0.3})}); });
  expect_invalid([](json& j) { j["records"][0]["text_segments"][0] = json::array({5, 2}); });
  expect_invalid([](json& j) { j["records"][0]["audio_sentiment_probs"] = json::array({0.5, 0.4, 0.05, 0.0}); });
  expect_invalid([](json& j) { j["records"][0]["published_at"] = "not a time"; });
}

TEST_CASE("check_manifest reports every problem, not just the first") {
  const auto path = three_sample_corpus("ds_all");
  json j = read(path);
  j["records"][0]["label"] = 5;
  j["records"][2]["label"] = -1;
  write(path, j);
  CHECK(check_manifest(parse_manifest(path)).size() >= 2);
}

TEST_CASE("durations use end - begin over fps and vframes") {
  SegmentSequence s;
  s.fps = 30;
  s.vframes = 300;
  s.segments.push_back({{30, 90}, Matrix::Zero(1, 2)});
  CHECK(s.absolute_duration(0) == 2.0);
  CHECK(s.relative_duration(0) == 0.2);
  s.segments.push_back({{10, 20}, Matrix::Zero(1, 2)});
  CHECK_THROWS(s.validate());  // unsorted
}

TEST_CASE("UTC timestamps round trip") {
  CHECK(parse_utc("2020-01-01T00:00:00Z") == 1577836800);
  CHECK(format_utc(1577836800) == "2020-01-01T00:00:00Z");
  for (std::int64_t t : {0LL, 951782400LL, 1700000123LL, 4102444799LL}) CHECK(parse_utc(format_utc(t)) == t);
  CHECK_THROWS(parse_utc("2020-13-01T00:00:00Z"));
  CHECK_THROWS(parse_utc("2020-01-01 00:00:00"));
}

TEST_CASE("manifest save/parse keeps every record field") {
  const auto path = three_sample_corpus("ds_rt");
  const DatasetManifest m = load_manifest(path);
  const auto copy = path.parent_path() / "copy.json";
  save_manifest(m, copy);
  const DatasetManifest back = parse_manifest(copy);
  CHECK(back.dims == m.dims);
  REQUIRE(back.records.size() == m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) CHECK(back.records[i] == m.records[i]);
}
