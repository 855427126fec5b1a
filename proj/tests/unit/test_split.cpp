#include <algorithm>
#include <set>

#include "doctest.h"
#include "veracity/split.hpp"

using namespace veracity;

namespace {

DatasetManifest timestamps(const std::vector<std::pair<std::string, std::int64_t>>& items) {
  DatasetManifest m;
  for (const auto& [id, t] : items) {
    SampleRecord r;
    r.id = id;
    r.published_at = t;
    m.records.push_back(r);
  }
  return m;
}

std::vector<std::string> ids(const DatasetManifest& m) {
  std::vector<std::string> out;
  for (const auto& r : m.records) out.push_back(r.id);
  return out;
}

}  // namespace

TEST_CASE("20 samples split 14/3/3 in time order") {
  std::vector<std::pair<std::string, std::int64_t>> items;
  for (int t = 20; t >= 1; --t) items.push_back({"s" + std::to_string(100 + t), t});  // reversed storage order
  const TemporalSplit s = temporal_split(timestamps(items));
  REQUIRE(s.train.size() == 14);
  REQUIRE(s.val.size() == 3);
  REQUIRE(s.test.size() == 3);
  CHECK(s.train.records.front().published_at == 1);
  CHECK(s.train.records.back().published_at == 14);
  CHECK(s.val.records.front().published_at == 15);
  CHECK(s.val.records.back().published_at == 17);
  CHECK(s.test.records.front().published_at == 18);
  CHECK(s.test.records.back().published_at == 20);
}

TEST_CASE("floor rule on 3624 samples gives 2536/543/545") {
  // 0.7 * 3624 = 2536.8 -> 2536; 0.15 * 3624 = 543.6 -> 543; remainder 545.
  const auto sizes = split_sizes(3624, {});
  CHECK(sizes[0] == 2536);
  CHECK(sizes[1] == 543);
  CHECK(sizes[2] == 545);
}

TEST_CASE("equal timestamps fall back to id order") {
  const TemporalSplit s = temporal_split(timestamps({{"c", 5}, {"a", 5}, {"e", 5}, {"b", 5}, {"d", 5}, {"f", 5},
                                                     {"h", 5}, {"g", 5}, {"j", 5}, {"i", 5}}),
                                         {0.6, 0.2, 0.2});
  CHECK(ids(s.train) == std::vector<std::string>{"a", "b", "c", "d", "e", "f"});
  CHECK(ids(s.val) == std::vector<std::string>{"g", "h"});
  CHECK(ids(s.test) == std::vector<std::string>{"i", "j"});
}

TEST_CASE("bad inputs") {
  CHECK_THROWS(temporal_split(DatasetManifest{}));
  CHECK_THROWS(temporal_split(timestamps({{"a", 1}, {"b", 2}, {"c", 3}})));  // val would be empty
  const auto m = timestamps({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}});
  CHECK_THROWS(temporal_split(m, {0.5, 0.5, 0.5}));
  CHECK_THROWS(temporal_split(m, {0.8, 0.3, -0.1}));
}

TEST_CASE("property: split partitions the input and respects time order") {
  for (std::size_t n = 7; n < 200; n += 13) {
    std::vector<std::pair<std::string, std::int64_t>> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back({"id" + std::to_string(i), static_cast<std::int64_t>((i * 7919) % 23)});
    const TemporalSplit s = temporal_split(timestamps(items));
    const auto sizes = split_sizes(n, {});
    REQUIRE(s.train.size() == sizes[0]);
    REQUIRE(s.val.size() == sizes[1]);
    REQUIRE(s.test.size() == sizes[2]);
    std::set<std::string> all;
    for (const auto* part : {&s.train, &s.val, &s.test})
      for (const auto& r : part->records) all.insert(r.id);
    CHECK(all.size() == n);
    auto max_t = [](const DatasetManifest& m) {
      return std::max_element(m.records.begin(), m.records.end(), [](auto& a, auto& b) { return a.published_at < b.published_at; })->published_at;
    };
    auto min_t = [](const DatasetManifest& m) {
      return std::min_element(m.records.begin(), m.records.end(), [](auto& a, auto& b) { return a.published_at < b.published_at; })->published_at;
    };
    CHECK(max_t(s.train) <= min_t(s.val));
    CHECK(max_t(s.val) <= min_t(s.test));
  }
}
