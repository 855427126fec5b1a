#include "doctest.h"
#include "support.hpp"
#include "veracity/msam.hpp"
#include "veracity/synth.hpp"

using namespace veracity;

namespace {

FeatureBundle toy_bundle(std::uint64_t seed = 1) {
  return synthesize_dataset(testing::toy_spec(2), seed).samples.front().bundle;
}

Matrix reverse_rows(const Matrix& m) { return m.colwise().reverse(); }

}  // namespace

TEST_CASE("feature and logit shapes follow the enabled components") {
  const FeatureDims dims = testing::toy_spec().dims;
  const FeatureBundle b = toy_bundle();
  for (const char* list : {"SEN,SEM", "SEN", "SEM"}) {
    ModelConfig cfg = testing::toy_config();
    cfg.components = Components::parse(list);
    ParameterStore s;
    Rng rng(2);
    Msam m(s, cfg, dims, rng);
    Graph g(s, false);
    MsamFeatures f;
    const Var y = m.forward(g, b, {}, &f);
    CHECK(y.rows() == 1);
    CHECK(y.cols() == 2);
    CHECK(f.sentiment.has_value() == cfg.components.sen);
    CHECK(f.semantic.has_value() == cfg.components.sem);
    if (f.sentiment) CHECK(f.sentiment->cols() == cfg.model_dim);
    if (f.semantic) CHECK(f.semantic->cols() == cfg.model_dim);
    CHECK(m.feature_width() == cfg.model_dim * ((cfg.components.sen ? 1 : 0) + (cfg.components.sem ? 1 : 0)));
    CHECK(s.find("msam.sentiment.fusion.attn.q.weight").has_value() == cfg.components.sen);
  }
}

TEST_CASE("without a head no msam.head parameters exist") {
  ParameterStore s;
  Rng rng(2);
  Msam m(s, testing::toy_config(), testing::toy_spec().dims, rng, false);
  for (const auto& p : s) CHECK(p.name.rfind("msam.head", 0) != 0);
}

TEST_CASE("same seed, same logits") {
  const FeatureBundle b = toy_bundle();
  auto run = [&] {
    ParameterStore s;
    Rng rng(7);
    Msam m(s, testing::toy_config(), testing::toy_spec().dims, rng);
    Graph g(s, false);
    return Matrix(m.forward(g, b, {}).value());
  };
  CHECK(run() == run());
}

TEST_CASE("order of frames and of sentiment tokens does not matter") {
  ParameterStore s;
  Rng rng(3);
  const ModelConfig cfg = testing::toy_config();
  Msam m(s, cfg, testing::toy_spec().dims, rng);
  const FeatureBundle b = toy_bundle();
  Graph g(s, false);
  const Matrix sem = m.semantic_branch(g, b.sem_text, b.sem_frames).value();
  CHECK((sem - m.semantic_branch(g, b.sem_text, reverse_rows(b.sem_frames)).value()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sem - m.semantic_branch(g, reverse_rows(b.sem_text), b.sem_frames).value()).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix sen = m.sentiment_branch(g, b.sent_audio, b.sent_text).value();
  CHECK((sen - m.sentiment_branch(g, reverse_rows(b.sent_audio), b.sent_text).value()).cwiseAbs().maxCoeff() < 1e-10);
  // The content does matter.
  Matrix other = b.sem_frames;
  other(0, 0) += 1.0;
  CHECK((sem - m.semantic_branch(g, b.sem_text, other).value()).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("co-attention weights are exposed per head") {
  ParameterStore s;
  Rng rng(3);
  const ModelConfig cfg = testing::toy_config();
  Msam m(s, cfg, testing::toy_spec().dims, rng);
  const FeatureBundle b = toy_bundle();
  Graph g(s, false);
  CoAttention::Weights w;
  m.semantic_branch(g, b.sem_text, b.sem_frames, &w);
  REQUIRE(w.text_to_visual.size() == static_cast<std::size_t>(cfg.co_heads));
  CHECK(w.text_to_visual[0].rows() == b.sem_text.rows());
  CHECK(w.text_to_visual[0].cols() == b.sem_frames.rows());
  CHECK(w.visual_to_text[0].rows() == b.sem_frames.rows());
}

TEST_CASE("empty inputs are rejected") {
  ParameterStore s;
  Rng rng(3);
  Msam m(s, testing::toy_config(), testing::toy_spec().dims, rng);
  const FeatureBundle b = toy_bundle();
  Graph g(s, false);
  CHECK_THROWS_AS(m.sentiment_branch(g, Matrix(0, b.sent_audio.cols()), b.sent_text), std::invalid_argument);
  CHECK_THROWS_AS(m.semantic_branch(g, b.sem_text, Matrix(0, b.sem_frames.cols())), std::invalid_argument);
}

TEST_CASE("gradient check through the whole selection branch") {
  ParameterStore s;
  Rng rng(4);
  ModelConfig cfg = testing::toy_config();
  cfg.dropout = 0;
  Msam m(s, cfg, testing::toy_spec().dims, rng);
  const FeatureBundle b = toy_bundle();
  const auto r = testing::gradient_check(s, [&](Graph& g) { return ag::cross_entropy(m.forward(g, b, {}), kFake); });
  INFO(r.worst);
  CHECK(r.checked > 500);
  CHECK(r.max_rel_error < 1e-4);
}
