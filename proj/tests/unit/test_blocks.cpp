#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "veracity/blocks.hpp"

using namespace veracity;
namespace ag = veracity::ag;

namespace {

constexpr double kTol = 1e-4;

void set_identity(ParameterStore& s, const Linear& l) {
  s[l.weight()].value = Matrix::Identity(l.in(), l.out());
  s[l.bias()].value.setZero();
}

void zero_linear(ParameterStore& s, const Linear& l) {
  s[l.weight()].value.setZero();
  s[l.bias()].value.setZero();
}

Matrix permute_rows(const Matrix& m, const std::vector<int>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(perm[i]);
  return out;
}


}  // namespace

TEST_CASE("attention: single key returns the projected value") {
  ParameterStore s;
  Rng rng(1);
  MultiHeadAttention a(s, "a", 4, 1, rng);
  for (const auto* l : {&a.q(), &a.k(), &a.v(), &a.o()}) set_identity(s, *l);
  Graph g(s, false);
  const Matrix q = testing::random_matrix(rng, 3, 4), kv = testing::random_matrix(rng, 1, 4);
  std::vector<Matrix> w;
  const Matrix out = a(g, g.constant(q), g.constant(kv), g.constant(kv), &w).value();
  for (Eigen::Index i = 0; i < 3; ++i) CHECK((out.row(i) - kv.row(0)).norm() < 1e-12);
  REQUIRE(w.size() == 1);
  CHECK((w[0].array() == 1.0).all());
}

TEST_CASE("attention: symmetric 2x2 case averages the values") {
  ParameterStore s;
  Rng rng(1);
  MultiHeadAttention a(s, "a", 1, 1, rng);
  for (const auto* l : {&a.q(), &a.k(), &a.v(), &a.o()}) set_identity(s, *l);
  Graph g(s, false);
  const Matrix q = Matrix::Zero(1, 1), k = Matrix::Zero(2, 1);
  Matrix v(2, 1);
  v << 1, 3;
  CHECK(a(g, g.constant(q), g.constant(k), g.constant(v)).value()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("attention matches a straight-line reference and weights are a simplex") {
  ParameterStore s;
  Rng rng(2);
  MultiHeadAttention a(s, "a", 6, 2, rng);
  for (std::size_t i = 0; i < s.size(); ++i) s[i].value = testing::random_matrix(rng, s[i].value.rows(), s[i].value.cols(), 0.5);
  const Matrix q = testing::random_matrix(rng, 3, 6), k = testing::random_matrix(rng, 3, 6), v = testing::random_matrix(rng, 3, 6);
  Graph g(s, false);
  std::vector<Matrix> w;
  const Matrix out = a(g, g.constant(q), g.constant(k), g.constant(v), &w).value();
  CHECK((out - testing::reference_attention(s, a, q, k, v)).cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE(w.size() == 2);
  for (const auto& m : w) {
    CHECK(m.minCoeff() >= 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) CHECK(std::abs(m.row(r).sum() - 1) < 1e-6);
  }
}

TEST_CASE("attention errors: width mismatch, empty keys, key/value length mismatch") {
  ParameterStore s;
  Rng rng(1);
  MultiHeadAttention a(s, "a", 4, 2, rng);
  Graph g(s, false);
  CHECK_THROWS(a(g, g.constant(Matrix::Zero(2, 3)), g.constant(Matrix::Zero(2, 4)), g.constant(Matrix::Zero(2, 4))));
  CHECK_THROWS(a(g, g.constant(Matrix::Zero(2, 4)), g.constant(Matrix::Zero(0, 4)), g.constant(Matrix::Zero(0, 4))));
  CHECK_THROWS(a(g, g.constant(Matrix::Zero(2, 4)), g.constant(Matrix::Zero(2, 4)), g.constant(Matrix::Zero(3, 4))));
  CHECK_THROWS(MultiHeadAttention(s, "b", 5, 2, rng));
}

TEST_CASE("transformer layer: shape, permutation equivariance, width check") {
  ParameterStore s;
  Rng rng(3);
  TransformerLayer t(s, "t", 16, 4, 24, rng);
  const Matrix x = testing::random_matrix(rng, 5, 16);
  Graph g(s, false);
  const Matrix y = t(g, g.constant(x)).value();
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 16);
  const std::vector<int> perm{3, 0, 4, 1, 2};
  const Matrix yp = t(g, g.constant(permute_rows(x, perm))).value();
  CHECK((yp - permute_rows(y, perm)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(t(g, g.constant(Matrix::Zero(2, 8))));
}

TEST_CASE("transformer layer at full width keeps (5, 128)") {
  ParameterStore s;
  Rng rng(3);
  TransformerLayer t(s, "t", 128, 8, 512, rng);
  Graph g(s, false);
  const Matrix y = t(g, g.constant(testing::random_matrix(rng, 5, 128))).value();
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 128);
}

TEST_CASE("co-attention: shapes, single visual token, permutation equivariance") {
  ParameterStore s;
  Rng rng(4);
  CoAttention co(s, "co", 8, 2, rng);
  Graph g(s, false);
  const Matrix t = testing::random_matrix(rng, 7, 8), v = testing::random_matrix(rng, 12, 8);
  const auto [te, ve] = co(g, g.constant(t), g.constant(v));
  CHECK(te.rows() == 7);
  CHECK(ve.rows() == 12);
  CHECK(te.cols() == 8);

  CoAttention::Weights w;
  co(g, g.constant(t), g.constant(v.topRows(1)), &w);
  REQUIRE(w.text_to_visual.size() == 2);
  for (const auto& m : w.text_to_visual) CHECK((m.array() == 1.0).all());

  const std::vector<int> pt{6, 5, 4, 3, 2, 1, 0};
  const auto [te2, ve2] = co(g, g.constant(permute_rows(t, pt)), g.constant(v));
  CHECK((te2.value() - permute_rows(te.value(), pt)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ve2.value() - ve.value()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS(co(g, g.constant(Matrix::Zero(0, 8)), g.constant(v)));
}

TEST_CASE("two-way block: shapes at width 256 and width check") {
  ParameterStore s;
  Rng rng(5);
  TwoWayAttentionBlock b(s, "tw", 256, 8, 2048, rng);
  Graph g(s, false);
  const auto [p, img] = b(g, g.constant(testing::random_matrix(rng, 4, 256)), g.constant(testing::random_matrix(rng, 196, 256)));
  CHECK(p.rows() == 4);
  CHECK(p.cols() == 256);
  CHECK(img.rows() == 196);
  CHECK(img.cols() == 256);
  CHECK_THROWS(b(g, g.constant(Matrix::Zero(4, 128)), g.constant(Matrix::Zero(196, 256))));
}

TEST_CASE("two-way block with zeroed sublayer outputs reduces to the layer norms") {
  ParameterStore s;
  Rng rng(6);
  TwoWayAttentionBlock b(s, "tw", 8, 2, 16, rng);
  zero_linear(s, b.self_attention().o());
  zero_linear(s, b.prompt_to_image().o());
  zero_linear(s, b.image_to_prompt().o());
  zero_linear(s, b.mlp().output());
  const Matrix p = testing::random_matrix(rng, 3, 8), img = testing::random_matrix(rng, 9, 8);
  Graph g(s, false);
  const auto [po, io] = b(g, g.constant(p), g.constant(img));
  auto ln = [&](const std::string& name, Var x) {
    return ag::layer_norm_rows(x, g.param(*s.find("tw." + name + ".gamma")), g.param(*s.find("tw." + name + ".beta")));
  };
  const Matrix p_ref = ln("ln3", ln("ln2", ln("ln1", g.constant(p)))).value();
  const Matrix i_ref = ln("ln4", g.constant(img)).value();
  CHECK((po.value() - p_ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((io.value() - i_ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("downsampling arithmetic: 14 -> 7 -> 4 gives 512, 4 -> 2 -> 1 gives 32") {
  // floor((n + 2p - k) / s) + 1 with k=3, s=2, p=1.
  ParameterStore s;
  Rng rng(7);
  DownsampleNet net(s, "ds", 8, DownsampleConfig{}, rng);
  CHECK(net.output_width(14) == 32 * 4 * 4);
  CHECK(net.output_width(4) == 32 * 1 * 1);
  Graph g(s, false);
  CHECK(net(g, g.constant(testing::random_matrix(rng, 14 * 14, 8)), 14).cols() == 512);
  CHECK(net(g, g.constant(testing::random_matrix(rng, 16, 8)), 4).cols() == 32);
  CHECK_THROWS(net(g, g.constant(testing::random_matrix(rng, 15, 8)), 4));
}

TEST_CASE("MLP head: zero final layer, determinism without dropout, width check") {
  ParameterStore s;
  Rng rng(8);
  MlpHead head(s, "h", 6, {8, 8}, 0.1, rng);
  const Matrix x = testing::random_matrix(rng, 1, 6);
  Graph g(s, false);
  const Matrix a = head(g, g.constant(x), {}).value(), b = head(g, g.constant(x), {}).value();
  CHECK(a.cols() == 2);
  CHECK(a == b);
  zero_linear(s, head.last());
  CHECK(head(g, g.constant(x), {}).value() == Matrix::Zero(1, 2));
  CHECK_THROWS(head(g, g.constant(Matrix::Zero(1, 5)), {}));
}

TEST_CASE("dropout is active only in training mode and driven by the given stream") {
  ParameterStore s;
  Graph g(s, false);
  const Var x = g.constant(Matrix::Ones(4, 50));
  CHECK(dropout(g, x, 0.5, {}).value() == Matrix::Ones(4, 50));
  Rng r1(9), r2(9);
  const Matrix a = dropout(g, x, 0.5, {true, &r1}).value(), b = dropout(g, x, 0.5, {true, &r2}).value();
  CHECK(a == b);
  CHECK((a.array() == 0).count() > 0);
  CHECK(((a.array() == 0) || (a.array() == 2.0)).all());
  CHECK_THROWS(dropout(g, x, 0.5, {true, nullptr}));
}

TEST_CASE("finite-difference gradients of every block (float64, toy dims)") {
  Rng data(10);
  SUBCASE("attention") {
    ParameterStore s;
    Rng rng(1);
    MultiHeadAttention a(s, "a", 6, 2, rng);
    const Matrix q = testing::random_matrix(data, 3, 6), kv = testing::random_matrix(data, 4, 6);
    const auto r = testing::gradient_check(s, [&](Graph& g) { return testing::probe(g, a(g, g.constant(q), g.constant(kv), g.constant(kv))); });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
  SUBCASE("transformer layer") {
    ParameterStore s;
    Rng rng(1);
    TransformerLayer t(s, "t", 8, 2, 12, rng);
    const Matrix x = testing::random_matrix(data, 4, 8);
    const auto r = testing::gradient_check(s, [&](Graph& g) { return testing::probe(g, t(g, g.constant(x))); });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
  SUBCASE("co-attention") {
    ParameterStore s;
    Rng rng(1);
    CoAttention co(s, "co", 8, 2, rng);
    const Matrix t = testing::random_matrix(data, 3, 8), v = testing::random_matrix(data, 5, 8);
    const auto r = testing::gradient_check(s, [&](Graph& g) {
      const auto [a, b] = co(g, g.constant(t), g.constant(v));
      return ag::add(testing::probe(g, a, 1), testing::probe(g, b, 2));
    });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
  SUBCASE("two-way block") {
    ParameterStore s;
    Rng rng(1);
    TwoWayAttentionBlock b(s, "tw", 8, 2, 12, rng);
    const Matrix p = testing::random_matrix(data, 3, 8), img = testing::random_matrix(data, 6, 8);
    const auto r = testing::gradient_check(s, [&](Graph& g) {
      const auto [po, io] = b(g, g.constant(p), g.constant(img));
      return ag::add(testing::probe(g, po, 1), testing::probe(g, io, 2));
    });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
  SUBCASE("downsampling") {
    ParameterStore s;
    Rng rng(1);
    DownsampleNet net(s, "ds", 4, {3, 2, 1, 5, 3}, rng);
    const Matrix img = testing::random_matrix(data, 25, 4);
    const auto r = testing::gradient_check(s, [&](Graph& g) { return testing::probe(g, net(g, g.constant(img), 5)); });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
  SUBCASE("MLP head") {
    ParameterStore s;
    Rng rng(1);
    MlpHead head(s, "h", 6, {8, 8}, 0.1, rng);
    const Matrix x = testing::random_matrix(data, 1, 6);
    const auto r = testing::gradient_check(s, [&](Graph& g) { return ag::cross_entropy(head(g, g.constant(x), {}), 1); });
    INFO(r.worst);
    CHECK(r.max_rel_error < kTol);
  }
}
