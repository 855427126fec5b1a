#include "veracity/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace veracity {

namespace {

void check_pair(Eigen::Index a, Eigen::Index b) {
  if (a != 2 || b != 2) throw std::invalid_argument("fuse: both score vectors must have length 2");
}

void check_label(int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("invalid label " + std::to_string(label));
}

}  // namespace

Logits fuse(const Logits& s, const Logits& e, FusionStrategy strategy) {
  check_pair(s.size(), e.size());
  const auto sig = [](const Logits& x) -> Logits { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); };
  switch (strategy) {
    case FusionStrategy::sum_linear: return s + e;
    case FusionStrategy::sum_sigmoid: return s + sig(e);
    case FusionStrategy::mul_sigmoid: return s.cwiseProduct(sig(e));
    case FusionStrategy::sum_tanh: return s + Logits(e.array().tanh().matrix());
    case FusionStrategy::mul_tanh: return s.cwiseProduct(Logits(e.array().tanh().matrix()));
    case FusionStrategy::early: break;
  }
  throw std::invalid_argument("fuse: EARLY fusion is assembled in the model, not a late-fusion rule");
}

ag::Var fuse(ag::Var s, ag::Var e, FusionStrategy strategy) {
  check_pair(s.cols(), e.cols());
  switch (strategy) {
    case FusionStrategy::sum_linear: return ag::add(s, e);
    case FusionStrategy::sum_sigmoid: return ag::add(s, ag::sigmoid(e));
    case FusionStrategy::mul_sigmoid: return ag::mul(s, ag::sigmoid(e));
    case FusionStrategy::sum_tanh: return ag::add(s, ag::tanh(e));
    case FusionStrategy::mul_tanh: return ag::mul(s, ag::tanh(e));
    case FusionStrategy::early: break;
  }
  throw std::invalid_argument("fuse: EARLY fusion is assembled in the model, not a late-fusion rule");
}

double cross_entropy(const Logits& z, int label) {
  check_label(label);
  if (z.size() != 2) throw std::invalid_argument("cross_entropy: expected 2 logits");
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum()) - z(label);
}

double total_loss(const Logits& fused, const Logits& s, const Logits& e, int label, double alpha, double beta) {
  return cross_entropy(fused, label) + alpha * cross_entropy(s, label) + beta * cross_entropy(e, label);
}

ag::Var total_loss(ag::Var fused, ag::Var s, ag::Var e, int label, double alpha, double beta) {
  check_label(label);
  ag::Var loss = ag::cross_entropy(fused, label);
  loss = ag::add(loss, ag::scale(ag::cross_entropy(s, label), alpha));
  return ag::add(loss, ag::scale(ag::cross_entropy(e, label), beta));
}

}  // namespace veracity
