#pragma once

#include <Eigen/Dense>

#include "veracity/autograd.hpp"
#include "veracity/config.hpp"

namespace veracity {

using Logits = Eigen::RowVectorXd;

// Late fusion of the selection (s) and editing (e) logits, elementwise:
//   SUM_LINEAR  s + e           SUM_SIGMOID s + sigmoid(e)   MUL_SIGMOID s * sigmoid(e)
//   SUM_TANH    s + tanh(e)     MUL_TANH    s * tanh(e)
// EARLY is not a late-fusion rule and is rejected.
Logits fuse(const Logits& s, const Logits& e, FusionStrategy strategy);
ag::Var fuse(ag::Var s, ag::Var e, FusionStrategy strategy);

double cross_entropy(const Logits& logits, int label);

// CE(fused, y) + alpha * CE(s, y) + beta * CE(e, y).
double total_loss(const Logits& fused, const Logits& s, const Logits& e, int label, double alpha, double beta);
ag::Var total_loss(ag::Var fused, ag::Var s, ag::Var e, int label, double alpha, double beta);

}  // namespace veracity
