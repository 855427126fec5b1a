#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

namespace veracity {

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  int support = 0;
};

struct Prediction {
  std::string id;
  int label = 0;
  int predicted = 0;
  double score_real = 0, score_fake = 0;  // final logits
};

struct EvalReport {
  int n = 0;
  double accuracy = 0;
  double macro_f1 = 0;
  ClassMetrics fake, real;
  // confusion[actual][predicted], index 0 = real, 1 = fake.
  std::array<std::array<int, 2>, 2> confusion{};
  std::vector<Prediction> predictions;
  std::vector<std::string> warnings;

  int tp() const { return confusion[1][1]; }
  int fp() const { return confusion[0][1]; }
  int fn() const { return confusion[1][0]; }
  int tn() const { return confusion[0][0]; }
};

// Undefined precision or recall (empty denominator) is reported as 0 with a warning.
EvalReport compute_metrics(const std::vector<int>& labels, const std::vector<int>& predicted);
EvalReport compute_metrics(const std::vector<Prediction>& predictions);

nlohmann::json report_to_json(const EvalReport& r);

// Index of the largest logit; ties go to the lower index.
int argmax2(double real, double fake);

}  // namespace veracity
