#include "veracity/metrics.hpp"

#include <stdexcept>

#include "veracity/dataset.hpp"
#include "veracity/log.hpp"

namespace veracity {

namespace {

double ratio(int num, int den, const std::string& what, std::vector<std::string>& warnings) {
  if (den == 0) {
    warnings.push_back(what + " is undefined (no samples); reported as 0");
    warn(warnings.back());
    return 0.0;
  }
  return static_cast<double>(num) / den;
}

ClassMetrics class_metrics(int tp, int fp, int fn, const std::string& name, std::vector<std::string>& warnings) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, name + " precision", warnings);
  m.recall = ratio(tp, tp + fn, name + " recall", warnings);
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.support = tp + fn;
  return m;
}

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

int argmax2(double real, double fake) { return fake > real ? kFake : kReal; }

EvalReport compute_metrics(const std::vector<Prediction>& predictions) {
  EvalReport r;
  r.predictions = predictions;
  r.n = static_cast<int>(predictions.size());
  if (r.n == 0) throw std::invalid_argument("compute_metrics: no predictions");
  int correct = 0;
  for (const auto& p : predictions) {
    if ((p.label != kReal && p.label != kFake) || (p.predicted != kReal && p.predicted != kFake))
      throw std::invalid_argument("compute_metrics: labels must be 0 or 1");
    ++r.confusion[p.label][p.predicted];
    correct += p.label == p.predicted;
  }
  r.accuracy = static_cast<double>(correct) / r.n;
  r.fake = class_metrics(r.tp(), r.fp(), r.fn(), "fake", r.warnings);
  r.real = class_metrics(r.tn(), r.fn(), r.fp(), "real", r.warnings);
  r.macro_f1 = 0.5 * (r.fake.f1 + r.real.f1);
  return r;
}

EvalReport compute_metrics(const std::vector<int>& labels, const std::vector<int>& predicted) {
  if (labels.size() != predicted.size()) throw std::invalid_argument("compute_metrics: length mismatch");
  std::vector<Prediction> p(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p[i].id = std::to_string(i);
    p[i].label = labels[i];
    p[i].predicted = predicted[i];
  }
  return compute_metrics(p);
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"id", p.id}, {"label", p.label}, {"predicted", p.predicted},
                     {"logits", {p.score_real, p.score_fake}}});
  }
  return {{"n", r.n},
          {"accuracy", r.accuracy},
          {"macro_f1", r.macro_f1},
          {"per_class", {{"fake", class_json(r.fake)}, {"real", class_json(r.real)}}},
          {"confusion", {{"tp", r.tp()}, {"fp", r.fp()}, {"fn", r.fn()}, {"tn", r.tn()}}},
          {"warnings", r.warnings},
          {"predictions", preds}};
}

}  // namespace veracity
