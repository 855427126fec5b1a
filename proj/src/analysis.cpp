#include "veracity/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace veracity {

namespace fs = std::filesystem;

namespace {

constexpr double kAlpha = 0.05;

void finish(ComparisonSummary& c, const std::string& test, double stat, double p) {
  c.test = test;
  c.statistic = stat;
  c.p_value = p;
  c.significant = p < kAlpha;
  c.available = true;
}

nlohmann::json comparison_json(const ComparisonSummary& c) {
  if (!c.available) return {{"available", false}, {"note", c.note}};
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  return {{"available", true},
          {"test", c.test},
          {"statistic", c.statistic},
          {"p_value", c.p_value},
          {"significant", c.significant},
          {"fake_mean", mean(c.fake)},
          {"real_mean", mean(c.real)},
          {"fake", c.fake},
          {"real", c.real},
          {"note", c.note}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

std::vector<double> to_distribution(const Vector& v, Normalization mode) {
  if (v.size() == 0) throw std::invalid_argument("to_distribution: empty vector");
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  if (mode == Normalization::softmax) {
    const double m = v.maxCoeff();
    double sum = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) sum += out[static_cast<std::size_t>(i)] = std::exp(v(i) - m);
    for (double& x : out) x /= sum;
  } else {
    const double m = v.minCoeff();
    double sum = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) sum += out[static_cast<std::size_t>(i)] = v(i) - m;
    for (double& x : out) x = sum > 0 ? x / sum : 1.0 / static_cast<double>(out.size());
  }
  return out;
}

double text_visual_jsd(const FeatureBundle& b, Normalization mode) {
  if (b.sem_text.rows() == 0 || b.sem_frames.rows() == 0) throw std::invalid_argument("text_visual_jsd: missing features");
  if (b.sem_text.cols() != b.sem_frames.cols())
    throw std::invalid_argument("text_visual_jsd: text and frame features differ in width");
  const std::vector<double> text = to_distribution(b.sem_text.colwise().mean().transpose(), mode);
  double total = 0;
  for (Eigen::Index f = 0; f < b.sem_frames.rows(); ++f)
    total += js_divergence(text, to_distribution(b.sem_frames.row(f).transpose(), mode));
  return total / static_cast<double>(b.sem_frames.rows());
}

int SentimentDistribution::total(int label) const {
  const auto it = counts.find(label);
  if (it == counts.end()) return 0;
  int n = 0;
  for (int c : it->second) n += c;
  return n;
}

int SentimentDistribution::charged_count(int label) const {
  const auto it = counts.find(label);
  if (it == counts.end()) return 0;
  int n = 0;
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (classes[c] != "neutral") n += it->second[c];
  return n;
}

double SentimentDistribution::charged_share(int label) const {
  const int n = total(label);
  return n == 0 ? 0.0 : static_cast<double>(charged_count(label)) / n;
}

SentimentDistribution audio_sentiment_distribution(const std::vector<NewsVideoSample>& samples,
                                                   const std::vector<std::string>& classes) {
  if (classes.empty()) throw std::invalid_argument("audio_sentiment_distribution: no sentiment classes");
  SentimentDistribution d;
  d.classes = classes;
  for (int label : {kFake, kReal}) d.counts[label].assign(classes.size(), 0);
  for (const auto& s : samples) {
    const auto& p = s.analysis.audio_sentiment_probs;
    if (!p) {
      ++d.excluded;
      continue;
    }
    if (p->size() != classes.size()) throw std::invalid_argument("sample " + s.id + ": sentiment class count mismatch");
    const auto best = static_cast<std::size_t>(std::max_element(p->begin(), p->end()) - p->begin());
    ++d.counts[s.label][best];
  }
  for (const auto& [label, c] : d.counts) {
    const int n = d.total(label);
    auto& props = d.proportions[label];
    for (int x : c) props.push_back(n == 0 ? 0.0 : static_cast<double>(x) / n);
  }
  return d;
}

AnalysisReport corpus_report(const std::vector<NewsVideoSample>& samples, const std::vector<std::string>& classes,
                             Normalization mode) {
  AnalysisReport r;
  r.sentiment = audio_sentiment_distribution(samples, classes);
  const int nf = r.sentiment.total(kFake), nr = r.sentiment.total(kReal);
  if (nf > 0 && nr > 0) {
    const ZTestResult z = two_proportion_test(r.sentiment.charged_count(kFake), nf, r.sentiment.charged_count(kReal), nr);
    r.sentiment_z = z.statistic;
    r.sentiment_p = z.p_value;
  }

  for (const auto& s : samples) {
    auto& jsd = s.label == kFake ? r.jsd.fake : r.jsd.real;
    jsd.push_back(text_visual_jsd(s.bundle, mode));

    if (s.analysis.ocr_text_pixels) {
      auto& col = s.label == kFake ? r.color.fake : r.color.real;
      col.push_back(color_richness(*s.analysis.ocr_text_pixels));
    }

    std::vector<double> rel;
    for (std::size_t i = 0; i < s.text_segments.segments.size(); ++i) rel.push_back(s.text_segments.relative_duration(i));
    if (!rel.empty()) {
      auto& dyn = s.label == kFake ? r.dynamism.fake : r.dynamism.real;
      dyn.push_back(text_dynamism(rel));
    }
  }

  auto ks = [](ComparisonSummary& c, const char* what) {
    if (c.fake.empty() || c.real.empty()) {
      c.note = std::string("skipped: no ") + what + " values for one of the labels";
      return;
    }
    const KsResult k = ks_test(c.fake, c.real);
    finish(c, "ks", k.statistic, k.p_value);
  };
  ks(r.jsd, "JSD");
  ks(r.dynamism, "on-screen text");

  if (r.color.fake.size() < 2 || r.color.real.size() < 2) {
    r.color.note = "skipped: fewer than two samples with on-screen text pixels for one of the labels";
  } else {
    const TTestResult t = welch_t_test(r.color.fake, r.color.real);
    finish(r.color, "welch_t", t.statistic, t.p_value);
  }
  return r;
}

nlohmann::json analysis_to_json(const AnalysisReport& r) {
  const auto& s = r.sentiment;
  nlohmann::json sent = {{"classes", s.classes},
                         {"excluded", s.excluded},
                         {"fake", {{"counts", s.counts.at(kFake)}, {"proportions", s.proportions.at(kFake)},
                                   {"charged_share", s.charged_share(kFake)}}},
                         {"real", {{"counts", s.counts.at(kReal)}, {"proportions", s.proportions.at(kReal)},
                                   {"charged_share", s.charged_share(kReal)}}},
                         {"test", "two_proportion_z"},
                         {"statistic", r.sentiment_z},
                         {"p_value", r.sentiment_p},
                         {"significant", r.sentiment_p < kAlpha}};
  return {{"significance_threshold", kAlpha},
          {"audio_sentiment", sent},
          {"text_visual_jsd", comparison_json(r.jsd)},
          {"color_richness", comparison_json(r.color)},
          {"text_dynamism", comparison_json(r.dynamism)}};
}

std::string histogram_csv(const ComparisonSummary& c, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  std::ostringstream out;
  out << "bin_lo,bin_hi,fake_count,real_count,fake_density,real_density\n";
  if (c.fake.empty() && c.real.empty()) return out.str();
  double lo = INFINITY, hi = -INFINITY;
  for (const auto* v : {&c.fake, &c.real})
    for (double x : *v) lo = std::min(lo, x), hi = std::max(hi, x);
  if (hi == lo) hi = lo + 1;
  const double w = (hi - lo) / bins;
  std::vector<int> fc(static_cast<std::size_t>(bins)), rc(static_cast<std::size_t>(bins));
  auto fill = [&](const std::vector<double>& v, std::vector<int>& counts) {
    for (double x : v) counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>((x - lo) / w)))]++;
  };
  fill(c.fake, fc);
  fill(c.real, rc);
  char buf[160];
  for (int i = 0; i < bins; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double fd = c.fake.empty() ? 0.0 : fc[k] / (static_cast<double>(c.fake.size()) * w);
    const double rd = c.real.empty() ? 0.0 : rc[k] / (static_cast<double>(c.real.size()) * w);
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d,%d,%.9g,%.9g\n", lo + i * w, lo + (i + 1) * w, fc[k], rc[k], fd, rd);
    out << buf;
  }
  return out.str();
}

void write_analysis(const AnalysisReport& r, const fs::path& dir, int bins) {
  fs::create_directories(dir);
  write_text(dir / "report.json", analysis_to_json(r).dump(1) + "\n");

  std::ostringstream sent;
  sent << "class,fake_count,fake_proportion,real_count,real_proportion\n";
  for (std::size_t c = 0; c < r.sentiment.classes.size(); ++c) {
    sent << r.sentiment.classes[c] << ',' << r.sentiment.counts.at(kFake)[c] << ','
         << r.sentiment.proportions.at(kFake)[c] << ',' << r.sentiment.counts.at(kReal)[c] << ','
         << r.sentiment.proportions.at(kReal)[c] << '\n';
  }
  write_text(dir / "audio_sentiment.csv", sent.str());
  write_text(dir / "text_visual_jsd.csv", histogram_csv(r.jsd, bins));
  write_text(dir / "color_richness.csv", histogram_csv(r.color, bins));
  write_text(dir / "text_dynamism.csv", histogram_csv(r.dynamism, bins));
}

}  // namespace veracity
