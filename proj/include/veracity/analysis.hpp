#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/dataset.hpp"
#include "veracity/stats.hpp"

namespace veracity {

enum class Normalization { softmax, shift_l1 };

// Maps a feature vector onto the simplex.
std::vector<double> to_distribution(const Vector& v, Normalization mode = Normalization::softmax);

// Mean JSD between the pooled (mean) text feature and every frame feature.
double text_visual_jsd(const FeatureBundle& bundle, Normalization mode = Normalization::softmax);

struct SentimentDistribution {
  std::vector<std::string> classes;
  std::map<int, std::vector<int>> counts;  // label -> per-class argmax counts
  std::map<int, std::vector<double>> proportions;
  int excluded = 0;  // samples without sentiment probabilities

  // Share of samples whose argmax class is not "neutral".
  double charged_share(int label) const;
  int charged_count(int label) const;
  int total(int label) const;
};

SentimentDistribution audio_sentiment_distribution(const std::vector<NewsVideoSample>& samples,
                                                   const std::vector<std::string>& classes);

struct ComparisonSummary {
  std::vector<double> fake, real;
  std::string test;  // "ks" or "welch_t"
  double statistic = 0;
  double p_value = 1;
  bool significant = false;  // p < 0.05
  bool available = false;
  std::string note;
};

struct AnalysisReport {
  SentimentDistribution sentiment;
  double sentiment_z = 0, sentiment_p = 1;
  ComparisonSummary jsd, color, dynamism;
};

AnalysisReport corpus_report(const std::vector<NewsVideoSample>& samples, const std::vector<std::string>& classes,
                             Normalization mode = Normalization::softmax);

nlohmann::json analysis_to_json(const AnalysisReport& r);

// report.json plus one CSV histogram table per measurement.
void write_analysis(const AnalysisReport& r, const std::filesystem::path& dir, int bins = 20);

// Histogram rows (bin_lo, bin_hi, fake_count, real_count, fake_density, real_density) as CSV.
std::string histogram_csv(const ComparisonSummary& c, int bins);

}  // namespace veracity
