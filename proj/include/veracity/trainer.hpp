#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracity/metrics.hpp"
#include "veracity/model.hpp"

namespace veracity {

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& sample_id, double loss);
  int epoch() const { return epoch_; }
  const std::string& sample_id() const { return sample_id_; }

 private:
  int epoch_;
  std::string sample_id_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
  double val_macro_f1 = 0;
};

struct TrainResult {
  std::unique_ptr<FakeNewsModel> model;  // parameters restored to the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  EpochRecord best;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam (0.9, 0.999, 1e-8), mini-batches reshuffled each epoch from the config
// seed, early stopping on validation macro F1 (ties broken by lower
// validation loss) with the configured patience.
TrainResult train(const ModelConfig& cfg, const FeatureDims& dims, const std::vector<NewsVideoSample>& train_set,
                  const std::vector<NewsVideoSample>& val_set, const EpochCallback& on_epoch = {});

EvalReport evaluate(const FakeNewsModel& model, const std::vector<NewsVideoSample>& samples);
double mean_loss(const FakeNewsModel& model, const std::vector<NewsVideoSample>& samples);

std::string history_csv(const std::vector<EpochRecord>& history, FusionStrategy fusion);

struct Split3 {
  FeatureDims dims;
  std::vector<NewsVideoSample> train, val, test;
};

struct RunSummary {
  std::vector<EvalReport> reports;  // one per run, on the test set
  double acc_mean = 0, acc_std = 0, f1_mean = 0, f1_std = 0;
};

// `runs` trainings with seeds cfg.seed, cfg.seed + 1, ...; population std.
RunSummary repeated_runs(const ModelConfig& cfg, const Split3& data, int runs);

struct AblationRow {
  Components components;
  RunSummary summary;
};

// Full set, selection-only, editing-only, then each single-component removal;
// empty or repeated sets are skipped. For SEN,SEM,SPA,TEM this gives 7 rows.
std::vector<Components> ablation_grid(const Components& base);

std::vector<AblationRow> ablate(const ModelConfig& cfg, const Split3& data, const std::vector<Components>& sets,
                                int runs);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct FusionRow {
  FusionStrategy strategy;
  RunSummary summary;
};

std::vector<FusionRow> fuse_bench(const ModelConfig& cfg, const Split3& data, int runs);
std::string fusion_csv(const std::vector<FusionRow>& rows);

}  // namespace veracity
