#include "veracity/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace veracity {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class Adam {
 public:
  Adam(const ParameterStore& store, double lr) : lr_(lr), m_(zero_gradients(store)), v_(zero_gradients(store)) {}

  void step(ParameterStore& store, const GradientBuffer& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    for (std::size_t i = 0; i < store.size(); ++i) {
      if (!store[i].trainable) continue;
      m_[i] = b1_ * m_[i] + (1 - b1_) * grad[i];
      v_[i] = b2_ * v_[i] + (1 - b2_) * grad[i].cwiseAbs2();
      store[i].value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
  }

 private:
  double lr_;
  double b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  int t_ = 0;
  GradientBuffer m_, v_;
};

std::vector<Matrix> snapshot(const ParameterStore& store) {
  std::vector<Matrix> out;
  for (const auto& p : store) out.push_back(p.value);
  return out;
}

void restore(ParameterStore& store, const std::vector<Matrix>& values) {
  for (std::size_t i = 0; i < store.size(); ++i) store[i].value = values[i];
}

RunSummary summarize(std::vector<EvalReport> reports) {
  RunSummary s;
  s.reports = std::move(reports);
  const double n = static_cast<double>(s.reports.size());
  for (const auto& r : s.reports) {
    s.acc_mean += r.accuracy / n;
    s.f1_mean += r.macro_f1 / n;
  }
  for (const auto& r : s.reports) {
    s.acc_std += (r.accuracy - s.acc_mean) * (r.accuracy - s.acc_mean) / n;
    s.f1_std += (r.macro_f1 - s.f1_mean) * (r.macro_f1 - s.f1_mean) / n;
  }
  s.acc_std = std::sqrt(s.acc_std);
  s.f1_std = std::sqrt(s.f1_std);
  return s;
}

}  // namespace

TrainingDiverged::TrainingDiverged(int epoch, const std::string& sample_id, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " on sample " + sample_id +
                         " (loss " + num(loss) + ")"),
      epoch_(epoch),
      sample_id_(sample_id) {}

EvalReport evaluate(const FakeNewsModel& model, const std::vector<NewsVideoSample>& samples) {
  std::vector<Prediction> preds;
  preds.reserve(samples.size());
  for (const auto& s : samples) {
    const Logits z = model.predict(s);
    preds.push_back({s.id, s.label, argmax2(z(0), z(1)), z(0), z(1)});
  }
  return compute_metrics(preds);
}

double mean_loss(const FakeNewsModel& model, const std::vector<NewsVideoSample>& samples) {
  double total = 0;
  for (const auto& s : samples) {
    Graph g(model.parameters(), false);
    total += model.loss(model.forward(g, s, {}), s.label).value()(0, 0);
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const ModelConfig& cfg, const FeatureDims& dims, const std::vector<NewsVideoSample>& train_set,
                  const std::vector<NewsVideoSample>& val_set, const EpochCallback& on_epoch) {
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train: empty train or validation set");
  cfg.validate();

  TrainResult result;
  const Meam::Binners binners = cfg.components.tem ? fit_binners(train_set, cfg.duration_bins) : Meam::Binners{};
  result.model = std::make_unique<FakeNewsModel>(cfg, dims, binners);
  FakeNewsModel& model = *result.model;
  ParameterStore& store = model.parameters();
  Adam adam(store, cfg.learning_rate);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Matrix> best_params = snapshot(store);
  bool have_best = false;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffler = Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch), 0);
    shuffler.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      GradientBuffer grad = zero_gradients(store);
      for (std::size_t k = start; k < end; ++k) {
        const NewsVideoSample& s = train_set[order[k]];
        Rng dropout_rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch), order[k] + 1);
        Graph g(store, true);
        const Var loss = model.loss(model.forward(g, s, {true, &dropout_rng}), s.label);
        const double l = loss.value()(0, 0);
        if (!std::isfinite(l)) throw TrainingDiverged(epoch, s.id, l);
        epoch_loss += l;
        g.backward(loss);
        g.accumulate_gradients(grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (auto& m : grad) m *= inv;
      adam.step(store, grad);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    const EvalReport val = evaluate(model, val_set);
    rec.val_acc = val.accuracy;
    rec.val_macro_f1 = val.macro_f1;
    rec.val_loss = mean_loss(model, val_set);
    if (!std::isfinite(rec.val_loss)) throw TrainingDiverged(epoch, "<validation>", rec.val_loss);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool improved = !have_best || rec.val_macro_f1 > result.best.val_macro_f1 ||
                          (rec.val_macro_f1 == result.best.val_macro_f1 && rec.val_loss < result.best.val_loss);
    if (improved) {
      have_best = true;
      result.best = rec;
      result.best_epoch = epoch;
      best_params = snapshot(store);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  restore(store, best_params);
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history, FusionStrategy fusion) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_acc,val_macro_f1,fusion\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.val_loss) << ',' << num(r.val_acc) << ','
        << num(r.val_macro_f1) << ',' << to_string(fusion) << '\n';
  }
  return out.str();
}

RunSummary repeated_runs(const ModelConfig& cfg, const Split3& data, int runs) {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  std::vector<EvalReport> reports;
  for (int r = 0; r < runs; ++r) {
    ModelConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const TrainResult tr = train(c, data.dims, data.train, data.val);
    reports.push_back(evaluate(*tr.model, data.test));
  }
  return summarize(std::move(reports));
}

std::vector<Components> ablation_grid(const Components& base) {
  if (!base.any()) throw std::invalid_argument("ablation: empty component set");
  std::vector<Components> out;
  std::set<std::string> seen;
  auto push = [&](const Components& c) {
    if (c.any() && seen.insert(c.to_string()).second) out.push_back(c);
  };
  push(base);
  push({base.sen, base.sem, false, false});
  push({false, false, base.spa, base.tem});
  push({false, base.sem, base.spa, base.tem});
  push({base.sen, false, base.spa, base.tem});
  push({base.sen, base.sem, false, base.tem});
  push({base.sen, base.sem, base.spa, false});
  return out;
}

std::vector<AblationRow> ablate(const ModelConfig& cfg, const Split3& data, const std::vector<Components>& sets,
                                int runs) {
  std::vector<AblationRow> rows;
  for (const auto& c : sets) {
    if (!c.any()) throw std::invalid_argument("ablation: empty component set");
    ModelConfig run_cfg = cfg;
    run_cfg.components = c;
    rows.push_back({c, repeated_runs(run_cfg, data, runs)});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "SEN,SEM,SPA,TEM,acc_mean,acc_std,f1_mean,f1_std,runs\n";
  for (const auto& r : rows) {
    const auto& c = r.components;
    out << c.sen << ',' << c.sem << ',' << c.spa << ',' << c.tem << ',' << num(r.summary.acc_mean) << ','
        << num(r.summary.acc_std) << ',' << num(r.summary.f1_mean) << ',' << num(r.summary.f1_std) << ','
        << r.summary.reports.size() << '\n';
  }
  return out.str();
}

std::vector<FusionRow> fuse_bench(const ModelConfig& cfg, const Split3& data, int runs) {
  std::vector<FusionRow> rows;
  for (auto f : all_fusion_strategies()) {
    ModelConfig c = cfg;
    c.fusion = f;
    rows.push_back({f, repeated_runs(c, data, runs)});
  }
  return rows;
}

std::string fusion_csv(const std::vector<FusionRow>& rows) {
  std::ostringstream out;
  out << "strategy,acc_mean,acc_std,f1_mean,f1_std,runs\n";
  for (const auto& r : rows) {
    out << to_string(r.strategy) << ',' << num(r.summary.acc_mean) << ',' << num(r.summary.acc_std) << ','
        << num(r.summary.f1_mean) << ',' << num(r.summary.f1_std) << ',' << r.summary.reports.size() << '\n';
  }
  return out.str();
}

}  // namespace veracity
