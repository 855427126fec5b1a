// veracity: command-line front end for data generation, training,
// evaluation, ablation, fusion benchmarking and corpus analysis.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "veracity/analysis.hpp"
#include "veracity/split.hpp"
#include "veracity/synth.hpp"
#include "veracity/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace veracity;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

// Bad flags or config contents.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data, config, out = "out", ckpt, spec, fusion, components, split = "test", normalization = "softmax";
  std::optional<std::uint64_t> seed;
  int runs = 3;
  int bins = 20;
  bool quiet = false;
};

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw UsageError("cannot open " + p.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

fs::path manifest_path(const std::string& data) {
  if (data.empty()) throw UsageError("--data is required");
  const fs::path p(data);
  return fs::is_directory(p) ? p / "manifest.json" : p;
}

struct Resolved {
  ModelConfig model;
  SplitRatios ratios;
};

// Config file first, flags on top.
Resolved resolve(const Options& o) {
  Resolved r;
  json j = json::object();
  if (!o.config.empty()) j = read_json(o.config);
  try {
    if (j.contains("split")) {
      const auto s = j.at("split").get<std::vector<double>>();
      if (s.size() != 3) throw UsageError("config: split must list three ratios");
      r.ratios = {s[0], s[1], s[2]};
      j.erase("split");
    }
    r.model = config_from_json(j);
    if (o.seed) r.model.seed = *o.seed;
    if (!o.fusion.empty()) r.model.fusion = fusion_from_string(o.fusion);
    if (!o.components.empty()) r.model.components = Components::parse(o.components);
    r.model.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return r;
}

void write_resolved(const fs::path& out, const std::string& command, const Options& o, const Resolved& r) {
  const json j = {{"command", command},
                  {"data", o.data},
                  {"runs", o.runs},
                  {"split", {r.ratios.train, r.ratios.val, r.ratios.test}},
                  {"model", config_to_json(r.model)}};
  write_file(out / "resolved-config.json", j.dump(1) + "\n");
}

Split3 load_split(const Options& o, const SplitRatios& ratios) {
  const DatasetManifest m = load_manifest(manifest_path(o.data));
  const TemporalSplit s = temporal_split(m, ratios);
  return {m.dims, load_samples(s.train), load_samples(s.val), load_samples(s.test)};
}

void log(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << '\n';
}

std::string fmt_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100 * v);
  return buf;
}

int cmd_synth(const Options& o) {
  if (o.spec.empty()) throw UsageError("--spec is required");
  SynthSpec spec;
  try {
    spec = synth_spec_from_json(read_json(o.spec));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(o.spec + ": " + e.what());
  }
  SyntheticCorpus corpus = synthesize_dataset(spec, o.seed.value_or(0));
  const fs::path path = save_corpus(corpus, o.out);
  json resolved = {{"command", "synth"}, {"seed", o.seed.value_or(0)}, {"spec", synth_spec_to_json(spec)}};
  write_file(fs::path(o.out) / "resolved-config.json", resolved.dump(1) + "\n");
  int fake = 0;
  for (const auto& r : corpus.manifest.records) fake += r.label == kFake;
  std::cout << "wrote " << path.string() << ": " << corpus.manifest.size() << " samples (" << fake << " fake, "
            << corpus.manifest.size() - static_cast<std::size_t>(fake) << " real)\n";
  return kOk;
}

int cmd_validate(const Options& o) {
  const DatasetManifest m = parse_manifest(manifest_path(o.data));
  const auto diags = check_manifest(m);
  for (const auto& d : diags) std::cout << (d.sample_id.empty() ? "<manifest>" : d.sample_id) << ": " << d.message << '\n';
  if (!diags.empty()) {
    std::cout << diags.size() << " problem(s) found\n";
    return kDataError;
  }
  std::cout << "ok: " << m.size() << " records\n";
  return kOk;
}

int cmd_train(const Options& o) {
  const Resolved r = resolve(o);
  const Split3 data = load_split(o, r.ratios);
  const fs::path out(o.out);
  fs::create_directories(out);
  write_resolved(out, "train", o, r);
  log(o, "train " + std::to_string(data.train.size()) + " / val " + std::to_string(data.val.size()) + " / test " +
             std::to_string(data.test.size()));
  const TrainResult tr = train(r.model, data.dims, data.train, data.val, [&](const EpochRecord& e) {
    log(o, "epoch " + std::to_string(e.epoch) + " loss " + std::to_string(e.train_loss) + " val acc " +
               fmt_pct(e.val_acc) + " f1 " + fmt_pct(e.val_macro_f1));
  });
  tr.model->save(out / "checkpoint");
  write_file(out / "history.csv", history_csv(tr.history, r.model.fusion));
  const EvalReport test = evaluate(*tr.model, data.test);
  write_file(out / "test-report.json", report_to_json(test).dump(1) + "\n");
  std::cout << "best epoch " << tr.best_epoch << ", test acc " << fmt_pct(test.accuracy) << ", macro F1 "
            << fmt_pct(test.macro_f1) << '\n';
  return kOk;
}

int cmd_eval(const Options& o) {
  if (o.ckpt.empty()) throw UsageError("--ckpt is required");
  const auto model = FakeNewsModel::load(o.ckpt);
  const DatasetManifest m = load_manifest(manifest_path(o.data));
  if (!(m.dims == model->dims())) throw std::runtime_error("checkpoint feature dims do not match the manifest");
  DatasetManifest part = m;
  if (o.split != "all") {
    SplitRatios ratios;
    const fs::path resolved = fs::path(o.ckpt).parent_path() / "resolved-config.json";
    if (fs::exists(resolved)) {
      const auto s = read_json(resolved).at("split").get<std::vector<double>>();
      ratios = {s[0], s[1], s[2]};
    }
    const TemporalSplit s = temporal_split(m, ratios);
    if (o.split == "train") part = s.train;
    else if (o.split == "val") part = s.val;
    else if (o.split == "test") part = s.test;
    else throw UsageError("--split must be one of all, train, val, test");
  }
  const EvalReport rep = evaluate(*model, load_samples(part));
  const fs::path out(o.out);
  fs::create_directories(out);
  json resolved = {{"command", "eval"}, {"ckpt", o.ckpt}, {"data", o.data}, {"split", o.split},
                   {"model", config_to_json(model->config())}};
  write_file(out / "resolved-config.json", resolved.dump(1) + "\n");
  write_file(out / "eval-report.json", report_to_json(rep).dump(1) + "\n");
  std::cout << "n " << rep.n << ", acc " << fmt_pct(rep.accuracy) << ", macro F1 " << fmt_pct(rep.macro_f1) << '\n';
  return kOk;
}

json summary_json(const RunSummary& s) {
  json runs = json::array();
  for (const auto& r : s.reports) runs.push_back({{"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}});
  return {{"acc_mean", s.acc_mean}, {"acc_std", s.acc_std}, {"f1_mean", s.f1_mean}, {"f1_std", s.f1_std},
          {"runs", runs}};
}

int cmd_ablate(const Options& o) {
  const Resolved r = resolve(o);
  if (o.runs < 1) throw UsageError("--runs must be >= 1");
  const Split3 data = load_split(o, r.ratios);
  const fs::path out(o.out);
  fs::create_directories(out);
  write_resolved(out, "ablate", o, r);
  const auto sets = ablation_grid(r.model.components);
  std::vector<AblationRow> rows;
  for (const auto& c : sets) {
    log(o, "ablation row " + c.to_string());
    ModelConfig cfg = r.model;
    cfg.components = c;
    rows.push_back({c, repeated_runs(cfg, data, o.runs)});
  }
  write_file(out / "ablation.csv", ablation_csv(rows));
  json j = json::array();
  for (const auto& row : rows) j.push_back({{"components", row.components.to_string()}, {"test", summary_json(row.summary)}});
  write_file(out / "ablation.json", j.dump(1) + "\n");
  std::cout << ablation_csv(rows);
  return kOk;
}

int cmd_fuse_bench(const Options& o) {
  const Resolved r = resolve(o);
  if (o.runs < 1) throw UsageError("--runs must be >= 1");
  const Split3 data = load_split(o, r.ratios);
  const fs::path out(o.out);
  fs::create_directories(out);
  write_resolved(out, "fuse-bench", o, r);
  std::vector<FusionRow> rows;
  for (auto f : all_fusion_strategies()) {
    log(o, "fusion " + to_string(f));
    ModelConfig cfg = r.model;
    cfg.fusion = f;
    rows.push_back({f, repeated_runs(cfg, data, o.runs)});
  }
  write_file(out / "fusion.csv", fusion_csv(rows));
  json j = json::array();
  for (const auto& row : rows) j.push_back({{"strategy", to_string(row.strategy)}, {"test", summary_json(row.summary)}});
  write_file(out / "fusion.json", j.dump(1) + "\n");
  std::cout << fusion_csv(rows);
  return kOk;
}

int cmd_analyze(const Options& o) {
  Normalization mode;
  if (o.normalization == "softmax") mode = Normalization::softmax;
  else if (o.normalization == "shift_l1") mode = Normalization::shift_l1;
  else throw UsageError("--normalization must be softmax or shift_l1");
  if (o.bins < 1) throw UsageError("--bins must be >= 1");
  const DatasetManifest m = load_manifest(manifest_path(o.data));
  const AnalysisReport rep = corpus_report(load_samples(m), m.dims.sentiment_classes, mode);
  write_analysis(rep, o.out, o.bins);
  json resolved = {{"command", "analyze"}, {"data", o.data}, {"normalization", o.normalization}, {"bins", o.bins}};
  write_file(fs::path(o.out) / "resolved-config.json", resolved.dump(1) + "\n");
  auto line = [](const char* name, const ComparisonSummary& c) {
    std::cout << name << ": ";
    if (!c.available) std::cout << c.note << '\n';
    else std::cout << c.test << " stat " << c.statistic << ", p " << c.p_value << (c.significant ? " (p<0.05)" : "") << '\n';
  };
  std::cout << "audio sentiment: charged share fake " << rep.sentiment.charged_share(kFake) << ", real "
            << rep.sentiment.charged_share(kReal) << ", p " << rep.sentiment_p << '\n';
  line("text-visual JSD", rep.jsd);
  line("color richness", rep.color);
  line("text dynamism", rep.dynamism);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake news short-video detection: training, evaluation and corpus analysis"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool model_flags) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
    if (model_flags) {
      sub->add_option("--data", o.data, "Manifest file or its directory")->required();
      sub->add_option("--config", o.config, "Model config JSON");
      sub->add_option("--seed", o.seed, "Random seed");
      sub->add_option("--fusion", o.fusion, "EARLY, SUM_LINEAR, SUM_SIGMOID, MUL_SIGMOID, SUM_TANH or MUL_TANH");
      sub->add_option("--components", o.components, "Comma list of SEN,SEM,SPA,TEM");
    }
  };

  auto* synth = app.add_subcommand("synth", "Generate a planted-cue synthetic corpus");
  synth->add_option("--spec", o.spec, "Synthetic spec JSON")->required();
  synth->add_option("--seed", o.seed, "Random seed");
  common(synth, false);

  auto* validate = app.add_subcommand("validate", "Check a manifest and its blobs");
  validate->add_option("--data", o.data, "Manifest file or its directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train on the chronological train/val split");
  common(train_cmd, true);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", o.ckpt, "Checkpoint directory")->required();
  eval_cmd->add_option("--data", o.data, "Manifest file or its directory")->required();
  eval_cmd->add_option("--split", o.split, "all, train, val or test");
  common(eval_cmd, false);

  auto* ablate_cmd = app.add_subcommand("ablate", "Component ablation grid");
  common(ablate_cmd, true);
  ablate_cmd->add_option("--runs", o.runs, "Trainings per row");

  auto* bench = app.add_subcommand("fuse-bench", "Compare all fusion strategies");
  common(bench, true);
  bench->add_option("--runs", o.runs, "Trainings per strategy");

  auto* analyze = app.add_subcommand("analyze", "Fake-vs-real corpus measurements");
  analyze->add_option("--data", o.data, "Manifest file or its directory")->required();
  analyze->add_option("--normalization", o.normalization, "softmax or shift_l1");
  analyze->add_option("--bins", o.bins, "Histogram bins");
  common(analyze, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*validate) return cmd_validate(o);
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_eval(o);
    if (*ablate_cmd) return cmd_ablate(o);
    if (*bench) return cmd_fuse_bench(o);
    if (*analyze) return cmd_analyze(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsageError;
  } catch (const ManifestError& e) {
    std::cerr << "data error" << (e.sample_id().empty() ? "" : " in sample " + e.sample_id()) << ": " << e.what()
              << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
