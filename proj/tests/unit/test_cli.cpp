#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = testing::scratch_dir("cli");

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + VERACITY_CLI + "\" " + args + " >>\"" + (kWork / "cli.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// relative path -> bytes for every file under dir
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Spec and model config files shared by the cases below.
struct Fixture {
  fs::path spec = kWork / "spec.json";
  fs::path config = kWork / "model.json";
  fs::path data = kWork / "data";

  Fixture() {
    if (fs::exists(data / "manifest.json")) return;
    write(spec, veracity::synth_spec_to_json(testing::toy_spec(40)).dump());
    veracity::ModelConfig c = testing::toy_config();
    c.max_epochs = 2;
    c.batch_size = 8;
    json j = veracity::config_to_json(c);
    j["split"] = {0.6, 0.2, 0.2};
    write(config, j.dump());
    REQUIRE(run("synth --spec \"" + spec.string() + "\" --seed 3 --out \"" + data.string() + "\" --quiet") == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit with 2, --help with 0") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("synth") == 2);
  CHECK(run("train --data x --seed notanumber") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("train --help") == 0);
}

TEST_CASE_FIXTURE(Fixture, "synth output is byte-identical for the same seed") {
  const fs::path again = kWork / "data-again", other = kWork / "data-other";
  REQUIRE(run("synth --spec \"" + spec.string() + "\" --seed 3 --out \"" + again.string() + "\"") == 0);
  REQUIRE(run("synth --spec \"" + spec.string() + "\" --seed 4 --out \"" + other.string() + "\"") == 0);
  const auto a = tree(data), b = tree(again);
  CHECK(a.size() > 40);
  CHECK(a == b);
  CHECK(tree(other) != a);
  write(kWork / "bad-spec.json", "{\"n_samples\": -3}");
  CHECK(run("synth --spec \"" + (kWork / "bad-spec.json").string() + "\" --out \"" + (kWork / "x").string() + "\"") == 2);
}

TEST_CASE_FIXTURE(Fixture, "validate: clean corpus passes, a damaged blob is a data error") {
  CHECK(run("validate --data \"" + data.string() + "\"") == 0);
  CHECK(run("validate --data \"" + (kWork / "nowhere").string() + "\"") == 1);

  const fs::path broken = kWork / "broken";
  fs::remove_all(broken);
  fs::copy(data, broken, fs::copy_options::recursive);
  const json m = json::parse(slurp(broken / "manifest.json"));
  const std::string blob = m.at("records")[2].at("blobs").at("sem_text").get<std::string>();
  write(broken / blob, "FRTENSOR?");
  CHECK(run("validate --data \"" + broken.string() + "\"") == 1);
  CHECK(run("train --data \"" + broken.string() + "\" --config \"" + config.string() + "\" --quiet --out \"" +
            (kWork / "broken-run").string() + "\"") == 1);
}

TEST_CASE_FIXTURE(Fixture, "train then eval: files and schema") {
  const fs::path out = kWork / "run";
  REQUIRE(run("train --data \"" + data.string() + "\" --config \"" + config.string() + "\" --seed 7 --quiet --out \"" +
              out.string() + "\"") == 0);
  for (const char* f : {"resolved-config.json", "history.csv", "test-report.json", "checkpoint/checkpoint.json"})
    CHECK(fs::exists(out / f));

  const json resolved = json::parse(slurp(out / "resolved-config.json"));
  CHECK(resolved.at("model").at("seed") == 7);
  CHECK(resolved.at("split").get<std::vector<double>>() == std::vector<double>{0.6, 0.2, 0.2});
  CHECK(resolved.at("model").at("model_dim") == testing::toy_config().model_dim);

  const std::string hist = slurp(out / "history.csv");
  CHECK(hist.rfind("epoch,train_loss,val_loss,val_acc,val_macro_f1,fusion\n", 0) == 0);
  CHECK(line_count(hist) == 3);

  const json test = json::parse(slurp(out / "test-report.json"));
  CHECK(test.at("n") == 8);
  for (const char* k : {"accuracy", "macro_f1", "per_class", "confusion", "predictions"}) CHECK(test.contains(k));
  CHECK(test.at("predictions").size() == 8);

  const fs::path ev = kWork / "eval";
  REQUIRE(run("eval --ckpt \"" + (out / "checkpoint").string() + "\" --data \"" + data.string() + "\" --out \"" +
              ev.string() + "\"") == 0);
  const json rep = json::parse(slurp(ev / "eval-report.json"));
  CHECK(rep.at("n") == test.at("n"));
  CHECK(rep.at("accuracy") == test.at("accuracy"));
  CHECK(rep.at("predictions") == test.at("predictions"));

  CHECK(run("eval --ckpt \"" + (out / "checkpoint").string() + "\" --data \"" + data.string() + "\" --split all --out \"" +
            ev.string() + "\"") == 0);
  CHECK(json::parse(slurp(ev / "eval-report.json")).at("n") == 40);
  CHECK(run("eval --ckpt \"" + (out / "checkpoint").string() + "\" --data \"" + data.string() +
            "\" --split sideways --out \"" + ev.string() + "\"") == 2);
  CHECK(run("train --data \"" + data.string() + "\" --fusion MAX --out \"" + (kWork / "bad").string() + "\"") == 2);
  CHECK(run("train --data \"" + data.string() + "\" --components SEN,XYZ --out \"" + (kWork / "bad").string() + "\"") == 2);
}

TEST_CASE_FIXTURE(Fixture, "ablate and fuse-bench tables") {
  const fs::path out = kWork / "grid";
  REQUIRE(run("ablate --data \"" + data.string() + "\" --config \"" + config.string() + "\" --runs 1 --quiet --out \"" +
              out.string() + "\"") == 0);
  const std::string ab = slurp(out / "ablation.csv");
  CHECK(ab.rfind("SEN,SEM,SPA,TEM,acc_mean,acc_std,f1_mean,f1_std,runs\n", 0) == 0);
  CHECK(line_count(ab) == 8);
  CHECK(fs::exists(out / "ablation.json"));

  REQUIRE(run("fuse-bench --data \"" + data.string() + "\" --config \"" + config.string() +
              "\" --runs 1 --quiet --out \"" + out.string() + "\"") == 0);
  const std::string fu = slurp(out / "fusion.csv");
  CHECK(line_count(fu) == 7);
  for (const char* s : {"EARLY", "SUM_LINEAR", "SUM_SIGMOID", "MUL_SIGMOID", "SUM_TANH", "MUL_TANH"})
    CHECK(fu.find(std::string("\n") + s + ",") != std::string::npos);
}

TEST_CASE_FIXTURE(Fixture, "analyze writes the report and histogram tables") {
  const fs::path out = kWork / "analysis";
  REQUIRE(run("analyze --data \"" + data.string() + "\" --bins 8 --out \"" + out.string() + "\"") == 0);
  const json r = json::parse(slurp(out / "report.json"));
  for (const char* k : {"audio_sentiment", "text_visual_jsd", "color_richness", "text_dynamism"}) CHECK(r.contains(k));
  CHECK(line_count(slurp(out / "text_visual_jsd.csv")) == 9);
  CHECK(run("analyze --data \"" + data.string() + "\" --normalization cubic --out \"" + out.string() + "\"") == 2);
}
