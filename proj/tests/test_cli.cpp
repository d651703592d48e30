#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "resp/config.hpp"
#include "resp/error.hpp"
#include "resp/nn/model.hpp"
#include "resp/pipeline.hpp"
#include "resp/wav.hpp"
#include "test_util.hpp"

using namespace resp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RESP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testutil::read_bytes(log)};
}

RunConfig tiny_config(const fs::path& out, int patients, int cycles) {
  RunConfig cfg;
  cfg.out_dir = out.string();
  cfg.seed = 11;
  cfg.synth.patients_per_class = patients;
  cfg.synth.cycles_per_recording = cycles;
  return cfg;
}

std::map<fs::path, std::string> tree_bytes(const fs::path& root) {
  std::map<fs::path, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root)] = testutil::read_bytes(e.path());
  }
  return out;
}

json read_json_file(const fs::path& p) { return json::parse(testutil::read_bytes(p)); }

std::vector<ImageRef> manifest_refs(const fs::path& out) {
  std::vector<ImageRef> refs;
  const auto manifest = read_json_file(out / "images" / "manifest.json");
  for (const auto& img : manifest["images"]) {
    refs.push_back({img["path"].get<std::string>(), img["patient"].get<int>(),
                    *parse_disease(img["label"].get<std::string>())});
  }
  return refs;
}

// One recording with the given cycles, written in corpus format.
void write_recording(const fs::path& root, int patient, const std::vector<std::pair<double, double>>& cycles,
                     double seconds, bool with_annotation = true) {
  const int fs_hz = 4000;
  std::vector<double> x(std::size_t(seconds * fs_hz));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * std::sin(2 * 3.14159265358979 * 300.0 * double(i) / fs_hz);
  const std::string stem = std::to_string(patient) + "_1b1_Al_sc_Meditron";
  write_wav16(root / (stem + ".wav"), x, fs_hz);
  if (with_annotation) {
    std::string txt;
    for (const auto& [a, b] : cycles) txt += std::to_string(a) + "\t" + std::to_string(b) + "\t0\t0\n";
    testutil::write_file(root / (stem + ".txt"), txt);
  }
}

}  // namespace

TEST_CASE("config json round trip") {
  RunConfig c;
  c.out_dir = "elsewhere";
  c.corpus_root = "/data/icbhi";
  c.seed = 99;
  c.scheme = Scheme::Chronic3;
  c.mode = ScalogramMode::Conventional;
  c.threads = 3;
  c.filter.order = 4;
  c.emd.max_imfs = 7;
  c.cwt.floor_db = -60;
  c.split.ratio = 0.75;
  c.model.input_size = 56;
  c.model.conv_filters = {8, 8, 12, 12};
  c.train.lr = 1e-3;
  c.train.batch = 12;
  c.train.stop_at_accuracy = 0.9;
  c.synth.short_cycles = 2;
  c.synth.include_excluded = true;
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(json::object()) == RunConfig{});

  const auto kind = [](const json& j) {
    try {
      config_from_json(j).validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind(json{{"filter", {{"x", 1}}}}) == ErrorKind::Config);
  CHECK(kind(json{{"colour", 1}}) == ErrorKind::Config);
  CHECK(kind(json{{"filter", {{"high_hz", 20000}}}}) == ErrorKind::Config);
  CHECK(kind(json{{"train", {{"batch", 7}}}}) == ErrorKind::Config);
  CHECK(kind(json{{"split", {{"ratio", 1.0}}}}) == ErrorKind::Config);
  CHECK(kind(json{{"mode", "spectral"}}) == ErrorKind::Config);
  CHECK(kind(json{{"seed", "abc"}}) == ErrorKind::Config);

  testutil::TempDir dir;
  testutil::write_file(dir / "c.json", to_json(c).dump());
  CHECK(load_config(dir / "c.json") == c);
  testutil::write_file(dir / "broken.json", "{\"seed\": ");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), Error);
}

TEST_CASE("synth corpus size and determinism") {
  testutil::TempDir dir;
  RunConfig cfg;
  cfg.out_dir = (dir / "a").string();
  cfg.seed = 5;
  std::ostringstream log;
  const auto r = pipeline::cmd_synth(cfg, log);
  CHECK(r.recordings == 24);
  CHECK(r.cycles == 120);
  const auto first = tree_bytes(cfg.corpus());
  CHECK(first.size() == 24 * 2 + 1);

  pipeline::cmd_synth(cfg, log);
  CHECK(tree_bytes(cfg.corpus()) == first);

  cfg.out_dir = (dir / "b").string();
  pipeline::cmd_synth(cfg, log);
  CHECK(tree_bytes(cfg.corpus()) == first);

  cfg.seed = 6;
  pipeline::cmd_synth(cfg, log);
  CHECK(tree_bytes(cfg.corpus()) != first);

  cfg.synth.include_excluded = true;
  CHECK(pipeline::cmd_synth(cfg, log).recordings == 32);
}

TEST_CASE("preprocess summaries and drops") {
  testutil::TempDir dir;
  const fs::path root = dir / "corpus";
  fs::create_directories(root);
  write_recording(root, 101, {{0.5, 4.5}, {5.0, 7.0}, {7.5, 11.0}}, 12.0);
  write_recording(root, 102, {{0.0, 3.5}}, 4.0);
  testutil::write_file(root / "patient_diagnosis.csv", "101,Healthy\n102,URTI\n");

  RunConfig cfg;
  cfg.out_dir = (dir / "out").string();
  cfg.corpus_root = root.string();
  std::ostringstream log;
  const auto r = pipeline::cmd_preprocess(cfg, log);
  CHECK(r.per_class.size() == 2);
  CHECK(r.per_class.at(Disease::Healthy).segments == 2);
  CHECK(r.per_class.at(Disease::URTI).segments == 1);
  CHECK(r.summary.kept == 3);
  CHECK(r.summary.dropped_short == 1);

  const auto summary = testutil::read_bytes(dir / "out" / "segments" / "summary.txt");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
  CHECK(summary.find("Healthy") != std::string::npos);
  CHECK(summary.find("URTI") != std::string::npos);
  CHECK(summary.find("COPD") == std::string::npos);

  const auto index = read_json_file(dir / "out" / "segments" / "index.json");
  CHECK(index["segments"].size() == 3);
  CHECK(index["dropped_short"] == 1);
  const auto seg = pipeline::read_segment(dir / "out" / "segments" / (index["segments"][0]["id"].get<std::string>() + ".f32"));
  CHECK(seg.samples().size() == kSegmentSamples);
  CHECK(seg.patient_id() == 101);

  fs::remove(root / "102_1b1_Al_sc_Meditron.txt");
  try {
    pipeline::cmd_preprocess(cfg, log);
    FAIL("expected MissingAnnotation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingAnnotation);
  }
  testutil::write_file(dir / "cfg.json", to_json(cfg).dump());
  const auto run = run_cli("--config " + (dir / "cfg.json").string() + " preprocess", dir / "log.txt");
  CHECK(run.code == 2);
  CHECK(run.output.find("102_1b1_Al_sc_Meditron") != std::string::npos);
}

TEST_CASE("conventional features: augmentation counts, class separation, determinism") {
  testutil::TempDir dir;
  RunConfig cfg = tiny_config(dir / "out", 1, 3);
  cfg.mode = ScalogramMode::Conventional;
  std::ostringstream log;
  pipeline::cmd_synth(cfg, log);
  const auto pre = pipeline::cmd_preprocess(cfg, log);
  for (const auto& [d, c] : pre.per_class) CHECK(c.segments == 3);
  const auto feat = pipeline::cmd_features(cfg, log);
  for (const auto& [d, c] : feat.per_class) CHECK(c.images == (d == Disease::COPD ? 3 : 12));
  CHECK(feat.images == 63);
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "images")) pngs += e.path().extension() == ".png";
  CHECK(pngs == 63);
  CHECK_FALSE(fs::exists(dir / "out" / "images" / "selected_imfs.json"));

  // Class-mean images (jet variants only, one per segment) differ pairwise.
  std::vector<ImageRef> refs;
  for (const auto& r : manifest_refs(dir / "out")) {
    if (r.disease == Disease::COPD || r.path.find("_jet.png") != std::string::npos) refs.push_back(r);
  }
  const auto set = pipeline::load_image_set(dir / "out", refs, Scheme::Pathological6, 56);
  std::map<int, std::vector<double>> mean;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& m = mean[set.labels[i]];
    m.resize(set.sample_size());
    for (std::size_t k = 0; k < set.sample_size(); ++k) m[k] += set.pixels[i * set.sample_size() + k] / 3.0;
  }
  REQUIRE(mean.size() == 6);
  for (const auto& [a, ma] : mean) {
    for (const auto& [b, mb] : mean) {
      if (a >= b) continue;
      double d2 = 0;
      for (std::size_t k = 0; k < ma.size(); ++k) d2 += (ma[k] - mb[k]) * (ma[k] - mb[k]);
      CHECK(std::sqrt(d2) > 0.0);
    }
  }

  const auto before = tree_bytes(dir / "out" / "images");
  pipeline::cmd_features(cfg, log);
  CHECK(tree_bytes(dir / "out" / "images") == before);
  cfg.threads = 3;
  pipeline::cmd_features(cfg, log);
  CHECK(tree_bytes(dir / "out" / "images") == before);
}

TEST_CASE("hybrid pipeline through evaluation") {
  testutil::TempDir dir;
  RunConfig cfg = tiny_config(dir / "out", 2, 1);
  cfg.model.input_size = 32;
  cfg.model.conv_filters = {4, 4, 4, 4};
  cfg.model.fc_widths = {8, 8, 8, 8, 8};
  cfg.train.epochs = 1;
  cfg.train.lr = 1e-3;
  cfg.threads = 2;
  std::ostringstream log;
  pipeline::cmd_synth(cfg, log);
  pipeline::cmd_preprocess(cfg, log);
  const auto feat = pipeline::cmd_features(cfg, log);
  CHECK(feat.images == 2 * (5 * 4 + 1));

  const auto sidecar = read_json_file(dir / "out" / "images" / "selected_imfs.json");
  REQUIRE(sidecar["segments"].size() == 12);
  for (const auto& s : sidecar["segments"]) {
    CHECK(s["imf"].get<std::size_t>() >= 1);
    CHECK(s["imf"].get<std::size_t>() <= s["n_imfs"].get<std::size_t>());
    CHECK(s["n_imfs"].get<std::size_t>() <= 9);
  }

  const auto split = pipeline::cmd_split(cfg, log);
  CHECK(split.train.size() + split.val.size() == feat.images);
  const auto trained = pipeline::cmd_train(cfg, log);
  CHECK(trained.log.size() == 1);
  CHECK(fs::exists(dir / "out" / "model.ckpt"));

  const auto rep = pipeline::cmd_eval(cfg, log);
  CHECK(rep.cm.total() == split.val.size());
  const auto report = read_json_file(dir / "out" / "report.json");
  std::size_t sum = 0;
  for (const auto& row : report["confusion_matrix"]) {
    for (const auto& v : row) sum += v.get<std::size_t>();
  }
  CHECK(sum == split.val.size());

  testutil::write_file(dir / "cfg.json", to_json(cfg).dump());
  const auto run = run_cli("--config " + (dir / "cfg.json").string() + " eval", dir / "log.txt");
  CHECK(run.code == 0);
  CHECK(run.output.find("ICBHI") != std::string::npos);

  // Single-segment subcommands on one stored segment.
  const auto index = read_json_file(dir / "out" / "segments" / "index.json");
  const fs::path seg = dir / "out" / "segments" / index["segments"][0]["file"].get<std::string>();
  const auto emd = pipeline::cmd_emd(cfg, seg, log);
  CHECK(emd.selected_index < emd.n_imfs);
  const auto emd_meta = read_json_file(dir / "out" / "emd" / (index["segments"][0]["id"].get<std::string>() + ".imfs.json"));
  CHECK(emd_meta["n_imfs"] == emd.n_imfs);
  CHECK(fs::file_size(dir / "out" / "emd" / (index["segments"][0]["id"].get<std::string>() + ".imfs.f32")) ==
        emd.n_imfs * kSegmentSamples * 4);
  const auto png = pipeline::cmd_scalogram(cfg, seg, Colormap::Hot, log);
  CHECK(fs::exists(png));
}

TEST_CASE("analyze reports the default model") {
  testutil::TempDir dir;
  RunConfig cfg;
  cfg.out_dir = dir.path().string();
  std::ostringstream log;
  const auto r = pipeline::cmd_analyze(cfg, log);
  CHECK(r.params == r.params_enumerated);
  CHECK(r.params == nn::count_params(pipeline::model_spec(cfg)));
  CHECK(r.madd == nn::count_madd(pipeline::model_spec(cfg)));
  bool flatten = false;
  for (const auto& l : r.layers) {
    if (l.name.find("Flatten") != std::string::npos) flatten = l.output == nn::Shape{18816};
  }
  CHECK(flatten);
  const auto text = testutil::read_bytes(dir / "analysis.txt");
  CHECK(text.find("18816") != std::string::npos);
  CHECK(text.find(std::to_string(r.params)) != std::string::npos);
}

TEST_CASE("command-line exit codes") {
  testutil::TempDir dir;
  CHECK(run_cli("--help", dir / "l").code == 0);
  CHECK(run_cli("--no-such-flag", dir / "l").code == 1);
  CHECK(run_cli("frobnicate", dir / "l").code == 1);
  testutil::write_file(dir / "bad.json", R"({"train": {"batch": 5}})");
  const auto bad = run_cli("--config " + (dir / "bad.json").string() + " config", dir / "l");
  CHECK(bad.code == 1);
  CHECK(bad.output.find("error: ") != std::string::npos);
  CHECK(run_cli("--mode spectral config", dir / "l").code == 1);
  const auto good = run_cli("--seed 42 --mode conventional config", dir / "l");
  CHECK(good.code == 0);
  CHECK(json::parse(good.output)["seed"] == 42);
  CHECK(run_cli("--out " + (dir / "nothing").string() + " preprocess", dir / "l").code == 2);
  CHECK(run_cli("--out " + (dir / "nothing").string() + " train", dir / "l").code == 2);
  CHECK(run_cli("--out " + (dir / "s").string() + " synth", dir / "l").code == 0);
  CHECK(fs::exists(dir / "s" / "corpus" / "patient_diagnosis.csv"));
}
