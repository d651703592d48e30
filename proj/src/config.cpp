#include "resp/config.hpp"

#include <set>

#include "resp/error.hpp"
#include "resp/nn/model.hpp"
#include "resp/preprocess.hpp"
#include "text_util.hpp"

namespace resp {

std::string_view mode_name(ScalogramMode m) {
  return m == ScalogramMode::Hybrid ? "hybrid" : "conventional";
}

ScalogramMode parse_mode(std::string_view name) {
  if (name == "hybrid") return ScalogramMode::Hybrid;
  if (name == "conventional") return ScalogramMode::Conventional;
  throw Error(ErrorKind::Config, "unknown mode '" + std::string(name) + "'");
}

std::filesystem::path RunConfig::corpus() const {
  if (!corpus_root.empty()) return corpus_root;
  return std::filesystem::path(out_dir) / "corpus";
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, what);
}

// Reads the keys of one JSON object and rejects any it was not asked for.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::Config, where_ + key + ": wrong type");
    }
  }

  const nlohmann::json* section(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      require(seen_.count(key) > 0, "unknown config key '" + where_ + key + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  require(!out_dir.empty(), "out_dir is empty");
  require(threads >= 1, "threads must be >= 1");
  require(filter.low_hz > 0 && filter.high_hz > filter.low_hz, "filter band must satisfy 0 < low < high");
  require(filter.target_fs == kTargetFs, "filter.target_fs must be 22050 (segments are 6 s at 22050 Hz)");
  require(filter.high_hz < filter.target_fs / 2, "filter high edge must be below target Nyquist");
  require(filter.order >= 1, "filter order must be >= 1");
  require(emd.max_imfs >= 1, "emd.max_imfs must be >= 1");
  require(emd.sd_threshold > 0, "emd.sd_threshold must be > 0");
  require(emd.max_iterations >= 1, "emd.max_iterations must be >= 1");
  require(cwt.gamma > 0 && cwt.time_bandwidth > 0, "cwt gamma and time_bandwidth must be > 0");
  require(cwt.voices_per_octave >= 1, "cwt.voices_per_octave must be >= 1");
  require(cwt.floor_db < 0, "cwt.floor_db must be negative");
  require(split.ratio > 0 && split.ratio < 1, "split.ratio must be in (0, 1)");
  require(model.dropout >= 0 && model.dropout < 1, "model.dropout must be in [0, 1)");
  require(train.batch >= 1 && train.batch % class_count(scheme) == 0,
          "train.batch must be a positive multiple of the class count");
  require(train.lr > 0 && train.eps > 0, "train.lr and train.eps must be > 0");
  require(train.beta1 >= 0 && train.beta1 < 1 && train.beta2 >= 0 && train.beta2 < 1,
          "train betas must be in [0, 1)");
  require(train.stop_at_accuracy >= 0 && train.stop_at_accuracy <= 1,
          "train.stop_at_accuracy must be in [0, 1]");
  require(synth.patients_per_class >= 1 && synth.cycles_per_recording >= 1,
          "synth needs at least one patient and cycle");
  require(synth.fs >= 2000 && synth.short_cycles >= 0, "synth.fs must be >= 2000 Hz");

  nn::ProposedOptions opts;
  opts.classes = class_count(scheme);
  opts.fc_widths = model.fc_widths;
  opts.dropout = model.dropout;
  opts.conv_filters = model.conv_filters;
  opts.input_size = model.input_size;
  try {
    nn::build_proposed(opts);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("model: ") + e.what());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"corpus_root", c.corpus_root},
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"scheme", scheme_name(c.scheme)},
      {"mode", mode_name(c.mode)},
      {"threads", c.threads},
      {"filter",
       {{"low_hz", c.filter.low_hz},
        {"high_hz", c.filter.high_hz},
        {"order", c.filter.order},
        {"target_fs", c.filter.target_fs}}},
      {"emd",
       {{"max_imfs", c.emd.max_imfs},
        {"sd_threshold", c.emd.sd_threshold},
        {"max_iterations", c.emd.max_iterations}}},
      {"cwt",
       {{"gamma", c.cwt.gamma},
        {"time_bandwidth", c.cwt.time_bandwidth},
        {"voices_per_octave", c.cwt.voices_per_octave},
        {"floor_db", c.cwt.floor_db}}},
      {"split", {{"ratio", c.split.ratio}}},
      {"model",
       {{"input_size", c.model.input_size},
        {"conv_filters", c.model.conv_filters},
        {"fc_widths", c.model.fc_widths},
        {"dropout", c.model.dropout}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch", c.train.batch},
        {"lr", c.train.lr},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"eps", c.train.eps},
        {"stop_at_accuracy", c.train.stop_at_accuracy}}},
      {"synth",
       {{"patients_per_class", c.synth.patients_per_class},
        {"cycles_per_recording", c.synth.cycles_per_recording},
        {"fs", c.synth.fs},
        {"short_cycles", c.synth.short_cycles},
        {"include_excluded", c.synth.include_excluded}}},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  Reader top(j, "");
  top.get("corpus_root", c.corpus_root);
  top.get("out_dir", c.out_dir);
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  std::string scheme(scheme_name(c.scheme));
  top.get("scheme", scheme);
  c.scheme = parse_scheme(scheme);
  std::string mode(mode_name(c.mode));
  top.get("mode", mode);
  c.mode = parse_mode(mode);

  if (const auto* s = top.section("filter")) {
    Reader r(*s, "filter.");
    r.get("low_hz", c.filter.low_hz);
    r.get("high_hz", c.filter.high_hz);
    r.get("order", c.filter.order);
    r.get("target_fs", c.filter.target_fs);
    r.finish();
  }
  if (const auto* s = top.section("emd")) {
    Reader r(*s, "emd.");
    r.get("max_imfs", c.emd.max_imfs);
    r.get("sd_threshold", c.emd.sd_threshold);
    r.get("max_iterations", c.emd.max_iterations);
    r.finish();
  }
  if (const auto* s = top.section("cwt")) {
    Reader r(*s, "cwt.");
    r.get("gamma", c.cwt.gamma);
    r.get("time_bandwidth", c.cwt.time_bandwidth);
    r.get("voices_per_octave", c.cwt.voices_per_octave);
    r.get("floor_db", c.cwt.floor_db);
    r.finish();
  }
  if (const auto* s = top.section("split")) {
    Reader r(*s, "split.");
    r.get("ratio", c.split.ratio);
    r.finish();
  }
  if (const auto* s = top.section("model")) {
    Reader r(*s, "model.");
    r.get("input_size", c.model.input_size);
    r.get("conv_filters", c.model.conv_filters);
    r.get("fc_widths", c.model.fc_widths);
    r.get("dropout", c.model.dropout);
    r.finish();
  }
  if (const auto* s = top.section("train")) {
    Reader r(*s, "train.");
    r.get("epochs", c.train.epochs);
    r.get("batch", c.train.batch);
    r.get("lr", c.train.lr);
    r.get("beta1", c.train.beta1);
    r.get("beta2", c.train.beta2);
    r.get("eps", c.train.eps);
    r.get("stop_at_accuracy", c.train.stop_at_accuracy);
    r.finish();
  }
  if (const auto* s = top.section("synth")) {
    Reader r(*s, "synth.");
    r.get("patients_per_class", c.synth.patients_per_class);
    r.get("cycles_per_recording", c.synth.cycles_per_recording);
    r.get("fs", c.synth.fs);
    r.get("short_cycles", c.synth.short_cycles);
    r.get("include_excluded", c.synth.include_excluded);
    r.finish();
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path.string()));
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace resp
