#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "resp/dataset.hpp"

namespace resp {

enum class ScalogramMode { Hybrid, Conventional };

std::string_view mode_name(ScalogramMode m);
ScalogramMode parse_mode(std::string_view name);

/// Every knob of a pipeline run. Serialized as nested JSON; unknown keys are
/// rejected and missing keys keep their defaults.
struct RunConfig {
  std::string corpus_root;  // empty: <out_dir>/corpus
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Pathological6;
  ScalogramMode mode = ScalogramMode::Hybrid;
  int threads = 1;

  struct Filter {
    double low_hz = 50.0;
    double high_hz = 2500.0;
    int order = 6;
    double target_fs = 22050.0;
    bool operator==(const Filter&) const = default;
  } filter;

  struct Emd {
    std::size_t max_imfs = 9;
    double sd_threshold = 0.2;
    int max_iterations = 50;
    bool operator==(const Emd&) const = default;
  } emd;

  struct Cwt {
    double gamma = 3.0;
    double time_bandwidth = 60.0;
    int voices_per_octave = 10;
    double floor_db = -80.0;
    bool operator==(const Cwt&) const = default;
  } cwt;

  struct Split {
    double ratio = 0.8;
    bool operator==(const Split&) const = default;
  } split;

  struct Model {
    std::size_t input_size = 224;
    std::vector<std::size_t> conv_filters = {64, 64, 96, 96};
    std::vector<std::size_t> fc_widths = {188, 128, 96, 64, 32};
    double dropout = 0.5;
    bool operator==(const Model&) const = default;
  } model;

  struct Train {
    std::size_t epochs = 30;
    std::size_t batch = 6;
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double stop_at_accuracy = 0.0;
    bool operator==(const Train&) const = default;
  } train;

  struct Synth {
    int patients_per_class = 4;
    int cycles_per_recording = 5;
    double fs = 8000.0;
    int short_cycles = 0;  // extra sub-3 s cycles per recording
    bool include_excluded = false;
    bool operator==(const Synth&) const = default;
  } synth;

  bool operator==(const RunConfig&) const = default;

  std::filesystem::path corpus() const;
  std::filesystem::path out() const { return out_dir; }
  /// Throws Config when a knob violates a module precondition.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace resp
