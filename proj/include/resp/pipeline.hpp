#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "resp/config.hpp"
#include "resp/metrics.hpp"
#include "resp/nn/model.hpp"
#include "resp/nn/train.hpp"
#include "resp/preprocess.hpp"
#include "resp/render.hpp"

// Subcommand bodies of the command-line tool. Each reads and writes files
// under the run's output directory and is deterministic in (config, seed).
namespace resp::pipeline {

struct SynthResult {
  int recordings = 0;
  int cycles = 0;
  std::filesystem::path root;
};
SynthResult cmd_synth(const RunConfig& cfg, std::ostream& log);

struct ClassCounts {
  int recordings = 0;
  int segments = 0;
  int patients = 0;
  int images = 0;
};

struct PreprocessResult {
  std::map<Disease, ClassCounts> per_class;
  SegmentationSummary summary;
  std::vector<std::string> warnings;
};
PreprocessResult cmd_preprocess(const RunConfig& cfg, std::ostream& log);

struct FeaturesResult {
  std::map<Disease, ClassCounts> per_class;
  std::size_t images = 0;
};
FeaturesResult cmd_features(const RunConfig& cfg, std::ostream& log);

SplitManifest cmd_split(const RunConfig& cfg, std::ostream& log);

nn::TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);

MetricsReport cmd_eval(const RunConfig& cfg, std::ostream& log);

struct AnalyzeResult {
  std::vector<nn::LayerInfo> layers;
  std::size_t params = 0;             // formula
  std::size_t params_enumerated = 0;  // sum of instantiated tensor sizes
  std::size_t madd = 0;
};
AnalyzeResult cmd_analyze(const RunConfig& cfg, std::ostream& log);

struct EmdResult {
  std::size_t n_imfs = 0;
  std::size_t selected_index = 0;
  double coefficient = 0.0;
};
EmdResult cmd_emd(const RunConfig& cfg, const std::filesystem::path& segment, std::ostream& log);

std::filesystem::path cmd_scalogram(const RunConfig& cfg, const std::filesystem::path& segment,
                                    Colormap colormap, std::ostream& log);

// Helpers shared with tests.
nn::ModelSpec model_spec(const RunConfig& cfg);
void write_segment(const std::filesystem::path& dir, const CycleSegment& seg);
CycleSegment read_segment(const std::filesystem::path& f32_path);
std::string table_one(const std::map<Disease, ClassCounts>& counts, bool with_images);
nn::ImageSet load_image_set(const std::filesystem::path& out_dir, const std::vector<ImageRef>& refs,
                            Scheme scheme, std::size_t size);

}  // namespace resp::pipeline
