#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "resp/config.hpp"
#include "resp/error.hpp"
#include "resp/pipeline.hpp"

namespace {

bool is_usage_error(resp::ErrorKind k) {
  using resp::ErrorKind;
  return k == ErrorKind::Config || k == ErrorKind::IndivisibleBatch || k == ErrorKind::BadClassCount;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Respiratory sound classification with hybrid EMD/CWT scalograms"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> scheme;
  std::optional<int> threads;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--mode", mode, "Scalogram mode")->check(CLI::IsMember({"hybrid", "conventional"}));
  app.add_option("--scheme", scheme, "Label scheme")->check(CLI::IsMember({"pathological6", "chronic3"}));
  app.add_option("--threads", threads, "Worker threads for per-segment stages")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");

  std::string segment;
  std::string colormap = "parula";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  auto* preprocess = app.add_subcommand("preprocess", "Filter, resample and cut cycles into segments");
  auto* emd = app.add_subcommand("emd", "Decompose one segment into IMFs");
  emd->add_option("--segment", segment, "Segment .f32 file")->required();
  auto* scalo = app.add_subcommand("scalogram", "Render one segment's scalogram");
  scalo->add_option("--segment", segment, "Segment .f32 file")->required();
  scalo->add_option("--colormap", colormap, "parula, hsv, jet or hot")
      ->check(CLI::IsMember({"parula", "hsv", "jet", "hot"}));
  auto* features = app.add_subcommand("features", "Render augmented scalogram images");
  auto* split = app.add_subcommand("split", "Patient-independent train/validation split");
  auto* train = app.add_subcommand("train", "Train the classifier");
  auto* eval = app.add_subcommand("eval", "Evaluate the checkpoint on the validation split");
  auto* analyze = app.add_subcommand("analyze", "Per-layer shapes, parameters and MAdds");
  auto* config = app.add_subcommand("config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    resp::RunConfig cfg = config_path.empty() ? resp::RunConfig{} : resp::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (mode) cfg.mode = resp::parse_mode(*mode);
    if (scheme) cfg.scheme = resp::parse_scheme(*scheme);
    if (threads) cfg.threads = *threads;
    if (out) cfg.out_dir = *out;
    cfg.validate();

    namespace pl = resp::pipeline;
    auto& log = std::cout;
    if (*synth) pl::cmd_synth(cfg, log);
    else if (*preprocess) pl::cmd_preprocess(cfg, log);
    else if (*emd) pl::cmd_emd(cfg, segment, log);
    else if (*scalo) pl::cmd_scalogram(cfg, segment, *resp::parse_colormap(colormap), log);
    else if (*features) pl::cmd_features(cfg, log);
    else if (*split) pl::cmd_split(cfg, log);
    else if (*train) pl::cmd_train(cfg, log);
    else if (*eval) pl::cmd_eval(cfg, log);
    else if (*analyze) pl::cmd_analyze(cfg, log);
    else if (*config) std::cout << resp::to_json(cfg).dump(2) << "\n";
  } catch (const resp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
