#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "resp/nn/tensor.hpp"

namespace resp::nn {

enum class Padding { Same, Valid };

struct Conv2D {
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t out_channels = 1;
  Padding padding = Padding::Same;
};
struct MaxPool2 {};  // 2x2, stride 2, floor
struct BatchNorm2D {
  double eps = 1e-5;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
};
struct ReLU {};
struct Flatten {};
struct Dense {
  std::size_t out = 1;
};
struct Dropout {
  double rate = 0.5;
};
struct Softmax {};

using LayerSpec = std::variant<Conv2D, MaxPool2, BatchNorm2D, ReLU, Flatten, Dense, Dropout, Softmax>;

std::string layer_name(const LayerSpec& layer);

/// Feature-map shape: {channels, height, width}; after Flatten: {features}.
struct ModelSpec {
  std::vector<LayerSpec> layers;
  std::size_t input_height = 224;
  std::size_t input_width = 224;
  std::size_t input_channels = 3;
  std::size_t classes = 6;

  Shape input_shape() const { return {input_channels, input_height, input_width}; }
};

struct LayerInfo {
  std::string name;
  Shape output;
  std::size_t params = 0;
  std::size_t madd = 0;
};

/// Shape inference; throws ShapeMismatch on incompatible layers or a missing
/// final Softmax.
std::vector<LayerInfo> infer_layers(const ModelSpec& spec);
std::vector<LayerInfo> infer_layers(const ModelSpec& spec, const Shape& input);

std::size_t count_params(const ModelSpec& spec);
std::size_t count_madd(const ModelSpec& spec);
std::size_t count_madd(const ModelSpec& spec, const Shape& input);

struct ProposedOptions {
  std::size_t classes = 6;
  std::vector<std::size_t> fc_widths = {188, 128, 96, 64, 32};
  double dropout = 0.5;
  std::vector<std::size_t> conv_filters = {64, 64, 96, 96};
  std::size_t input_size = 224;
};

/// Conv5x5 + ReLU + pool, three Conv3x3 + BN + ReLU + pool blocks, then five
/// Dense + ReLU + Dropout pairs and a Dense + Softmax head.
ModelSpec build_proposed(const ProposedOptions& opts);
inline ModelSpec build_proposed(std::size_t classes) {
  ProposedOptions o;
  o.classes = classes;
  return build_proposed(o);
}

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace resp::nn
