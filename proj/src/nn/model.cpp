#include "resp/nn/model.hpp"

#include <sstream>

#include "resp/error.hpp"

namespace resp::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void shape_error(std::size_t index, const std::string& what) {
  throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(index) + ": " + what);
}

}  // namespace

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (numel(shape) != data.size()) {
    throw Error(ErrorKind::ShapeMismatch, "shape " + shape_string(shape) + " does not hold " +
                                              std::to_string(data.size()) + " values");
  }
}

std::string layer_name(const LayerSpec& layer) {
  return std::visit(
      overloaded{
          [](const Conv2D& c) {
            return "Conv2D " + std::to_string(c.kernel_h) + "x" + std::to_string(c.kernel_w) + "x" +
                   std::to_string(c.out_channels) + (c.padding == Padding::Same ? " same" : " valid");
          },
          [](const MaxPool2&) { return std::string("MaxPool 2x2"); },
          [](const BatchNorm2D&) { return std::string("BatchNorm2D"); },
          [](const ReLU&) { return std::string("ReLU"); },
          [](const Flatten&) { return std::string("Flatten"); },
          [](const Dense& d) { return "Dense " + std::to_string(d.out); },
          [](const Dropout& d) {
            std::ostringstream os;
            os << "Dropout " << d.rate;
            return os.str();
          },
          [](const Softmax&) { return std::string("Softmax"); },
      },
      layer);
}

std::vector<LayerInfo> infer_layers(const ModelSpec& spec) { return infer_layers(spec, spec.input_shape()); }

std::vector<LayerInfo> infer_layers(const ModelSpec& spec, const Shape& input) {
  if (spec.layers.empty() || !std::holds_alternative<Softmax>(spec.layers.back())) {
    throw Error(ErrorKind::ShapeMismatch, "model must end in Softmax");
  }
  std::vector<LayerInfo> out;
  Shape shape = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    LayerInfo info{layer_name(layer), {}, 0, 0};
    std::visit(
        overloaded{
            [&](const Conv2D& c) {
              if (shape.size() != 3) shape_error(i, "Conv2D needs a feature map");
              if (c.kernel_h < 1 || c.kernel_w < 1 || c.out_channels < 1) shape_error(i, "empty kernel");
              std::size_t h = shape[1], w = shape[2];
              if (c.padding == Padding::Valid) {
                if (h < c.kernel_h || w < c.kernel_w) shape_error(i, "kernel larger than input");
                h = h - c.kernel_h + 1;
                w = w - c.kernel_w + 1;
              }
              info.params = (c.kernel_h * c.kernel_w * shape[0] + 1) * c.out_channels;
              info.madd = c.kernel_h * c.kernel_w * shape[0] * c.out_channels * h * w;
              shape = {c.out_channels, h, w};
            },
            [&](const MaxPool2&) {
              if (shape.size() != 3) shape_error(i, "MaxPool needs a feature map");
              if (shape[1] < 2 || shape[2] < 2) shape_error(i, "feature map smaller than the pool");
              shape = {shape[0], shape[1] / 2, shape[2] / 2};
            },
            [&](const BatchNorm2D&) {
              if (shape.size() != 3) shape_error(i, "BatchNorm2D needs a feature map");
              info.params = 2 * shape[0];
            },
            [&](const ReLU&) {},
            [&](const Flatten&) {
              if (shape.size() != 3) shape_error(i, "Flatten needs a feature map");
              shape = {numel(shape)};
            },
            [&](const Dense& d) {
              if (shape.size() != 1) shape_error(i, "Dense needs flat input");
              if (d.out < 1) shape_error(i, "Dense needs at least one output");
              info.params = (shape[0] + 1) * d.out;
              info.madd = shape[0] * d.out;
              shape = {d.out};
            },
            [&](const Dropout& d) {
              if (!(d.rate >= 0.0 && d.rate < 1.0)) shape_error(i, "dropout rate outside [0, 1)");
            },
            [&](const Softmax&) {
              if (i + 1 != spec.layers.size()) shape_error(i, "Softmax must be the last layer");
              if (shape.size() != 1 || shape[0] != spec.classes) {
                shape_error(i, "Softmax width " + shape_string(shape) + " != class count " +
                                   std::to_string(spec.classes));
              }
            },
        },
        layer);
    info.output = shape;
    out.push_back(std::move(info));
  }
  return out;
}

std::size_t count_params(const ModelSpec& spec) {
  std::size_t total = 0;
  for (const auto& l : infer_layers(spec)) total += l.params;
  return total;
}

std::size_t count_madd(const ModelSpec& spec) { return count_madd(spec, spec.input_shape()); }

std::size_t count_madd(const ModelSpec& spec, const Shape& input) {
  std::size_t total = 0;
  for (const auto& l : infer_layers(spec, input)) total += l.madd;
  return total;
}

ModelSpec build_proposed(const ProposedOptions& opts) {
  if (opts.classes != 3 && opts.classes != 6) {
    throw Error(ErrorKind::BadClassCount, "classes must be 3 or 6, got " + std::to_string(opts.classes));
  }
  if (opts.conv_filters.size() != 4) throw Error(ErrorKind::Config, "conv_filters needs 4 entries");
  ModelSpec spec;
  spec.input_height = spec.input_width = opts.input_size;
  spec.input_channels = 3;
  spec.classes = opts.classes;
  auto& L = spec.layers;
  L.push_back(Conv2D{5, 5, opts.conv_filters[0], Padding::Same});
  L.push_back(ReLU{});
  L.push_back(MaxPool2{});
  for (std::size_t k = 1; k < 4; ++k) {
    L.push_back(Conv2D{3, 3, opts.conv_filters[k], Padding::Same});
    L.push_back(BatchNorm2D{});
    L.push_back(ReLU{});
    L.push_back(MaxPool2{});
  }
  L.push_back(Flatten{});
  for (std::size_t w : opts.fc_widths) {
    L.push_back(Dense{w});
    L.push_back(ReLU{});
    L.push_back(Dropout{opts.dropout});
  }
  L.push_back(Dense{opts.classes});
  L.push_back(Softmax{});
  infer_layers(spec);
  return spec;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : spec.layers) {
    layers.push_back(std::visit(
        overloaded{
            [](const Conv2D& c) -> nlohmann::json {
              return {{"type", "conv2d"},
                      {"kernel", {c.kernel_h, c.kernel_w}},
                      {"out", c.out_channels},
                      {"padding", c.padding == Padding::Same ? "same" : "valid"}};
            },
            [](const MaxPool2&) -> nlohmann::json { return {{"type", "maxpool2"}}; },
            [](const BatchNorm2D& b) -> nlohmann::json {
              return {{"type", "batchnorm2d"}, {"eps", b.eps}, {"momentum", b.momentum}};
            },
            [](const ReLU&) -> nlohmann::json { return {{"type", "relu"}}; },
            [](const Flatten&) -> nlohmann::json { return {{"type", "flatten"}}; },
            [](const Dense& d) -> nlohmann::json { return {{"type", "dense"}, {"out", d.out}}; },
            [](const Dropout& d) -> nlohmann::json { return {{"type", "dropout"}, {"rate", d.rate}}; },
            [](const Softmax&) -> nlohmann::json { return {{"type", "softmax"}}; },
        },
        layer));
  }
  return {{"input", {spec.input_height, spec.input_width, spec.input_channels}},
          {"classes", spec.classes},
          {"layers", layers}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec;
    const auto& in = j.at("input");
    spec.input_height = in.at(0).get<std::size_t>();
    spec.input_width = in.at(1).get<std::size_t>();
    spec.input_channels = in.at(2).get<std::size_t>();
    spec.classes = j.at("classes").get<std::size_t>();
    for (const auto& l : j.at("layers")) {
      const auto type = l.at("type").get<std::string>();
      if (type == "conv2d") {
        const auto pad = l.at("padding").get<std::string>();
        if (pad != "same" && pad != "valid") throw Error(ErrorKind::ParseError, "padding " + pad);
        spec.layers.push_back(Conv2D{l.at("kernel").at(0).get<std::size_t>(),
                                     l.at("kernel").at(1).get<std::size_t>(),
                                     l.at("out").get<std::size_t>(),
                                     pad == "same" ? Padding::Same : Padding::Valid});
      } else if (type == "maxpool2") {
        spec.layers.push_back(MaxPool2{});
      } else if (type == "batchnorm2d") {
        spec.layers.push_back(BatchNorm2D{l.at("eps").get<double>(), l.at("momentum").get<double>()});
      } else if (type == "relu") {
        spec.layers.push_back(ReLU{});
      } else if (type == "flatten") {
        spec.layers.push_back(Flatten{});
      } else if (type == "dense") {
        spec.layers.push_back(Dense{l.at("out").get<std::size_t>()});
      } else if (type == "dropout") {
        spec.layers.push_back(Dropout{l.at("rate").get<double>()});
      } else if (type == "softmax") {
        spec.layers.push_back(Softmax{});
      } else {
        throw Error(ErrorKind::ParseError, "unknown layer type " + type);
      }
    }
    infer_layers(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model spec: ") + e.what());
  }
}

}  // namespace resp::nn
