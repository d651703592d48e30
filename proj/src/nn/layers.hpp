#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "resp/nn/model.hpp"
#include "resp/nn/network.hpp"
#include "resp/nn/tensor.hpp"

namespace resp::nn {

struct LayerState {
  virtual ~LayerState() = default;
};

/// One executable layer. forward() fills `state` when it is non-null; the
/// matching backward() consumes it and accumulates parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& in, Mode mode, std::uint64_t seed,
                         std::unique_ptr<LayerState>* state) = 0;
  virtual Tensor backward(const Tensor& grad_out, LayerState& state) = 0;
  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<Tensor*> buffers() { return {}; }
};

/// `in_shape` excludes the batch dimension.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape, std::uint64_t seed);

/// Sets running statistics from `in` and returns the normalized batch; null
/// for layers other than BatchNorm2D.
Tensor* calibrate_if_batchnorm(Layer& layer, const Tensor& in, Tensor& out);

}  // namespace resp::nn
