#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "resp/nn/model.hpp"
#include "resp/nn/tensor.hpp"

namespace resp::nn {

enum class Mode { Train, Infer };

class Layer;

/// Per-call activations needed by backward(). Only train-mode forwards fill it.
class ForwardCache {
 public:
  ForwardCache();
  ~ForwardCache();
  ForwardCache(ForwardCache&&) noexcept;
  ForwardCache& operator=(ForwardCache&&) noexcept;

  bool valid() const;
  void clear();

 private:
  friend class Network;
  struct State;
  std::unique_ptr<State> state_;
};

/// A ModelSpec with instantiated parameters.
///
/// Parameter order is spec order: conv weight {out,in,kh,kw} and bias, BN
/// gamma and beta, dense weight {out,in} and bias. BN running mean/variance
/// are buffers, not parameters.
class Network {
 public:
  /// Kaiming-uniform fan-in init (bound 1/sqrt(fan_in)), zero biases,
  /// gamma = 1, beta = 0.
  Network(ModelSpec spec, std::uint64_t seed);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;

  const ModelSpec& spec() const { return spec_; }

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  std::vector<Tensor*> buffers();
  std::vector<const Tensor*> buffers() const;
  std::size_t param_count() const;

  /// Input {N, C, H, W}; returns class probabilities {N, classes}.
  /// Dropout masks derive from `seed`; BN uses batch statistics in Train mode.
  Tensor forward(const Tensor& input, Mode mode, std::uint64_t seed = 0,
                 ForwardCache* cache = nullptr);

  /// Mean cross-entropy against one-hot targets {N, classes}; accumulates
  /// into each parameter's grad and returns the loss.
  double backward(ForwardCache& cache, const Tensor& targets);

  void zero_grad();

  /// Sets every BN running mean/variance to the statistics of `input`.
  void calibrate_batchnorm(const Tensor& input);

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

void save_checkpoint(const std::filesystem::path& path, const Network& net);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace resp::nn
