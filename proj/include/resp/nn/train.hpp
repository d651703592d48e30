#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "resp/metrics.hpp"
#include "resp/nn/adam.hpp"
#include "resp/nn/network.hpp"

namespace resp::nn {

/// Images held as bytes {N, C, H, W}; converted to [0, 1] per batch.
struct ImageSet {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const { return channels * height * width; }
  Tensor batch(std::span<const std::size_t> indices) const;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch = 6;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  /// Stop after the first epoch whose validation accuracy reaches this; 0 disables.
  double stop_at_accuracy = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  /// Loss of the first training batch at initialization.
  double initial_loss = 0.0;
};

/// Balanced mini-batch Adam training with per-epoch validation.
TrainResult train(Network& net, const ImageSet& train_set, const ImageSet& val_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

struct Evaluation {
  std::vector<int> predictions;
  double loss = 0.0;
};

/// Inference-mode predictions in fixed-size chunks.
Evaluation predict(Network& net, const ImageSet& set, std::size_t chunk = 32);

MetricsReport evaluate(Network& net, const ImageSet& set, std::size_t healthy_index,
                       std::vector<std::string> class_names = {});

}  // namespace resp::nn
