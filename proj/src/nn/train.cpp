#include "resp/nn/train.hpp"

#include <algorithm>
#include <cmath>

#include "../rng.hpp"
#include "resp/dataset.hpp"
#include "resp/error.hpp"

namespace resp::nn {
namespace {

Tensor one_hot(std::span<const int> labels, std::size_t classes) {
  Tensor t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) t.data[i * classes + std::size_t(labels[i])] = 1.0;
  return t;
}

}  // namespace

Tensor ImageSet::batch(std::span<const std::size_t> indices) const {
  const std::size_t per = sample_size();
  Tensor t({indices.size(), channels, height, width});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::uint8_t* src = pixels.data() + indices[b] * per;
    double* dst = t.data.data() + b * per;
    for (std::size_t i = 0; i < per; ++i) dst[i] = double(src[i]) / 255.0;
  }
  return t;
}

Evaluation predict(Network& net, const ImageSet& set, std::size_t chunk) {
  Evaluation ev;
  const std::size_t classes = net.spec().classes;
  double loss = 0.0;
  for (std::size_t start = 0; start < set.size(); start += chunk) {
    const std::size_t end = std::min(set.size(), start + chunk);
    std::vector<std::size_t> idx(end - start);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
    const Tensor probs = net.forward(set.batch(idx), Mode::Infer);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double* p = probs.data.data() + i * classes;
      ev.predictions.push_back(static_cast<int>(std::max_element(p, p + classes) - p));
      loss -= std::log(std::max(p[set.labels[idx[i]]], 1e-300));
    }
  }
  ev.loss = set.size() ? loss / double(set.size()) : 0.0;
  return ev;
}

TrainResult train(Network& net, const ImageSet& train_set, const ImageSet& val_set,
                  const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  TrainResult result;
  if (config.epochs == 0) return result;
  if (!(config.adam.lr > 0.0)) throw Error(ErrorKind::Config, "learning rate must be positive");

  const std::size_t classes = net.spec().classes;
  const BalancedBatcher batcher(train_set.labels, classes, config.batch, config.seed);
  auto params = net.params();
  AdamState adam;
  bool first = true;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = batcher.epoch(epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<int> labels;
      for (std::size_t i : batches[b]) labels.push_back(train_set.labels[i]);
      ForwardCache cache;
      net.zero_grad();
      net.forward(train_set.batch(batches[b]), Mode::Train,
                  detail::derive_seed(config.seed, (epoch << 32) | b), &cache);
      const double loss = net.backward(cache, one_hot(labels, classes));
      if (first) {
        result.initial_loss = loss;
        first = false;
      }
      loss_sum += loss;
      adam_step(params, adam, config.adam);
    }

    EpochLog log{epoch + 1, loss_sum / double(batches.size()), 0.0, 0.0};
    if (val_set.size() > 0) {
      const Evaluation ev = predict(net, val_set);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < ev.predictions.size(); ++i) hits += ev.predictions[i] == val_set.labels[i];
      log.val_loss = ev.loss;
      log.val_accuracy = double(hits) / double(val_set.size());
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (config.stop_at_accuracy > 0.0 && log.val_accuracy >= config.stop_at_accuracy) break;
  }
  return result;
}

MetricsReport evaluate(Network& net, const ImageSet& set, std::size_t healthy_index,
                       std::vector<std::string> class_names) {
  const Evaluation ev = predict(net, set);
  return report(confusion(set.labels, ev.predictions, net.spec().classes, std::move(class_names)),
                healthy_index);
}

}  // namespace resp::nn
